#pragma once

#include <span>
#include <string>
#include <string_view>

#include "nonconc/poly.hpp"

namespace nonconc {

// Parses expressions such as "x1^2 - 3/4*x1*x2 + (x2 - 1)^3" over the named
// variables. Supports + - * / ^ and parentheses, integer, rational and
// decimal literals, and the unicode operators U+00B7 (middle dot) and U+2212
// (minus). Products need an explicit operator; division only by constants.
Polynomial parse_polynomial(std::string_view text, std::span<const std::string> vars);

}  // namespace nonconc
