#include "nonconc/parse.hpp"

#include <cctype>
#include <string>

#include "nonconc/error.hpp"

namespace nonconc {

namespace {

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xB7) {
      out += '*';
      ++i;
    } else if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x88 &&
               static_cast<unsigned char>(text[i + 2]) == 0x92) {
      out += '-';
      i += 2;
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

class Parser {
public:
  Parser(std::string text, std::span<const std::string> vars) : s_(std::move(text)), vars_(vars) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("expression parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial acc = term();
    while (true) {
      if (eat('+'))
        acc += term();
      else if (eat('-'))
        acc -= term();
      else
        return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    while (true) {
      if (eat('*')) {
        acc = acc * unary();
      } else if (eat('/')) {
        Polynomial d = unary();
        if (!d.is_constant() || d.is_zero()) fail("division is only allowed by nonzero constants");
        acc *= Rational(1 / d.constant_term());
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = atom();
    if (eat('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a nonnegative integer");
      unsigned long e = std::stoul(s_.substr(start, pos_ - start));
      if (e > kMaxExponent) fail("exponent too large");
      base = pow(base, static_cast<unsigned>(e));
    }
    return base;
  }

  Polynomial atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!eat(')')) fail("missing ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      return Polynomial::constant(vars_.size(), parse_rational(s_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return Polynomial::variable(vars_.size(), i);
      pos_ = start;
      fail("unknown variable '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, std::span<const std::string> vars) {
  require(vars.size() <= kMaxVars, "too many variables");
  return Parser(normalize(text), vars).parse();
}

}  // namespace nonconc
