#include "nonconc/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <deque>
#include <limits>
#include <memory>

#include "nonconc/error.hpp"

namespace nonconc {

namespace {

struct Context {
  const std::function<double(std::span<const double>)>* f;
  std::size_t dim;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<Context*>(params);
  std::vector<double> x(ctx->dim);
  for (std::size_t i = 0; i < ctx->dim; ++i) x[i] = gsl_vector_get(v, i);
  double val = (*ctx->f)(x);
  // GSL rejects non-finite values; a huge finite number keeps the simplex
  // away from the region instead.
  return std::isfinite(val) ? val : std::numeric_limits<double>::max() / 4;
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& opts) {
  NelderMeadResult result;
  const std::size_t dim = x0.size();
  if (dim == 0) {
    result.value = f(x0);
    result.x = std::move(x0);
    result.converged = true;
    return result;
  }
  require(!opts.steps.empty() && (opts.steps.size() == 1 || opts.steps.size() == dim),
          "nelder_mead: steps must have one entry or one per coordinate");
  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;

  Context ctx{&f, dim};
  gsl_multimin_function fn{&trampoline, dim, &ctx};
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(dim));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x.get(), i, x0[i]);
    gsl_vector_set(step.get(), i, opts.steps.size() == 1 ? opts.steps[0] : opts.steps[i]);
  }
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());

  auto progress = [&](double v) { return opts.progress ? opts.progress(v) : v; };
  const std::size_t window = 2 * (dim + 1);
  std::deque<double> history;
  std::size_t it = 0;
  bool converged = false;
  while (it < opts.max_iterations) {
    ++it;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    double best = gsl_multimin_fminimizer_minimum(s.get());
    if (best <= opts.f_target) {
      converged = true;
      break;
    }
    history.push_back(progress(best));
    if (history.size() > window) {
      history.pop_front();
      if (std::abs(history.front() - history.back()) < opts.f_tolerance) {
        converged = true;
        break;
      }
    }
    if (gsl_multimin_fminimizer_size(s.get()) < opts.size_tolerance) {
      converged = true;
      break;
    }
  }
  const gsl_vector* xb = gsl_multimin_fminimizer_x(s.get());
  result.x.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) result.x[i] = gsl_vector_get(xb, i);
  result.value = f(result.x);
  result.iterations = it;
  result.converged = converged;
  return result;
}

}  // namespace nonconc
