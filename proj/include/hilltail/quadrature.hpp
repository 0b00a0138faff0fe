#pragma once

#include <cstddef>
#include <functional>

namespace hilltail {

struct QuadratureResult {
  double value = 0.0;
  std::size_t subdivisions = 0;
  bool converged = true;
};

// Adaptive Simpson on [a, b]. An interval is accepted once its Richardson
// error estimate drops below max(abs_tol, rel_tol * |whole-interval estimate|)
// scaled by the interval's share of [a, b]. At most `max_subdivisions`
// bisections are performed; past the cap the current estimate is returned
// with converged = false.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, double rel_tol = 0.0,
                                  std::size_t max_subdivisions = 10000);

}  // namespace hilltail
