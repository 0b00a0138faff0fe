#include "hilltail/quadrature.hpp"

#include <cmath>
#include <vector>

namespace hilltail {

namespace {

struct Panel {
  double a, b;
  double fa, fm, fb;
  double whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, double rel_tol, std::size_t max_subdivisions) {
  QuadratureResult result;
  if (a == b) return result;

  const double length = b - a;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double coarse = simpson(a, b, fa, fm, fb);
  const double tol = std::max(abs_tol, rel_tol * std::abs(coarse));

  // Depth-first on an explicit stack; accepted panels are summed in the
  // order they are retired, which is deterministic.
  std::vector<Panel> stack{{a, b, fa, fm, fb, coarse}};
  double total = 0.0;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + mid), rm = 0.5 * (mid + p.b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(p.a, mid, p.fa, flm, p.fm);
    const double right = simpson(mid, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    const double local_tol = tol * (p.b - p.a) / length;
    const bool capped = result.subdivisions >= max_subdivisions;
    if (std::abs(delta) <= 15.0 * local_tol || capped || mid == p.a || mid == p.b) {
      if (capped && std::abs(delta) > 15.0 * local_tol) result.converged = false;
      total += left + right + delta / 15.0;
      continue;
    }
    ++result.subdivisions;
    stack.push_back({mid, p.b, p.fm, frm, p.fb, right});
    stack.push_back({p.a, mid, p.fa, flm, p.fm, left});
  }
  result.value = total;
  return result;
}

}  // namespace hilltail
