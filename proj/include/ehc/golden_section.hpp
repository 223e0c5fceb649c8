#ifndef EHC_GOLDEN_SECTION_HPP
#define EHC_GOLDEN_SECTION_HPP

#include <cmath>

namespace ehc {

struct ScalarMax {
  double x;
  double value;
};

// Golden-section maximization of a unimodal f on [a, b]. Stops when the
// bracket is narrower than tol. The returned point is the best of the final
// interior probes and the endpoints.
template <typename F>
ScalarMax golden_section_maximize(F&& f, double a, double b, double tol = 1e-10,
                                  int max_iterations = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iterations && (b - a) > tol; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  ScalarMax best{c, fc};
  if (fd > best.value) best = {d, fd};
  const double fa = f(a);
  if (fa > best.value) best = {a, fa};
  const double fb = f(b);
  if (fb > best.value) best = {b, fb};
  return best;
}

}  // namespace ehc

#endif  // EHC_GOLDEN_SECTION_HPP
