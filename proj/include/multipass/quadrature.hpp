#ifndef MULTIPASS_QUADRATURE_HPP
#define MULTIPASS_QUADRATURE_HPP

#include <algorithm>
#include <cmath>

#include "multipass/kernel.hpp"

namespace multipass {

namespace quadrature_detail {

constexpr double kGlNode[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
constexpr double kGlWeight[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

template <typename F>
double gl16(const F& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (int i = 0; i < 16; ++i) acc += kGlWeight[i] * f(mid + h * kGlNode[i]);
  return acc * h;
}

template <typename F>
double gl2(const F& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double node = 0.5773502691896258;
  return h * (f(mid - h * node) + f(mid + h * node));
}

}  // namespace quadrature_detail

// Integral over [a, b] tolerating integrable singularities at both ends:
// dyadic grading toward each endpoint with 16-point Gauss-Legendre per
// piece and a 2-point rule on the innermost sliver. floor_width bounds the
// grading depth; log-singular integrands need ~1e-13, bounded ones ~1e-4.
template <typename F>
double graded_integral(const F& f, double a, double b, double floor_width) {
  using quadrature_detail::gl16;
  using quadrature_detail::gl2;
  if (b - a < 1e-12) return 0.0;
  const double m = 0.5 * (a + b);
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double len = m - a;
    int levels = static_cast<int>(std::log2(len / floor_width));
    levels = std::max(1, std::min(45, levels));
    double width = len;
    for (int j = 0; j < levels; ++j) {
      width = len * std::pow(0.5, j + 1);
      double c, d;
      if (side == 0) {
        c = a + width;
        d = a + 2.0 * width;
      } else {
        c = b - 2.0 * width;
        d = b - width;
      }
      if (d - c < 1e-13) continue;
      total += gl16(f, c, d);
    }
    if (width >= 1e-12) {
      if (side == 0)
        total += gl2(f, a, a + width);
      else
        total += gl2(f, b - width, b);
    }
  }
  return total;
}

// Quadrature of int_0^1 k_q(x - s) k_p(z - s) ds, splitting the period at
// the two singular points. Cross-checks the closed form l2_inner.
inline double l2_inner_quadrature(const KernelEvaluator& kq,
                                  const KernelEvaluator& kp, double x,
                                  double z) {
  auto f = [&](double s) { return kq(x - s) * kp(z - s); };
  const double lo = std::min(x, z);
  const double hi = std::max(x, z);
  const double floor_width =
      (std::min(kq.order(), kp.order()) <= 1.0) ? 1e-13 : 1e-4;
  return graded_integral(f, lo, hi, floor_width) +
         graded_integral(f, hi, lo + 1.0, floor_width);
}

}  // namespace multipass

#endif
