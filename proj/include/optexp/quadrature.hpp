#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "optexp/errors.hpp"

namespace optexp::measures {

enum class QuadratureRule { AdaptiveSimpson, GaussLegendre };

// Numerical integration policy shared across the library.
struct Quadrature {
  QuadratureRule rule = QuadratureRule::AdaptiveSimpson;
  double abs_tol = 1e-9;
  int max_subdivisions = 48;  // recursion depth cap for the adaptive rule
  int nodes = 64;             // node count for the fixed Gauss-Legendre rule

  void validate() const {
    if (!(abs_tol > 0.0)) throw ValidationError("Quadrature: abs_tol must be positive");
    if (max_subdivisions < 1) throw ValidationError("Quadrature: max_subdivisions must be >= 1");
    if (nodes < 1) throw ValidationError("Quadrature: nodes must be >= 1");
  }
};

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
// Legendre recurrence.  Nodes come out sorted ascending.
inline std::vector<std::pair<double, double>> gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: node count must be >= 1");
  std::vector<std::pair<double, double>> out(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess for the i-th root.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[i] = {-std::abs(x), w};
    out[n - 1 - i] = {std::abs(x), w};
  }
  if (n % 2 == 1) out[n / 2].first = 0.0;
  return out;
}

namespace detail {

inline double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_step(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth, int max_depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, m - a);
  double right = simpson(fm, frm, fb, b - m);
  double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth >= max_depth)
    throw QuadratureNonConvergence("adaptive Simpson: subdivision limit reached before abs_tol");
  return adaptive_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1, max_depth) +
         adaptive_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1, max_depth);
}

}  // namespace detail

// Integral of f over [a, b] under the given policy.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        const Quadrature& q = {}) {
  q.validate();
  if (a == b) return 0.0;
  if (q.rule == QuadratureRule::GaussLegendre) {
    double acc = 0.0;
    for (const auto& [x, w] : gauss_legendre(q.nodes))
      acc += w * f(0.5 * (b - a) * x + 0.5 * (a + b));
    return 0.5 * (b - a) * acc;
  }
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = detail::simpson(fa, fm, fb, b - a);
  return detail::adaptive_step(f, a, b, fa, fm, fb, whole, q.abs_tol, 0, q.max_subdivisions);
}

// Integral over [a, b] split at the interior points of `cuts` (kinks, jumps),
// with the tolerance budget shared across the resulting segments.
inline double integrate_segmented(const std::function<double(double)>& f, double a, double b,
                                  std::vector<double> cuts, const Quadrature& q = {}) {
  q.validate();
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> pts;
  for (double c : cuts)
    if (c >= a && c <= b && (pts.empty() || c > pts.back())) pts.push_back(c);
  if (pts.size() < 2) return 0.0;
  Quadrature piece = q;
  piece.abs_tol = q.abs_tol / static_cast<double>(pts.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc += integrate(f, pts[i], pts[i + 1], piece);
  return acc;
}

}  // namespace optexp::measures
