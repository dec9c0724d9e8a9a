#pragma once

// Independent reference implementations used only by tests: a dense linear
// solve for the uniform-mixture weights and a brute-force two-state value
// search.  These deliberately avoid the library's own shortcut paths so that
// agreement is evidence, not tautology.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "optexp/costs.hpp"
#include "optexp/experiments.hpp"
#include "optexp/uniformize.hpp"

namespace testsupport {

// Solve the full k x k system  sum_{i >= j} a_i / (2 i d) = target(j d)
// by Gaussian elimination on the dense matrix, no back-substitution shortcut.
inline std::vector<double> dense_mixture_weights(const optexp::experiments::NoiseDistribution& t,
                                                 const optexp::uniformize::ApproxGrid& grid) {
  int k = grid.count;
  double d = grid.spacing;
  std::vector<std::vector<double>> A(k, std::vector<double>(k + 1, 0.0));
  for (int j = 1; j <= k; ++j) {
    for (int i = j; i <= k; ++i) A[j - 1][i - 1] = 1.0 / (2.0 * i * d);
    A[j - 1][k] = t.density(j * d);
  }
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    std::swap(A[col], A[pivot]);
    if (A[col][col] == 0.0) throw std::runtime_error("dense solve: singular system");
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (int cc = col; cc <= k; ++cc) A[r][cc] -= f * A[col][cc];
    }
  }
  std::vector<double> alpha(k);
  for (int i = 0; i < k; ++i) alpha[i] = std::max(0.0, A[i][k] / A[i][i]);
  return alpha;
}

inline double best_payoff(double th, const std::vector<double>& actions,
                          const std::function<double(double, double)>& u) {
  double best = -std::numeric_limits<double>::infinity();
  for (double a : actions) best = std::max(best, u(th, a));
  return best;
}

// Exact value of a two-state problem under uniform widths (w0, w1): partition
// the signal line at the four support edges, pick the best action per cell
// from the local weights, integrate in closed form.  A zero width is a
// perfect observation; with only two states one perfect state reveals both
// (the other state's draws are never confounded), at a draw cost of the peak.
inline double two_state_value(double th0, double m0, double w0, double th1, double m1, double w1,
                              const std::vector<double>& actions,
                              const std::function<double(double, double)>& u,
                              const optexp::costs::NoiseCostFunction& c) {
  if (w0 == 0.0 || w1 == 0.0) {
    double benefit = m0 * best_payoff(th0, actions, u) + m1 * best_payoff(th1, actions, u);
    double cost = m0 * (w0 == 0.0 ? c.peak() : c.partial_integral(w0) / w0) +
                  m1 * (w1 == 0.0 ? c.peak() : c.partial_integral(w1) / w1);
    return benefit - cost;
  }
  double e0l = th0 - w0, e0r = th0 + w0, e1l = th1 - w1, e1r = th1 + w1;
  std::vector<double> edges{e0l, e0r, e1l, e1r};
  std::sort(edges.begin(), edges.end());
  double benefit = 0.0;
  for (int seg = 0; seg + 1 < 4; ++seg) {
    double lo = edges[seg], hi = edges[seg + 1];
    if (!(hi > lo)) continue;
    double mid = 0.5 * (lo + hi);
    double g0 = (mid > e0l && mid < e0r) ? m0 / (2.0 * w0) : 0.0;
    double g1 = (mid > e1l && mid < e1r) ? m1 / (2.0 * w1) : 0.0;
    if (g0 + g1 == 0.0) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (double a : actions) best = std::max(best, g0 * u(th0, a) + g1 * u(th1, a));
    benefit += (hi - lo) * best;
  }
  double cost = m0 * c.partial_integral(w0) / w0 + m1 * c.partial_integral(w1) / w1;
  return benefit - cost;
}

struct GridBest {
  double w0 = 0.0, w1 = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

// Exhaustive search over the width grid {0, step, 2*step, ..., bound}^2,
// zero widths (perfect observation) included.
inline GridBest two_state_grid_search(double th0, double m0, double th1, double m1,
                                      const std::vector<double>& actions,
                                      const std::function<double(double, double)>& u,
                                      const optexp::costs::NoiseCostFunction& c, double bound,
                                      double step) {
  int n = static_cast<int>(std::lround(bound / step));
  GridBest best;
  for (int i = 0; i <= n; ++i) {
    double w0 = i * step;
    for (int j = 0; j <= n; ++j) {
      double w1 = j * step;
      double v = two_state_value(th0, m0, w0, th1, m1, w1, actions, u, c);
      if (v > best.value) best = {w0, w1, v};
    }
  }
  return best;
}

}  // namespace testsupport
