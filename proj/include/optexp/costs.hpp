#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "optexp/errors.hpp"
#include "optexp/experiments.hpp"
#include "optexp/measures.hpp"
#include "optexp/quadrature.hpp"

namespace optexp::costs {

// Outcome of a unimodality scan over a sample grid.  location is the first
// grid point witnessing the failure.
struct UnimodalityReport {
  bool ok = true;
  double location = 0.0;
  std::string message;
};

// Scan sampled values (at strictly increasing xs >= 0) for the even
// strictly-unimodal-at-zero shape: values must strictly decrease wherever
// they sit above the sampled minimum, and flat stretches are permitted only
// at that minimum.  Comparisons are exact; ties are treated as flats.
inline UnimodalityReport check_unimodal(const std::vector<double>& xs,
                                        const std::vector<double>& vs) {
  if (xs.size() != vs.size() || xs.size() < 2)
    throw ValidationError("check_unimodal: need matching xs/vs with >= 2 samples");
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i] < xs[i + 1]))
      throw ValidationError("check_unimodal: grid must be strictly increasing");
  if (xs.front() < 0.0) throw ValidationError("check_unimodal: grid must start at x >= 0");
  double min_v = *std::min_element(vs.begin(), vs.end());
  if (vs.front() == min_v)
    return {false, xs[1], "value at zero does not exceed the tail minimum"};
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (vs[i + 1] > vs[i]) return {false, xs[i + 1], "value rises away from zero"};
    if (vs[i + 1] == vs[i] && vs[i] > min_v)
      return {false, xs[i + 1], "value is flat above the minimum"};
  }
  return {true, 0.0, ""};
}

// Even cost of a noise draw, c(x) = c(|x|): the price of precision near the
// true state.  Admissible costs strictly decrease in |x| wherever positive.
class NoiseCostFunction {
 public:
  enum class Kind { ExpDecay, Tent, Cauchy, Custom };

  // K * exp(-lambda * |x|)
  static NoiseCostFunction exp_decay(double K, double lambda) {
    if (!(K > 0.0) || !(lambda > 0.0))
      throw ValidationError("NoiseCostFunction: exp_decay needs K > 0 and lambda > 0");
    NoiseCostFunction c;
    c.kind_ = Kind::ExpDecay;
    c.a_ = K;
    c.b_ = lambda;
    c.validate();
    return c;
  }

  // height * max(0, 1 - |x| / width)
  static NoiseCostFunction tent(double height, double width) {
    if (!(height > 0.0) || !(width > 0.0))
      throw ValidationError("NoiseCostFunction: tent needs height > 0 and width > 0");
    NoiseCostFunction c;
    c.kind_ = Kind::Tent;
    c.a_ = height;
    c.b_ = width;
    c.validate();
    return c;
  }

  // K / (1 + x^2)
  static NoiseCostFunction cauchy(double K) {
    if (!(K > 0.0)) throw ValidationError("NoiseCostFunction: cauchy needs K > 0");
    NoiseCostFunction c;
    c.kind_ = Kind::Cauchy;
    c.a_ = K;
    c.validate();
    return c;
  }

  // Linear interpolation of samples on [0, xs.back()], held constant beyond
  // the last node.  The shape scan runs on the samples themselves.
  static NoiseCostFunction custom(std::vector<double> xs, std::vector<double> vs) {
    if (xs.size() != vs.size() || xs.size() < 2)
      throw ValidationError("NoiseCostFunction: custom needs matching xs/vs with >= 2 samples");
    if (xs.front() != 0.0) throw ValidationError("NoiseCostFunction: custom grid must start at 0");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (!(xs[i] < xs[i + 1]))
        throw ValidationError("NoiseCostFunction: custom grid must be strictly increasing");
    for (double v : vs)
      if (v < 0.0) throw ValidationError("NoiseCostFunction: custom values must be >= 0");
    NoiseCostFunction c;
    c.kind_ = Kind::Custom;
    c.xs_ = std::move(xs);
    c.vs_ = std::move(vs);
    c.build_prefix();
    c.validate();
    return c;
  }

  Kind kind() const { return kind_; }

  double value(double x) const {
    double t = std::abs(x);
    switch (kind_) {
      case Kind::ExpDecay:
        return a_ * std::exp(-b_ * t);
      case Kind::Tent:
        return t >= b_ ? 0.0 : a_ * (1.0 - t / b_);
      case Kind::Cauchy:
        return a_ / (1.0 + t * t);
      case Kind::Custom: {
        if (t >= xs_.back()) return vs_.back();
        auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        double u = (t - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return vs_[i] + u * (vs_[i + 1] - vs_[i]);
      }
    }
    return 0.0;
  }

  double peak() const { return value(0.0); }

  // Integral of the cost over [0, t]; closed form for every kind.
  double partial_integral(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
      case Kind::ExpDecay:
        return a_ * (1.0 - std::exp(-b_ * t)) / b_;
      case Kind::Tent: {
        double m = std::min(t, b_);
        return a_ * (m - m * m / (2.0 * b_));
      }
      case Kind::Cauchy:
        return a_ * std::atan(t);
      case Kind::Custom: {
        if (t >= xs_.back()) return cums_.back() + vs_.back() * (t - xs_.back());
        auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        double dx = t - xs_[i];
        double slope = (vs_[i + 1] - vs_[i]) / (xs_[i + 1] - xs_[i]);
        return cums_[i] + vs_[i] * dx + 0.5 * slope * dx * dx;
      }
    }
    return 0.0;
  }

  // Positive-axis kink points of the cost, used as optimizer candidates and
  // quadrature cuts.
  std::vector<double> kinks() const {
    switch (kind_) {
      case Kind::Tent:
        return {b_};
      case Kind::Custom:
        return std::vector<double>(xs_.begin() + 1, xs_.end());
      default:
        return {};
    }
  }

  // Grid the shape scan runs on when none is supplied: the cost's own nodes
  // for sampled kinds, a decade past the effective scale for smooth kinds.
  std::vector<double> default_check_grid() const {
    switch (kind_) {
      case Kind::Tent: {
        std::vector<double> g;
        for (int i = 0; i <= 48; ++i) g.push_back(1.5 * b_ * i / 48.0);
        return g;
      }
      case Kind::Custom:
        return xs_;
      case Kind::ExpDecay: {
        std::vector<double> g;
        for (int i = 0; i <= 48; ++i) g.push_back((6.0 / b_) * i / 48.0);
        return g;
      }
      case Kind::Cauchy: {
        std::vector<double> g;
        for (int i = 0; i <= 48; ++i) g.push_back(10.0 * i / 48.0);
        return g;
      }
    }
    return {};
  }

 private:
  NoiseCostFunction() = default;

  void build_prefix() {
    cums_.assign(xs_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
      cums_[i + 1] = cums_[i] + 0.5 * (vs_[i] + vs_[i + 1]) * (xs_[i + 1] - xs_[i]);
  }

  void validate() const {
    auto grid = default_check_grid();
    std::vector<double> sampled(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sampled[i] = value(grid[i]);
    UnimodalityReport r = check_unimodal(grid, sampled);
    if (!r.ok)
      throw UnimodalityViolation("NoiseCostFunction: " + r.message + " at x = " +
                                 std::to_string(r.location));
  }

  Kind kind_ = Kind::ExpDecay;
  double a_ = 1.0, b_ = 1.0;
  std::vector<double> xs_, vs_, cums_;
};

inline UnimodalityReport check_unimodal(const NoiseCostFunction& c,
                                        const std::vector<double>& grid) {
  std::vector<double> sampled(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) sampled[i] = c.value(grid[i]);
  return check_unimodal(grid, sampled);
}

inline UnimodalityReport check_unimodal(const NoiseCostFunction& c) {
  return check_unimodal(c, c.default_check_grid());
}

// Expected cost of one noise draw, integral of c against the distribution.
// Uniform components integrate in closed form; sampled and garbled densities
// go through segmented quadrature with cuts at every density and cost kink.
inline double noise_cost(const experiments::NoiseDistribution& P, const NoiseCostFunction& c,
                         const measures::Quadrature& q = {}) {
  using experiments::NoiseDistribution;
  switch (P.kind()) {
    case NoiseDistribution::Kind::Uniform:
    case NoiseDistribution::Kind::MixtureOfUniforms: {
      double total = 0.0;
      const auto& ws = P.mixture_weights();
      const auto& ds = P.mixture_widths();
      for (std::size_t i = 0; i < ws.size(); ++i)
        total += ws[i] * c.partial_integral(ds[i]) / ds[i];
      return total;
    }
    case NoiseDistribution::Kind::GriddedDensity:
    case NoiseDistribution::Kind::Garbled: {
      double support = P.support_halfwidth();
      std::vector<double> cuts = P.breakpoints();
      for (double k : c.kinks())
        if (k < support) cuts.push_back(k);
      auto f = [&](double x) { return c.value(x) * P.density(x); };
      return 2.0 * measures::integrate_segmented(f, 0.0, support, cuts, q);
    }
  }
  return 0.0;
}

// Prior-weighted cost of an experiment: the per-state expected draw cost
// integrated against F.
inline double experiment_cost(const experiments::Experiment& P,
                              const measures::MixedDistribution& F, const NoiseCostFunction& c,
                              const measures::Quadrature& q = {}) {
  return measures::integrate(
      F, [&](double theta) { return noise_cost(P.noise_for(theta), c, q); }, q);
}

}  // namespace optexp::costs
