#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "optexp/errors.hpp"
#include "optexp/measures.hpp"

namespace optexp::experiments {

constexpr double kMassMatchTol = 1e-10;

// Admissibility regime a density is validated against.  Primitive noise
// supplied by a user must be strictly unimodal at zero; derived objects
// (averages, mixtures) are only weakly unimodal (flat steps), and garbled
// distributions need not be unimodal at all, only even with total mass 1.
enum class DensityShape { StrictUnimodal, WeakUnimodal, EvenOnly };

// Even distribution of the noise draw x.  Densities are functions of |x|;
// evenness is structural for every kind.
class NoiseDistribution {
 public:
  enum class Kind { Uniform, MixtureOfUniforms, GriddedDensity, Garbled };

  static NoiseDistribution uniform(double width) {
    if (!(width > 0.0)) throw ValidationError("NoiseDistribution: uniform width must be positive");
    NoiseDistribution d;
    d.kind_ = Kind::Uniform;
    d.shape_ = DensityShape::WeakUnimodal;
    d.widths_ = {width};
    d.weights_ = {1.0};
    return d;
  }

  // Sub-probability mixtures carry residual_mass = 1 - sum(weights); a proper
  // mixture distribution has residual_mass 0.
  static NoiseDistribution mixture(std::vector<double> weights, std::vector<double> widths,
                                   double residual_mass = 0.0) {
    if (weights.size() != widths.size() || weights.empty())
      throw ValidationError("NoiseDistribution: mixture weights/widths must match and be nonempty");
    double total = residual_mass;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] < 0.0) throw ValidationError("NoiseDistribution: mixture weights must be >= 0");
      if (!(widths[i] > 0.0)) throw ValidationError("NoiseDistribution: mixture widths must be > 0");
      total += weights[i];
    }
    if (residual_mass < 0.0)
      throw ValidationError("NoiseDistribution: residual mass must be >= 0");
    if (std::abs(total - 1.0) > kMassMatchTol)
      throw ValidationError(
          "NoiseDistribution: mixture weights plus residual mass must account for 1 within 1e-10");
    NoiseDistribution d;
    d.kind_ = Kind::MixtureOfUniforms;
    d.shape_ = DensityShape::WeakUnimodal;
    d.weights_ = std::move(weights);
    d.widths_ = std::move(widths);
    d.residual_ = residual_mass;
    return d;
  }

  // Symmetric density sampled on [0, bound]; linear interpolation between
  // samples, extended evenly to the negative axis.  xs must start at 0.
  static NoiseDistribution gridded(std::vector<double> xs, std::vector<double> vs,
                                   DensityShape shape = DensityShape::StrictUnimodal,
                                   bool normalize = false) {
    if (xs.size() != vs.size() || xs.size() < 2)
      throw ValidationError("NoiseDistribution: grid needs matching xs/vs with >= 2 samples");
    if (xs.front() != 0.0)
      throw ValidationError("NoiseDistribution: grid must start at x = 0");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (!(xs[i] < xs[i + 1]))
        throw ValidationError("NoiseDistribution: grid points must be strictly increasing");
    for (double v : vs)
      if (v < 0.0) throw ValidationError("NoiseDistribution: density values must be >= 0");
    validate_shape(vs, shape);
    NoiseDistribution d;
    d.kind_ = Kind::GriddedDensity;
    d.shape_ = shape;
    d.xs_ = std::move(xs);
    d.vs_ = std::move(vs);
    d.build_prefix();
    double mass = 2.0 * d.cums_.back();
    if (normalize) {
      if (!(mass > 0.0)) throw ValidationError("NoiseDistribution: grid density has zero mass");
      for (auto& v : d.vs_) v /= mass;
      d.build_prefix();
    } else if (std::abs(mass - 1.0) > kMassMatchTol) {
      throw ValidationError("NoiseDistribution: gridded density must integrate to 1 within 1e-10");
    }
    return d;
  }

  // Triangular density on [-halfwidth, halfwidth]; exact under the grid
  // representation since the shape is piecewise linear.
  static NoiseDistribution triangular(double halfwidth) {
    if (!(halfwidth > 0.0))
      throw ValidationError("NoiseDistribution: triangular halfwidth must be positive");
    return gridded({0.0, halfwidth}, {1.0 / halfwidth, 0.0}, DensityShape::StrictUnimodal);
  }

  // Gaussian shape truncated to [-halfwidth, halfwidth], sampled and
  // renormalized so the trapezoid mass is exactly 1.
  static NoiseDistribution truncated_gaussian(double sigma, double halfwidth, int cells = 256) {
    if (!(sigma > 0.0) || !(halfwidth > 0.0) || cells < 2)
      throw ValidationError("NoiseDistribution: bad truncated Gaussian parameters");
    std::vector<double> xs(cells + 1), vs(cells + 1);
    for (int i = 0; i <= cells; ++i) {
      xs[i] = halfwidth * static_cast<double>(i) / cells;
      vs[i] = std::exp(-0.5 * (xs[i] / sigma) * (xs[i] / sigma));
    }
    return gridded(std::move(xs), std::move(vs), DensityShape::StrictUnimodal, true);
  }

  Kind kind() const { return kind_; }
  DensityShape shape() const { return shape_; }

  double density(double x) const {
    double t = std::abs(x);
    switch (kind_) {
      case Kind::Uniform:
        return t <= widths_[0] ? weights_[0] / (2.0 * widths_[0]) : 0.0;
      case Kind::MixtureOfUniforms: {
        double p = 0.0;
        for (std::size_t i = 0; i < widths_.size(); ++i)
          if (t <= widths_[i]) p += weights_[i] / (2.0 * widths_[i]);
        return p;
      }
      case Kind::GriddedDensity:
        return grid_value(t);
      case Kind::Garbled: {
        double p = base_->density(t);
        if (t > x0_ && t < xhat_) return (1.0 - alpha_) * p;
        if (t >= xhat_ && t < x1_) return p + moved_ / (x1_ - xhat_);
        return p;
      }
    }
    return 0.0;
  }

  // Mass of [0, t].
  double half_mass(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
      case Kind::Uniform:
        return weights_[0] * std::min(t, widths_[0]) / (2.0 * widths_[0]);
      case Kind::MixtureOfUniforms: {
        double m = 0.0;
        for (std::size_t i = 0; i < widths_.size(); ++i)
          m += weights_[i] * std::min(t, widths_[i]) / (2.0 * widths_[i]);
        return m;
      }
      case Kind::GriddedDensity: {
        if (t >= xs_.back()) return cums_.back();
        auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        double dx = t - xs_[i];
        double slope = (vs_[i + 1] - vs_[i]) / (xs_[i + 1] - xs_[i]);
        return cums_[i] + vs_[i] * dx + 0.5 * slope * dx * dx;
      }
      case Kind::Garbled: {
        double M = base_->half_mass(t);
        if (t <= x0_) return M;
        if (t < xhat_) return M - alpha_ * (M - base_->half_mass(x0_));
        if (t < x1_) return M - moved_ + moved_ * (t - xhat_) / (x1_ - xhat_);
        return M;
      }
    }
    return 0.0;
  }

  double total_mass() const {
    switch (kind_) {
      case Kind::Uniform:
        return weights_[0];
      case Kind::MixtureOfUniforms: {
        double s = 0.0;
        for (double w : weights_) s += w;
        return s;
      }
      case Kind::GriddedDensity:
        return 2.0 * cums_.back();
      case Kind::Garbled:
        return base_->total_mass();
    }
    return 0.0;
  }

  double cdf(double x) const {
    double half = 0.5 * total_mass();
    return x >= 0.0 ? half + half_mass(x) : half - half_mass(-x);
  }

  double support_halfwidth() const {
    switch (kind_) {
      case Kind::Uniform:
        return widths_[0];
      case Kind::MixtureOfUniforms:
        return *std::max_element(widths_.begin(), widths_.end());
      case Kind::GriddedDensity:
        return xs_.back();
      case Kind::Garbled:
        return std::max(base_->support_halfwidth(), x1_);
    }
    return 0.0;
  }

  // Positive-axis points where the density jumps or kinks, including the
  // support edge.  Integrators split at these.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    switch (kind_) {
      case Kind::Uniform:
      case Kind::MixtureOfUniforms:
        b = widths_;
        break;
      case Kind::GriddedDensity:
        b.assign(xs_.begin() + 1, xs_.end());
        break;
      case Kind::Garbled:
        b = base_->breakpoints();
        b.push_back(x0_);
        b.push_back(xhat_);
        b.push_back(x1_);
        break;
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  double residual_mass() const { return residual_; }
  const std::vector<double>& mixture_weights() const { return weights_; }
  const std::vector<double>& mixture_widths() const { return widths_; }
  double uniform_width() const {
    if (kind_ != Kind::Uniform) throw ValidationError("NoiseDistribution: not a uniform kind");
    return widths_[0];
  }

  friend NoiseDistribution restricted_garble(const NoiseDistribution&, const struct RestrictedKernelSpec&);

 private:
  NoiseDistribution() = default;

  static void validate_shape(const std::vector<double>& vs, DensityShape shape) {
    if (shape == DensityShape::EvenOnly) return;
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
      if (vs[i + 1] > vs[i])
        throw UnimodalityViolation("NoiseDistribution: density increases away from zero");
      if (shape == DensityShape::StrictUnimodal && vs[i] > 0.0 && vs[i + 1] >= vs[i])
        throw UnimodalityViolation(
            "NoiseDistribution: density must strictly decrease where it is positive");
    }
  }

  double grid_value(double t) const {
    if (t > xs_.back()) return 0.0;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
    if (it == xs_.begin()) return vs_.front();
    if (it == xs_.end()) return vs_.back();
    std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    double u = (t - xs_[i]) / (xs_[i + 1] - xs_[i]);
    return vs_[i] + u * (vs_[i + 1] - vs_[i]);
  }

  void build_prefix() {
    cums_.assign(xs_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
      cums_[i + 1] = cums_[i] + 0.5 * (vs_[i] + vs_[i + 1]) * (xs_[i + 1] - xs_[i]);
  }

  Kind kind_ = Kind::Uniform;
  DensityShape shape_ = DensityShape::WeakUnimodal;
  std::vector<double> weights_, widths_;   // uniform / mixture
  double residual_ = 0.0;                  // sub-probability deficit
  std::vector<double> xs_, vs_, cums_;     // gridded
  std::shared_ptr<const NoiseDistribution> base_;  // garbled
  double x0_ = 0.0, xhat_ = 0.0, x1_ = 0.0, alpha_ = 0.0, moved_ = 0.0;
};

// Geometry of a restricted garbling kernel: a share alpha of the mass on
// (x0, xhat) moves uniformly onto [xhat, x1), mirrored on the negative axis.
// Restrictedness requires the destination to sit farther from zero than the
// source, i.e. 0 <= x0 < xhat < x1.
struct RestrictedKernelSpec {
  double x0, xhat, x1, alpha;

  RestrictedKernelSpec(double x0_, double xhat_, double x1_, double alpha_)
      : x0(x0_), xhat(xhat_), x1(x1_), alpha(alpha_) {
    if (!(0.0 <= x0 && x0 < xhat && xhat < x1))
      throw ValidationError("RestrictedKernelSpec: need 0 <= x0 < xhat < x1");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw ValidationError("RestrictedKernelSpec: alpha must lie in (0, 1)");
  }
};

inline bool is_restricted_kernel_consistent(const RestrictedKernelSpec& k) {
  return 0.0 <= k.x0 && k.x0 < k.xhat && k.xhat < k.x1 && k.alpha > 0.0 && k.alpha < 1.0;
}

// Applies the kernel to a probability distribution.  The result matches P
// outside +/-(x0, x1), loses the alpha share on (x0, xhat), and gains it
// uniformly on [xhat, x1); evenness and total mass are preserved exactly.
inline NoiseDistribution restricted_garble(const NoiseDistribution& P,
                                           const RestrictedKernelSpec& k) {
  if (std::abs(P.total_mass() - 1.0) > kMassMatchTol)
    throw ValidationError("restricted_garble: input must carry total mass 1");
  double region = P.half_mass(k.xhat) - P.half_mass(k.x0);
  if (!(region > 0.0))
    throw EmptyMassRegion("restricted_garble: P carries no mass on (x0, xhat)");
  NoiseDistribution q;
  q.kind_ = NoiseDistribution::Kind::Garbled;
  q.shape_ = DensityShape::EvenOnly;
  q.base_ = std::make_shared<const NoiseDistribution>(P);
  q.x0_ = k.x0;
  q.xhat_ = k.xhat;
  q.x1_ = k.x1;
  q.alpha_ = k.alpha;
  q.moved_ = k.alpha * region;
  return q;
}

// Signal map s = sigma(theta, x).  Additive is the workhorse; custom maps
// must be continuous strict bijections in x for every state.
class SignalFunction {
 public:
  static SignalFunction additive() {
    SignalFunction s;
    s.additive_ = true;
    return s;
  }

  static SignalFunction custom(std::function<double(double, double)> sigma,
                               std::function<double(double, double)> inverse_in_x) {
    SignalFunction s;
    s.additive_ = false;
    s.sigma_ = std::move(sigma);
    s.inverse_ = std::move(inverse_in_x);
    s.token_ = next_token();
    // Round-trip and monotonicity check on a fixed probe grid.
    for (double theta : {-1.0, 0.0, 0.7, 2.5}) {
      double prev = -1e300;
      for (int i = 0; i <= 16; ++i) {
        double x = -3.0 + 6.0 * i / 16.0;
        double sv = s.sigma_(theta, x);
        if (!(sv > prev))
          throw ValidationError("SignalFunction: sigma must be strictly increasing in x");
        prev = sv;
        if (std::abs(s.inverse_(theta, sv) - x) > 1e-10)
          throw ValidationError("SignalFunction: inverse round trip exceeds 1e-10");
      }
    }
    return s;
  }

  // Signal that ignores the state entirely; the canonical uninformative map.
  static SignalFunction state_blind() {
    return custom([](double, double x) { return x; }, [](double, double s) { return s; });
  }

  double apply(double theta, double x) const { return additive_ ? theta + x : sigma_(theta, x); }
  double invert(double theta, double s) const { return additive_ ? s - theta : inverse_(theta, s); }
  bool is_additive() const { return additive_; }

  bool same_as(const SignalFunction& o) const {
    if (additive_ && o.additive_) return true;
    return !additive_ && !o.additive_ && token_ == o.token_;
  }

 private:
  SignalFunction() = default;
  static std::uint64_t next_token() {
    static std::uint64_t c = 0;
    return ++c;
  }
  bool additive_ = true;
  std::function<double(double, double)> sigma_, inverse_;
  std::uint64_t token_ = 0;
};

// A choice of noise distribution per state, a signal map, and a width bound:
// every assigned distribution must be supported strictly inside (-bound, bound).
class Experiment {
 public:
  using DefaultRule = std::function<NoiseDistribution(double)>;

  Experiment(std::map<double, NoiseDistribution> assignment, SignalFunction signal, double bound,
             DefaultRule default_rule = nullptr)
      : assignment_(std::move(assignment)),
        signal_(std::move(signal)),
        bound_(bound),
        default_rule_(std::move(default_rule)) {
    if (!(bound_ > 0.0)) throw ValidationError("Experiment: bound must be positive");
    if (assignment_.empty() && !default_rule_)
      throw ValidationError("Experiment: needs an assignment or a default rule");
    for (const auto& [state, dist] : assignment_) check_support(dist);
  }

  NoiseDistribution noise_for(double state) const {
    auto it = assignment_.find(state);
    if (it != assignment_.end()) return it->second;
    if (default_rule_) {
      NoiseDistribution d = default_rule_(state);
      check_support(d);
      return d;
    }
    throw UnassignedState("Experiment: state has no assigned noise distribution");
  }

  const std::map<double, NoiseDistribution>& assignment() const { return assignment_; }
  const SignalFunction& signal() const { return signal_; }
  double bound() const { return bound_; }
  bool has_default_rule() const { return static_cast<bool>(default_rule_); }

  bool all_uniform() const {
    if (default_rule_) return false;
    for (const auto& [state, dist] : assignment_)
      if (dist.kind() != NoiseDistribution::Kind::Uniform) return false;
    return true;
  }

 private:
  void check_support(const NoiseDistribution& d) const {
    if (!(d.support_halfwidth() < bound_))
      throw WidthExceedsBound("Experiment: noise support must lie strictly inside (-bound, bound)");
  }

  std::map<double, NoiseDistribution> assignment_;
  SignalFunction signal_;
  double bound_;
  DefaultRule default_rule_;
};

inline Experiment make_uniform_experiment(const std::map<double, double>& widths,
                                          SignalFunction signal, double bound) {
  std::map<double, NoiseDistribution> assignment;
  for (const auto& [state, w] : widths) {
    if (!(w < bound))
      throw WidthExceedsBound("make_uniform_experiment: width must be strictly below bound");
    assignment.emplace(state, NoiseDistribution::uniform(w));
  }
  return Experiment(std::move(assignment), std::move(signal), bound);
}

namespace detail {

// Sample a density onto a shared grid.  Jump points get a pair of guard
// nodes a hair to each side so the linear interpolation keeps the jump
// sharp; the result is normalized to mass exactly 1.
inline NoiseDistribution resample_to_grid(const std::function<double(double)>& density,
                                          std::vector<double> breakpoints, double support,
                                          DensityShape shape) {
  std::vector<double> xs;
  xs.push_back(0.0);
  double eps = std::max(1e-13, 1e-13 * support);
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double b : breakpoints) {
    if (b <= 0.0 || b > support) continue;
    for (double t : {b - eps, b, b + eps})
      if (t > 0.0 && t <= support) xs.push_back(t);
  }
  xs.push_back(support);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> vs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vs[i] = density(xs[i]);
  return NoiseDistribution::gridded(std::move(xs), std::move(vs), shape, true);
}

inline DensityShape combined_shape(const NoiseDistribution& a, const NoiseDistribution& b) {
  if (a.shape() == DensityShape::EvenOnly || b.shape() == DensityShape::EvenOnly)
    return DensityShape::EvenOnly;
  return DensityShape::WeakUnimodal;
}

}  // namespace detail

// Pointwise density mixture alpha * P + (1 - alpha) * Q of two noise
// distributions.  Uniform inputs stay exact as a mixture of uniforms;
// anything else is resampled onto a merged grid.
inline NoiseDistribution mix_noise(const NoiseDistribution& P, const NoiseDistribution& Q,
                                   double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("mix_noise: alpha must lie in [0, 1]");
  if (alpha == 1.0) return P;
  if (alpha == 0.0) return Q;
  auto is_uniformish = [](const NoiseDistribution& d) {
    return d.kind() == NoiseDistribution::Kind::Uniform ||
           d.kind() == NoiseDistribution::Kind::MixtureOfUniforms;
  };
  if (is_uniformish(P) && is_uniformish(Q)) {
    std::vector<double> weights, widths;
    for (std::size_t i = 0; i < P.mixture_weights().size(); ++i) {
      weights.push_back(alpha * P.mixture_weights()[i]);
      widths.push_back(P.mixture_widths()[i]);
    }
    for (std::size_t i = 0; i < Q.mixture_weights().size(); ++i) {
      weights.push_back((1.0 - alpha) * Q.mixture_weights()[i]);
      widths.push_back(Q.mixture_widths()[i]);
    }
    double residual = alpha * P.residual_mass() + (1.0 - alpha) * Q.residual_mass();
    return NoiseDistribution::mixture(std::move(weights), std::move(widths), residual);
  }
  std::vector<double> cuts = P.breakpoints();
  auto qb = Q.breakpoints();
  cuts.insert(cuts.end(), qb.begin(), qb.end());
  double support = std::max(P.support_halfwidth(), Q.support_halfwidth());
  return detail::resample_to_grid(
      [&](double t) { return alpha * P.density(t) + (1.0 - alpha) * Q.density(t); }, cuts, support,
      detail::combined_shape(P, Q));
}

// State-by-state mixture of two experiments sharing signal, bound, and
// state set.
inline Experiment mix_experiments(const Experiment& P, const Experiment& Q, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("mix_experiments: alpha must lie in [0, 1]");
  if (P.bound() != Q.bound())
    throw IncompatibleExperiments("mix_experiments: experiments must share the width bound");
  if (!P.signal().same_as(Q.signal()))
    throw IncompatibleExperiments("mix_experiments: experiments must share the signal function");
  if (P.has_default_rule() || Q.has_default_rule())
    throw IncompatibleExperiments("mix_experiments: default-rule experiments cannot be mixed");
  if (P.assignment().size() != Q.assignment().size())
    throw IncompatibleExperiments("mix_experiments: experiments must cover the same states");
  std::map<double, NoiseDistribution> mixed;
  auto qit = Q.assignment().begin();
  for (const auto& [state, dist] : P.assignment()) {
    if (qit->first != state)
      throw IncompatibleExperiments("mix_experiments: experiments must cover the same states");
    mixed.emplace(state, mix_noise(dist, qit->second, alpha));
    ++qit;
  }
  return Experiment(std::move(mixed), P.signal(), P.bound());
}

// Prior-weighted average of the per-state noise distributions: the
// state-invariant experiment P^F.  All-uniform assignments over an atomic
// prior stay exact as a mixture of uniforms.
inline NoiseDistribution average_experiment(const Experiment& P,
                                            const measures::MixedDistribution& F) {
  bool atomic = F.is_atomic();
  if (atomic && P.all_uniform()) {
    std::vector<double> weights, widths;
    for (const auto& a : F.atoms()) {
      NoiseDistribution d = P.noise_for(a.location);
      weights.push_back(a.mass);
      widths.push_back(d.uniform_width());
    }
    return NoiseDistribution::mixture(std::move(weights), std::move(widths));
  }
  std::vector<double> cuts;
  double support = 0.0;
  DensityShape shape = DensityShape::WeakUnimodal;
  for (const auto& a : F.atoms()) {
    NoiseDistribution d = P.noise_for(a.location);
    auto b = d.breakpoints();
    cuts.insert(cuts.end(), b.begin(), b.end());
    support = std::max(support, d.support_halfwidth());
    if (d.shape() == DensityShape::EvenOnly) shape = DensityShape::EvenOnly;
  }
  if (!atomic) {
    // The continuous part contributes a theta-average of densities; sample a
    // spread of states to bound the support and add fill cuts for safety.
    auto [lo, hi] = F.density()->support();
    for (int i = 0; i <= 32; ++i) {
      double theta = lo + (hi - lo) * i / 32.0;
      NoiseDistribution d = P.noise_for(theta);
      support = std::max(support, d.support_halfwidth());
      if (d.shape() == DensityShape::EvenOnly) shape = DensityShape::EvenOnly;
    }
    for (int i = 1; i <= 64; ++i) cuts.push_back(support * i / 64.0);
  }
  measures::Quadrature q;
  auto avg_density = [&](double t) {
    return measures::integrate(
        F, [&](double theta) { return P.noise_for(theta).density(t); }, q);
  };
  return detail::resample_to_grid(avg_density, cuts, support, shape);
}

// Applies one garbling kernel to every state's noise.  States with no mass
// on the source region are untouched (the kernel acts there as the identity).
inline Experiment garble_experiment(const Experiment& P, const RestrictedKernelSpec& k) {
  if (P.has_default_rule())
    throw ValidationError("garble_experiment: experiment must assign noise explicitly per state");
  std::map<double, NoiseDistribution> garbled;
  for (const auto& [state, dist] : P.assignment()) {
    double region = dist.half_mass(k.xhat) - dist.half_mass(k.x0);
    if (region > 0.0)
      garbled.emplace(state, restricted_garble(dist, k));
    else
      garbled.emplace(state, dist);
  }
  return Experiment(std::move(garbled), P.signal(), P.bound());
}

}  // namespace optexp::experiments
