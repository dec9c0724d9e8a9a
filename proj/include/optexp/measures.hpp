#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optexp/errors.hpp"
#include "optexp/quadrature.hpp"

namespace optexp::measures {

constexpr double kMassMatchTol = 1e-10;  // total mass must equal 1 within this
constexpr double kMinAtomMass = 1e-12;

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

// Absolutely continuous component of a mixed distribution.  Either an
// analytic shape (scaled by its component mass) or a sampled grid with
// linear interpolation between samples.
class PriorDensity {
 public:
  enum class Kind { Uniform, TruncatedGaussian, Grid };

  static PriorDensity uniform(double lo, double hi, double mass) {
    if (!(lo < hi)) throw ValidationError("PriorDensity: support must have lo < hi");
    if (!(mass > 0.0)) throw ValidationError("PriorDensity: component mass must be positive");
    PriorDensity d;
    d.kind_ = Kind::Uniform;
    d.lo_ = lo;
    d.hi_ = hi;
    d.mass_ = mass;
    return d;
  }

  static PriorDensity truncated_gaussian(double mean, double sigma, double lo, double hi,
                                         double mass) {
    if (!(lo < hi)) throw ValidationError("PriorDensity: support must have lo < hi");
    if (!(sigma > 0.0)) throw ValidationError("PriorDensity: sigma must be positive");
    if (!(mass > 0.0)) throw ValidationError("PriorDensity: component mass must be positive");
    PriorDensity d;
    d.kind_ = Kind::TruncatedGaussian;
    d.lo_ = lo;
    d.hi_ = hi;
    d.mass_ = mass;
    d.mean_ = mean;
    d.sigma_ = sigma;
    // Normalizing constant of the truncation window.
    auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    d.gauss_norm_ = Phi((hi - mean) / sigma) - Phi((lo - mean) / sigma);
    if (!(d.gauss_norm_ > 0.0))
      throw ValidationError("PriorDensity: truncation window carries no Gaussian mass");
    return d;
  }

  static PriorDensity grid(std::vector<double> xs, std::vector<double> vs) {
    if (xs.size() != vs.size() || xs.size() < 2)
      throw ValidationError("PriorDensity: grid needs matching xs/vs with at least 2 samples");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (!(xs[i] < xs[i + 1]))
        throw ValidationError("PriorDensity: grid points must be strictly increasing");
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (vs[i] < 0.0 || vs[i + 1] < 0.0)
        throw ValidationError("PriorDensity: density values must be nonnegative");
      mass += 0.5 * (vs[i] + vs[i + 1]) * (xs[i + 1] - xs[i]);
    }
    if (!(mass > 0.0)) throw ValidationError("PriorDensity: grid density has zero mass");
    PriorDensity d;
    d.kind_ = Kind::Grid;
    d.lo_ = xs.front();
    d.hi_ = xs.back();
    d.mass_ = mass;
    d.xs_ = std::move(xs);
    d.vs_ = std::move(vs);
    return d;
  }

  Kind kind() const { return kind_; }
  double mass() const { return mass_; }
  std::pair<double, double> support() const { return {lo_, hi_}; }

  // Density value at x, including the component mass scaling.
  double value(double x) const {
    if (x < lo_ || x > hi_) return 0.0;
    switch (kind_) {
      case Kind::Uniform:
        return mass_ / (hi_ - lo_);
      case Kind::TruncatedGaussian: {
        double z = (x - mean_) / sigma_;
        double phi = std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * 3.14159265358979323846));
        return mass_ * phi / gauss_norm_;
      }
      case Kind::Grid: {
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        if (it == xs_.begin()) return vs_.front();
        if (it == xs_.end()) return vs_.back();
        std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return vs_[i] + t * (vs_[i + 1] - vs_[i]);
      }
    }
    return 0.0;
  }

  // Points where the density is not smooth; quadrature splits here.
  std::vector<double> segment_points() const {
    if (kind_ == Kind::Grid) return xs_;
    return {lo_, hi_};
  }

 private:
  PriorDensity() = default;
  Kind kind_ = Kind::Uniform;
  double lo_ = 0.0, hi_ = 1.0, mass_ = 1.0;
  double mean_ = 0.0, sigma_ = 1.0, gauss_norm_ = 1.0;
  std::vector<double> xs_, vs_;
};

// Probability distribution with finitely many atoms and an optional
// absolutely continuous part.  Total mass must be 1 within kMassMatchTol.
class MixedDistribution {
 public:
  MixedDistribution(std::vector<Atom> atoms, std::optional<PriorDensity> density = std::nullopt)
      : atoms_(std::move(atoms)), density_(std::move(density)) {
    if (atoms_.empty() && !density_.has_value())
      throw ValidationError("MixedDistribution: needs at least one atom or a density");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!(atoms_[i].mass >= kMinAtomMass) || !(atoms_[i].mass <= 1.0 + kMassMatchTol))
        throw ValidationError("MixedDistribution: atom masses must lie in [1e-12, 1]");
      if (i > 0 && !(atoms_[i - 1].location < atoms_[i].location))
        throw ValidationError("MixedDistribution: atom locations must be sorted and distinct");
    }
    double total = atom_mass() + density_mass();
    if (std::abs(total - 1.0) > kMassMatchTol)
      throw ValidationError("MixedDistribution: total mass must equal 1 within 1e-10");
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<PriorDensity>& density() const { return density_; }
  bool is_atomic() const { return !density_.has_value(); }

  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.mass;
    return s;
  }

  double density_mass() const { return density_ ? density_->mass() : 0.0; }

  std::pair<double, double> support_bounds() const {
    double lo = atoms_.empty() ? density_->support().first : atoms_.front().location;
    double hi = atoms_.empty() ? density_->support().second : atoms_.back().location;
    if (density_) {
      lo = std::min(lo, density_->support().first);
      hi = std::max(hi, density_->support().second);
    }
    return {lo, hi};
  }

 private:
  std::vector<Atom> atoms_;
  std::optional<PriorDensity> density_;
};

struct Decomposition {
  std::vector<Atom> atoms;
  double atom_mass = 0.0;
  std::optional<PriorDensity> continuous;
  double continuous_mass = 0.0;
};

inline Decomposition decompose(const MixedDistribution& F) {
  Decomposition d;
  d.atoms = F.atoms();
  d.atom_mass = F.atom_mass();
  d.continuous = F.density();
  d.continuous_mass = F.density_mass();
  return d;
}

// Integral of g against F: exact sum over atoms plus quadrature against the
// continuous part, split at the density's own segment points.
inline double integrate(const MixedDistribution& F, const std::function<double(double)>& g,
                        const Quadrature& q = {}) {
  double acc = 0.0;
  for (const auto& a : F.atoms()) acc += a.mass * g(a.location);
  if (F.density()) {
    const PriorDensity& f = *F.density();
    auto [lo, hi] = f.support();
    acc += integrate_segmented([&](double x) { return g(x) * f.value(x); }, lo, hi,
                               f.segment_points(), q);
  }
  return acc;
}

// Replace the continuous part by atoms at Gauss-Legendre nodes.  Node masses
// are rescaled so the discretized distribution carries exactly the continuous
// component's mass; existing atoms pass through unchanged.
inline MixedDistribution discretize(const MixedDistribution& F, int nodes) {
  if (F.is_atomic()) return F;
  if (nodes < 1) throw ValidationError("discretize: node count must be >= 1");
  const PriorDensity& f = *F.density();
  auto [lo, hi] = f.support();
  std::vector<Atom> extra;
  double raw = 0.0;
  for (const auto& [x, w] : gauss_legendre(nodes)) {
    double loc = 0.5 * (hi - lo) * x + 0.5 * (lo + hi);
    double m = 0.5 * (hi - lo) * w * f.value(loc);
    if (m > 0.0) {
      extra.push_back({loc, m});
      raw += m;
    }
  }
  if (!(raw > 0.0)) throw NumericalError("discretize: density mass vanished on the node set");
  double scale = f.mass() / raw;
  for (auto& a : extra) a.mass *= scale;
  std::vector<Atom> merged = F.atoms();
  merged.insert(merged.end(), extra.begin(), extra.end());
  std::sort(merged.begin(), merged.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  // Coincident locations collapse into one atom.
  std::vector<Atom> out;
  for (const auto& a : merged) {
    if (!out.empty() && out.back().location == a.location)
      out.back().mass += a.mass;
    else
      out.push_back(a);
  }
  return MixedDistribution(std::move(out));
}

}  // namespace optexp::measures
