#pragma once

#include <cstdint>
#include <vector>

#include "geometry.hpp"

namespace uavsim {

/// One Gaussian component. For the probabilistic kind, weight is a mixture
/// proportion and the component is a normalized pdf. For the density kind,
/// weight is the coefficient of an unnormalized bell
/// exp(-(y-mu)^T Sigma^-1 (y-mu) / 2).
struct MixtureComponent {
  double weight = 1.0;
  Vec2 mean{0.0, 0.0};
  Mat2 covariance = Mat2::identity();
};

enum class MixtureKind { probabilistic, density_function };

struct MixtureModel {
  MixtureKind kind = MixtureKind::probabilistic;
  std::vector<MixtureComponent> components;

  void validate() const;
  size_t size() const { return components.size(); }

  /// Whole-plane integral: 1 for a valid probabilistic model, and
  /// sum_k pi_k 2 pi sqrt(det Sigma_k) for a density function.
  double total_integral() const;
};

/// Sample locations with optional nonnegative weights (absent => unweighted).
struct WeightedSamples {
  std::vector<Vec2> points;
  std::vector<double> weights;  // empty or same length as points

  bool weighted() const { return !weights.empty(); }
  void validate() const;
  double total_weight() const;
};

struct FitOptions {
  double tol = 1e-6;       // relative log-likelihood improvement
  int max_iter = 500;
  double cov_floor = 1e-6;  // m^2, eigenvalue floor for regularization
};

/// Per-iteration (weighted) log-likelihood trace, for monotonicity checks.
struct FitTrace {
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool converged = false;
};

/// Classic EM fit of a probabilistic Gaussian mixture to unweighted samples.
/// Initialization is k-means++-style seeding from the given seed.
MixtureModel em_fit(const WeightedSamples& samples, int num_components,
                    const FitOptions& opts, uint64_t seed,
                    FitTrace* trace = nullptr);

/// Weighted EM fit of the traffic-density Gaussian mixture function.
/// Means start at the highest-weight points (ties by weight desc, x, y),
/// covariances at identity, coefficients equal. The normalized iteration is
/// followed by a coefficient conversion that pins the fitted surface's
/// whole-plane integral to the total observed weight mass.
MixtureModel wem_fit(const WeightedSamples& samples, int num_components,
                     const FitOptions& opts, FitTrace* trace = nullptr);

/// Model value at a point: a pdf for the probabilistic kind, the sum of
/// coefficient-scaled unnormalized bells for the density kind.
double mixture_eval(const MixtureModel& model, const Vec2& point);

/// Midpoint-rule integral of the model over the region's cells.
double region_integral(const MixtureModel& model, const Region& region);

/// Dense evaluation over a region grid (mask cells).
CellField mixture_field(const MixtureModel& model, const Region& region);

}  // namespace uavsim
