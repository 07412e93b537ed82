#include "mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace uavsim {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

struct GaussianLog {
  Mat2 inv;
  double log_norm;  // -log(2 pi) - 0.5 log det

  explicit GaussianLog(const Mat2& cov)
      : inv(cov.inverse()), log_norm(-kLog2Pi - 0.5 * std::log(cov.det())) {}

  double operator()(const Vec2& y, const Vec2& mu) const {
    return log_norm - 0.5 * inv.quad(y - mu);
  }
};

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Weighted mean and (biased) covariance of the samples under per-point
// weights u_n; mass = sum u_n must be positive.
void weighted_moments(const std::vector<Vec2>& pts, const std::vector<double>& u,
                      double mass, Vec2& mean, Mat2& cov) {
  mean = {0.0, 0.0};
  for (size_t n = 0; n < pts.size(); ++n) mean = mean + pts[n] * (u[n] / mass);
  cov = {0.0, 0.0, 0.0};
  for (size_t n = 0; n < pts.size(); ++n) {
    const Vec2 d = pts[n] - mean;
    const double w = u[n] / mass;
    cov.xx += w * d.x * d.x;
    cov.xy += w * d.x * d.y;
    cov.yy += w * d.y * d.y;
  }
}

// Shared E/M loop. Mixture proportions stay normalized to 1 throughout;
// sample_weight is all-ones for plain EM.
MixtureModel run_em(const std::vector<Vec2>& pts,
                    const std::vector<double>& sample_weight,
                    std::vector<MixtureComponent> comps, const FitOptions& opts,
                    FitTrace* trace) {
  const size_t n_pts = pts.size();
  const size_t n_comp = comps.size();
  std::vector<std::vector<double>> resp(n_comp, std::vector<double>(n_pts));
  std::vector<double> logp(n_comp);
  double prev_ll = -std::numeric_limits<double>::infinity();
  FitTrace local;
  FitTrace& tr = trace ? *trace : local;
  tr = FitTrace{};

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // E step, log domain.
    std::vector<GaussianLog> gauss;
    gauss.reserve(n_comp);
    for (const auto& c : comps) gauss.emplace_back(c.covariance);
    double ll = 0.0;
    for (size_t n = 0; n < n_pts; ++n) {
      for (size_t k = 0; k < n_comp; ++k)
        logp[k] = std::log(std::max(comps[k].weight, 1e-300)) +
                  gauss[k](pts[n], comps[k].mean);
      const double lse = log_sum_exp(logp);
      ll += sample_weight[n] * lse;
      for (size_t k = 0; k < n_comp; ++k)
        resp[k][n] = std::exp(logp[k] - lse) * sample_weight[n];
    }
    tr.log_likelihood.push_back(ll);
    tr.iterations = iter + 1;

    // M step.
    double total_mass = 0.0;
    for (size_t k = 0; k < n_comp; ++k)
      for (size_t n = 0; n < n_pts; ++n) total_mass += resp[k][n];
    for (size_t k = 0; k < n_comp; ++k) {
      double mass = 0.0;
      for (size_t n = 0; n < n_pts; ++n) mass += resp[k][n];
      if (mass <= 1e-12 * total_mass || mass <= 0.0) {
        // Starved component: keep its location, shrink its weight.
        comps[k].weight = 1e-12;
        comps[k].covariance = comps[k].covariance.floored(opts.cov_floor);
        continue;
      }
      Vec2 mean;
      Mat2 cov;
      weighted_moments(pts, resp[k], mass, mean, cov);
      comps[k].mean = mean;
      comps[k].covariance = cov.floored(opts.cov_floor);
      comps[k].weight = mass / total_mass;
    }
    // Renormalize weights after starvation adjustments.
    double wsum = 0.0;
    for (const auto& c : comps) wsum += c.weight;
    for (auto& c : comps) c.weight /= wsum;

    if (std::isfinite(prev_ll) &&
        std::abs(ll - prev_ll) < opts.tol * (1.0 + std::abs(ll))) {
      tr.converged = true;
      break;
    }
    prev_ll = ll;
  }

  MixtureModel model;
  model.kind = MixtureKind::probabilistic;
  model.components = std::move(comps);
  return model;
}

}  // namespace

void MixtureModel::validate() const {
  if (components.empty()) throw invalid("mixture has no components");
  double wsum = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
      throw invalid("component weight must be nonnegative");
    if (kind == MixtureKind::density_function && c.weight <= 0.0)
      throw invalid("density-function coefficients must be positive");
    double lo, hi;
    c.covariance.eigenvalues(lo, hi);
    if (lo <= 0.0) throw invalid("covariance must be positive definite");
    wsum += c.weight;
  }
  if (kind == MixtureKind::probabilistic && std::abs(wsum - 1.0) > 1e-9)
    throw invalid("probabilistic weights must sum to 1");
}

double MixtureModel::total_integral() const {
  if (kind == MixtureKind::probabilistic) return 1.0;
  double s = 0.0;
  for (const auto& c : components)
    s += c.weight * 2.0 * M_PI * std::sqrt(c.covariance.det());
  return s;
}

void WeightedSamples::validate() const {
  if (points.empty()) throw invalid("no sample points");
  if (!weights.empty()) {
    if (weights.size() != points.size())
      throw invalid("weights/points length mismatch");
    bool any_positive = false;
    for (double w : weights) {
      if (!(w >= 0.0)) throw invalid("weights must be nonnegative");
      any_positive |= w > 0.0;
    }
    if (!any_positive) throw invalid("no positive weight");
  }
}

double WeightedSamples::total_weight() const {
  if (!weighted()) return static_cast<double>(points.size());
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

MixtureModel em_fit(const WeightedSamples& samples, int num_components,
                    const FitOptions& opts, uint64_t seed, FitTrace* trace) {
  samples.validate();
  if (samples.weighted()) throw invalid("em_fit expects unweighted samples");
  const auto& pts = samples.points;
  const int n = static_cast<int>(pts.size());
  if (num_components < 1) throw invalid("num_components must be >= 1");
  if (num_components > n) throw invalid("more components than samples");

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<Vec2> centers;
  centers.push_back(pts[std::uniform_int_distribution<size_t>(0, pts.size() - 1)(rng)]);
  std::vector<double> d2(pts.size());
  while (static_cast<int>(centers.size()) < num_components) {
    double sum = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) {
        const Vec2 d = pts[i] - c;
        best = std::min(best, dot(d, d));
      }
      d2[i] = best;
      sum += best;
    }
    size_t pick = 0;
    if (sum > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, sum)(rng);
      double acc = 0.0;
      for (size_t i = 0; i < pts.size(); ++i) {
        acc += d2[i];
        if (acc >= u) { pick = i; break; }
      }
    } else {
      pick = std::uniform_int_distribution<size_t>(0, pts.size() - 1)(rng);
    }
    centers.push_back(pts[pick]);
  }

  // Shared initial covariance: overall sample covariance.
  std::vector<double> ones(pts.size(), 1.0);
  Vec2 mean;
  Mat2 cov;
  weighted_moments(pts, ones, static_cast<double>(pts.size()), mean, cov);
  cov = cov.floored(std::max(opts.cov_floor, 1e-3));

  std::vector<MixtureComponent> comps(num_components);
  for (int k = 0; k < num_components; ++k) {
    comps[k].weight = 1.0 / num_components;
    comps[k].mean = centers[k];
    comps[k].covariance = cov;
  }
  return run_em(pts, ones, std::move(comps), opts, trace);
}

MixtureModel wem_fit(const WeightedSamples& samples, int num_components,
                     const FitOptions& opts, FitTrace* trace) {
  samples.validate();
  if (!samples.weighted()) throw invalid("wem_fit expects weighted samples");
  if (num_components < 1) throw invalid("num_components must be >= 1");
  const auto& pts = samples.points;
  const auto& w = samples.weights;

  // Seed means at the highest-density distinct locations.
  std::vector<size_t> order;
  for (size_t i = 0; i < pts.size(); ++i)
    if (w[i] > 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (w[a] != w[b]) return w[a] > w[b];
    if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
    return pts[a].y < pts[b].y;
  });
  std::vector<Vec2> seeds;
  std::set<std::pair<double, double>> used;
  for (size_t i : order) {
    if (static_cast<int>(seeds.size()) == num_components) break;
    auto key = std::make_pair(pts[i].x, pts[i].y);
    if (used.insert(key).second) seeds.push_back(pts[i]);
  }
  if (static_cast<int>(seeds.size()) < num_components)
    throw invalid("fewer distinct positive-weight points than components");

  std::vector<MixtureComponent> comps(num_components);
  for (int k = 0; k < num_components; ++k) {
    comps[k].weight = 1.0 / num_components;
    comps[k].mean = seeds[k];
    comps[k].covariance = Mat2::identity();
  }
  MixtureModel model = run_em(pts, w, std::move(comps), opts, trace);

  // Convert mixture proportions into density-function coefficients. Scaling
  // per component keeps the surface equal to the fitted mixture density
  // times the observed mass, so the whole-plane integral is the total
  // weight and no mass migrates toward wide components.
  model.kind = MixtureKind::density_function;
  const double target = samples.total_weight();
  for (auto& c : model.components) {
    const double bell_integral = 2.0 * M_PI * std::sqrt(c.covariance.det());
    if (bell_integral <= 0.0)
      throw Error(Error::Kind::runtime, "degenerate density fit");
    c.weight = target * c.weight / bell_integral;
  }
  return model;
}

double mixture_eval(const MixtureModel& model, const Vec2& point) {
  double s = 0.0;
  for (const auto& c : model.components) {
    const double q = c.covariance.inverse().quad(point - c.mean);
    const double bell = std::exp(-0.5 * q);
    if (model.kind == MixtureKind::probabilistic)
      s += c.weight * bell / (2.0 * M_PI * std::sqrt(c.covariance.det()));
    else
      s += c.weight * bell;
  }
  return s;
}

double region_integral(const MixtureModel& model, const Region& region) {
  if (region.empty()) throw invalid("empty region");
  double s = 0.0;
  region.for_each_cell(
      [&](int, int, Vec2 c) { s += mixture_eval(model, c); });
  return s * region.cell_area();
}

CellField mixture_field(const MixtureModel& model, const Region& region) {
  CellField f;
  f.region = region;
  f.values.assign(static_cast<size_t>(region.nx()) * region.ny(), 0.0);
  region.for_each_cell(
      [&](int ix, int iy, Vec2 c) { f.at(ix, iy) = mixture_eval(model, c); });
  return f;
}

}  // namespace uavsim
