#include "wavelet.hpp"

#include <algorithm>
#include <cmath>

namespace uavsim {

namespace {

const double kInvRoot2 = 1.0 / std::sqrt(2.0);

double robust_std(std::vector<double> v) {
  if (v.empty()) return 0.0;
  auto median = [](std::vector<double>& x) {
    std::sort(x.begin(), x.end());
    const size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
  };
  const double med = median(v);
  for (auto& x : v) x = std::abs(x - med);
  return 1.4826 * median(v);
}

}  // namespace

HaarDecomposition haar_forward(const std::vector<double>& series, int levels) {
  if (levels < 1) throw invalid("levels must be >= 1");
  if (series.size() < static_cast<size_t>(1) << levels)
    throw invalid("series too short for the requested levels");
  HaarDecomposition dec;
  dec.input_size = series.size();
  std::vector<double> current = series;
  for (int l = 0; l < levels; ++l) {
    HaarLevel lev;
    const size_t pairs = current.size() / 2;
    lev.odd_carry = current.size() % 2 != 0;
    lev.approx.resize(pairs + (lev.odd_carry ? 1 : 0));
    lev.detail.resize(pairs);
    for (size_t k = 0; k < pairs; ++k) {
      lev.approx[k] = (current[2 * k] + current[2 * k + 1]) * kInvRoot2;
      lev.detail[k] = (current[2 * k] - current[2 * k + 1]) * kInvRoot2;
    }
    if (lev.odd_carry) lev.approx[pairs] = current.back();
    current = lev.approx;
    dec.levels.push_back(std::move(lev));
  }
  return dec;
}

std::vector<double> haar_inverse(const HaarDecomposition& dec) {
  if (dec.levels.empty()) throw invalid("empty decomposition");
  std::vector<double> current = dec.levels.back().approx;
  for (size_t l = dec.levels.size(); l-- > 0;) {
    const HaarLevel& lev = dec.levels[l];
    if (current.size() != lev.approx.size())
      throw Error(Error::Kind::runtime, "inconsistent decomposition");
    std::vector<double> next(lev.detail.size() * 2 + (lev.odd_carry ? 1 : 0));
    for (size_t k = 0; k < lev.detail.size(); ++k) {
      next[2 * k] = (current[k] + lev.detail[k]) * kInvRoot2;
      next[2 * k + 1] = (current[k] - lev.detail[k]) * kInvRoot2;
    }
    if (lev.odd_carry) next.back() = current.back();
    current = std::move(next);
  }
  if (current.size() != dec.input_size)
    throw Error(Error::Kind::runtime, "inconsistent decomposition");
  return current;
}

std::vector<double> haar_detail_signal(const HaarDecomposition& dec, int level) {
  if (level < 0 || level >= static_cast<int>(dec.levels.size()))
    throw invalid("level out of range");
  HaarDecomposition only = dec;
  for (size_t l = 0; l < only.levels.size(); ++l) {
    if (static_cast<int>(l) != level)
      std::fill(only.levels[l].detail.begin(), only.levels[l].detail.end(), 0.0);
  }
  auto& top = only.levels.back().approx;
  std::fill(top.begin(), top.end(), 0.0);
  return haar_inverse(only);
}

std::set<size_t> dwt_congestion_detect(const std::vector<double>& hourly_series,
                                       int levels, double threshold_sigmas) {
  if (hourly_series.size() < 4) throw invalid("series too short");
  const HaarDecomposition dec = haar_forward(hourly_series, levels);
  // Combined high-frequency content: the series minus its smooth
  // approximation. Summing the per-level detail reconstructions keeps the
  // sign, so an upward spike stands out at its own hour while the pair
  // partner swings negative.
  std::vector<double> detail(hourly_series.size(), 0.0);
  for (int l = 0; l < levels; ++l) {
    const std::vector<double> d = haar_detail_signal(dec, l);
    for (size_t t = 0; t < d.size(); ++t) detail[t] += d[t];
  }
  std::set<size_t> flagged;
  const double sigma = robust_std(detail);
  if (sigma <= 0.0) return flagged;  // constant series
  for (size_t t = 0; t < detail.size(); ++t)
    if (detail[t] > threshold_sigmas * sigma) flagged.insert(t);
  return flagged;
}

}  // namespace uavsim
