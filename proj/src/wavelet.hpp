#pragma once

#include <set>
#include <vector>

#include "geometry.hpp"

namespace uavsim {

/// One level of the orthonormal Haar transform. An odd trailing sample is
/// carried into the approximation unchanged so reconstruction stays exact.
struct HaarLevel {
  std::vector<double> approx;
  std::vector<double> detail;
  bool odd_carry = false;
};

/// Multi-level orthonormal Haar decomposition of a series.
struct HaarDecomposition {
  std::vector<HaarLevel> levels;  // levels[0] is the finest
  size_t input_size = 0;

  /// Detail coefficients of one level.
  const std::vector<double>& detail(int level) const {
    return levels.at(level).detail;
  }
};

HaarDecomposition haar_forward(const std::vector<double>& series, int levels);
std::vector<double> haar_inverse(const HaarDecomposition& dec);

/// Reconstruction of a single level's detail component back at full
/// resolution (all other coefficients zeroed).
std::vector<double> haar_detail_signal(const HaarDecomposition& dec, int level);

/// Hours whose high-frequency content shows a sudden increase: an hour is
/// flagged when the summed detail reconstruction at that hour exceeds
/// threshold_sigmas times its robust std (MAD x 1.4826).
std::set<size_t> dwt_congestion_detect(const std::vector<double>& hourly_series,
                                       int levels, double threshold_sigmas);

}  // namespace uavsim
