#pragma once

// Brute-force reference implementations used only by the test suites. They
// share no code with the library's fast paths: the DFT is the direct O(L^2)
// sum and every feature is a literal per-definition loop. Inputs are capped
// at 4096 samples; the oracles are intentionally slow.

#include <cstddef>
#include <vector>

#include "vitalgrade/features.hpp"
#include "vitalgrade/types.hpp"

namespace vitalgrade::oracle {

inline constexpr std::size_t kMaxOracleLength = 4096;

/// Direct one-sided DFT magnitudes |X[k]|, k = 0..floor(L/2).
std::vector<double> oracle_dft(const std::vector<double>& x);

/// The eight statistics in extraction order (min, max, median, mean, std,
/// energy, kurtosis, zero_crossing).
std::vector<double> oracle_time_stats(const std::vector<double>& x);

/// Chunked gradient pooling, (h+, h-, s+, s-) per chunk.
std::vector<double> oracle_gradient_pooling(const std::vector<double>& x, int chunks);

std::vector<double> oracle_low_freq(const std::vector<double>& magnitudes, int n_low);

/// Whole-spectrum bin sums evaluated from the published index formulas with
/// floating-point ceil, independent of the library's integer binning.
std::vector<double> oracle_whole_freq(const std::vector<double>& magnitudes,
                                      std::size_t source_length, int n_bands);

/// Full reference feature vector for a window under the given configuration.
std::vector<double> oracle_features(const Window& win, const FeatureConfig& cfg);

} // namespace vitalgrade::oracle
