#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vitalgrade/types.hpp"

namespace vitalgrade {

enum class FeatureGroup { kTime, kGradient, kLowFreq, kWholeFreq };

std::string to_string(FeatureGroup g);
FeatureGroup feature_group_from_string(std::string_view s);

struct FeatureConfig {
    int n_low = 200;               // low-frequency coefficients kept
    int n_bands = 200;             // whole-spectrum bins
    int temporal_resolution = 2;   // chunks for gradient pooling
    std::set<FeatureGroup> include_groups = {FeatureGroup::kTime, FeatureGroup::kGradient,
                                             FeatureGroup::kLowFreq, FeatureGroup::kWholeFreq};

    void validate() const; // throws ConfigError
};

/// One-sided magnitude spectrum of a window: magnitudes[c] = |X[c]| for
/// c = 0 .. floor(L/2) (c = 0 is DC).
struct SpectrumView {
    std::vector<double> magnitudes;
    std::size_t source_length = 0;
    double fs = 0.0;
};

/// The eight basic statistics, in emission order. Kurtosis of a constant
/// signal is degenerate (zero denominator); it is reported as 0 with the
/// flag set instead of NaN so downstream vectors stay finite.
struct TimeStats {
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
    double mean = 0.0;
    double stdev = 0.0;     // population standard deviation
    double energy = 0.0;    // sum of squared samples
    double kurtosis = 0.0;  // non-excess; 3 for a Gaussian
    double zero_crossings = 0.0;
    bool kurtosis_degenerate = false;

    std::array<double, 8> as_array() const {
        return {min, max, median, mean, stdev, energy, kurtosis, zero_crossings};
    }
};

TimeStats time_stats(const Window& win);

/// Exact median (average of the two central order statistics for even
/// lengths). Streaming radix selection; does not mutate the input.
double median(std::span<const double> x);

/// First differences x[n+1] - x[n]; length L-1.
std::vector<double> gradient(std::span<const double> x);
inline std::vector<double> gradient(const Window& win) { return gradient(win.samples()); }

/// Gradient count/sum pooling over `temporal_resolution` contiguous chunks
/// (the first L mod T chunks are one sample longer). Gradients never straddle
/// chunk boundaries. Per chunk, emits (h+, h-, s+, s-): h+ counts
/// non-negative gradients (zero counts as positive), h- the strictly
/// negative ones, s+ sums the positive gradients and s- the negative ones
/// (signed, <= 0). Output is chunk-major, 4*T values.
std::vector<double> gradient_pooling(const Window& win, int temporal_resolution);

/// Unwindowed FFT magnitude spectrum, one-sided.
SpectrumView spectrum(const Window& win);

/// First n_low one-sided magnitudes including DC. Windows too short to
/// provide n_low coefficients are zero-padded and flagged via short_window.
std::vector<double> low_freq_features(const SpectrumView& sp, int n_low,
                                      bool* short_window = nullptr);

/// Half-open coefficient ranges [begin, end) into the one-sided spectrum for
/// each of the n_bands whole-spectrum bins; the final bin closes at the last
/// coefficient. The ranges partition [0, floor(L/2)+1) exactly; a range may
/// be empty when L/(2*n_bands) < 1.
std::vector<std::pair<std::size_t, std::size_t>> band_bounds(std::size_t source_length,
                                                             int n_bands);

/// Per-bin magnitude sums over band_bounds ranges. Empty bins yield 0.
std::vector<double> whole_freq_features(const SpectrumView& sp, int n_bands);

/// Neumaier-compensated sum; used for the bin sums so that the binned total
/// agrees with the plain magnitude total to the last bit.
double compensated_sum(std::span<const double> x);

/// Layout produced by extract() for this configuration; depends only on the
/// configuration, never on the data.
FeatureLayout make_layout(const FeatureConfig& cfg);

struct ExtractFlags {
    bool kurtosis_degenerate = false;
    bool short_window = false;
};

/// Concatenated feature vector in fixed group order (time | gradient |
/// lowfreq | wholefreq), restricted to cfg.include_groups. With defaults the
/// dimension is 8 + 4*2 + 200 + 200 = 416.
FeatureVector extract(const Window& win, const FeatureConfig& cfg, ExtractFlags* flags = nullptr);

/// Concatenates per-modality vectors of one time-aligned window in the given
/// order; layout groups are prefixed with the modality name. All parts must
/// share a patient id and start within one sample period of the slowest
/// modality.
std::pair<FeatureVector, FeatureLayout> fuse(
    const std::vector<std::tuple<Modality, FeatureVector, FeatureLayout>>& parts);

} // namespace vitalgrade
