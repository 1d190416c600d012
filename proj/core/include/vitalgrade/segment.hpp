#pragma once

#include <cstddef>
#include <vector>

#include "vitalgrade/types.hpp"

namespace vitalgrade {

struct SegmentConfig {
    double duration_s = 300.0;      // window length
    double overlap_fraction = 0.0;  // in [0, 1)
    bool drop_partial = true;       // drop a trailing shorter window

    void validate(double fs) const; // throws ConfigError
};

struct SegmentResult {
    std::vector<Window> windows;
    // Set when the waveform was shorter than one window; callers surface this
    // as a warning, not an error.
    bool input_shorter_than_window = false;
};

/// Window sample count for a sampling rate: round(duration_s * fs).
std::size_t window_length(const SegmentConfig& cfg, double fs);

/// Window stride in samples: L * (1 - overlap_fraction), at least 1.
std::size_t window_stride(const SegmentConfig& cfg, double fs);

/// Number of full windows an n-sample waveform yields.
std::size_t expected_window_count(std::size_t n_samples, const SegmentConfig& cfg, double fs);

/// Cuts a waveform into fixed-duration labeled windows. Each window carries
/// the waveform's patient id and modality plus the given label. Windows never
/// span past the end of the waveform; a trailing partial window is kept only
/// when drop_partial is off and it still has at least 2 samples.
SegmentResult segment(const Waveform& w, const SegmentConfig& cfg, const std::string& label);

} // namespace vitalgrade
