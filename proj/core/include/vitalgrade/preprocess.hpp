#pragma once

#include <optional>
#include <vector>

#include "vitalgrade/types.hpp"

namespace vitalgrade {

/// Artefact-mitigation settings. The Gaussian sigma, when unset, is derived
/// from the low-pass cutoff so that the smoother's -3 dB point lands at
/// lp_cutoff_hz (sigma_s = 0.1325 / f_c).
struct FilterConfig {
    double hp_cutoff_hz = 0.05;
    double lp_cutoff_hz = 150.0;
    std::optional<double> gaussian_sigma_s; // seconds

    void validate() const; // throws ConfigError
};

/// Gaussian sigma (seconds) whose frequency response is 3 dB down at the
/// given cutoff.
double default_gaussian_sigma_s(double lp_cutoff_hz);

/// Flags describing what the preprocessing stage actually did; surfaced in
/// run metadata.
struct PreprocessInfo {
    bool smoothing_skipped = false;
    double gaussian_sigma_s = 0.0;
};

/// Second-order Butterworth-characteristic recursive high-pass, run forward
/// and backward for zero phase. Output length equals input length; edges are
/// reflection-padded before filtering. Requires 0 < cutoff_hz < fs/2.
Waveform high_pass(const Waveform& w, double cutoff_hz);

/// Convolution with a unit-sum discrete Gaussian kernel truncated at
/// +/- 4 sigma, reflection padding at the edges. sigma_s is in seconds.
Waveform gaussian_smooth(const Waveform& w, double sigma_s);

/// Low-level smoother used by both the waveform API and the synthesizer:
/// sigma is in samples.
std::vector<double> gaussian_smooth_samples(const std::vector<double>& x, double sigma_samples);

/// High-pass then Gaussian smooth. The smoothing stage is skipped (and
/// flagged) when the low-pass cutoff lies strictly above Nyquist for this
/// waveform's sampling rate: there is nothing above Nyquist to remove.
Waveform preprocess(const Waveform& w, const FilterConfig& cfg, PreprocessInfo* info = nullptr);

} // namespace vitalgrade
