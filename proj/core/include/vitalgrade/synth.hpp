#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vitalgrade/io.hpp"
#include "vitalgrade/types.hpp"

namespace vitalgrade {

/// Per-class signal character. Classes must differ in at least one field so a
/// generated corpus is non-degenerate.
struct ClassProfile {
    std::string label;
    double base_rate_bpm = 60.0;       // mean beat (or breath) rate
    double interval_std_s = 0.02;      // beat-to-beat interval spread
    double amplitude_jitter = 0.05;    // relative per-beat amplitude spread
    double noise_std = 0.02;           // additive sample noise
    double artefact_burst_per_min = 0.0; // square bursts of high-amplitude noise

    bool operator==(const ClassProfile&) const = default;
};

struct ModalitySpec {
    Modality modality = Modality::kEcg;
    double fs = 300.0;
};

struct SynthConfig {
    std::vector<ModalitySpec> modalities = {{Modality::kEcg, 300.0}};
    double duration_s = 1800.0;
    int n_patients_per_class = 5;
    std::vector<ClassProfile> class_profiles = {
        {"moderate", 60.0, 0.02, 0.05, 0.02, 0.2},
        {"severe", 120.0, 0.08, 0.10, 0.02, 0.5},
    };
    WaveFormat format = WaveFormat::kRawF64le;
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
};

/// Beat/breath event times for one patient; shared across that patient's
/// modalities so multimodal windows stay time-aligned.
std::vector<double> draw_event_times(const ClassProfile& profile, double duration_s,
                                     std::uint64_t patient_seed);

/// Renders one patient's waveform for a modality: Gaussian bumps per beat for
/// ECG-like signals, smoothed half-sine pulses for PPG-like, a slow
/// breath-paced sinusoid for IP-like, plus noise and optional artefact bursts.
std::vector<double> render_waveform(const ClassProfile& profile, const ModalitySpec& spec,
                                    double duration_s, std::uint64_t patient_seed);

/// Writes one waveform file per (patient, modality) and a manifest describing
/// them; deterministic for a fixed seed. Returns the loaded-back manifest.
DatasetManifest generate(const SynthConfig& cfg, const std::filesystem::path& out_dir);

} // namespace vitalgrade
