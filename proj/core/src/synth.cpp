#include "vitalgrade/synth.hpp"

#include <algorithm>
#include <cmath>

#include "vitalgrade/errors.hpp"
#include "vitalgrade/preprocess.hpp"
#include "vitalgrade/rng.hpp"

namespace vitalgrade {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stream tags keep the per-purpose RNGs independent of each other.
enum StreamTag : std::uint64_t { kEvents = 1, kAmplitude = 2, kNoise = 3, kArtefact = 4 };

} // namespace

void SynthConfig::validate() const {
    if (modalities.empty()) throw ConfigError("synth: needs at least one modality");
    for (const auto& m : modalities) {
        if (!(m.fs > 0.0)) throw ConfigError("synth: sampling rate must be > 0");
    }
    if (!(duration_s > 0.0)) throw ConfigError("synth: duration_s must be > 0");
    if (n_patients_per_class < 1) throw ConfigError("synth: n_patients_per_class must be >= 1");
    if (class_profiles.empty()) throw ConfigError("synth: needs at least one class profile");
    for (std::size_t i = 0; i < class_profiles.size(); ++i) {
        if (class_profiles[i].label.empty()) throw ConfigError("synth: class label must be non-empty");
        if (!(class_profiles[i].base_rate_bpm > 0.0))
            throw ConfigError("synth: base_rate_bpm must be > 0");
        for (std::size_t j = i + 1; j < class_profiles.size(); ++j) {
            if (class_profiles[i].label == class_profiles[j].label) {
                throw ConfigError("synth: duplicate class label '" + class_profiles[i].label + "'");
            }
            ClassProfile a = class_profiles[i];
            ClassProfile b = class_profiles[j];
            a.label = b.label = "";
            if (a == b) {
                throw ConfigError("synth: classes '" + class_profiles[i].label + "' and '" +
                                  class_profiles[j].label + "' have identical profiles");
            }
        }
    }
}

std::vector<double> draw_event_times(const ClassProfile& profile, double duration_s,
                                     std::uint64_t patient_seed) {
    Rng rng(Rng::mix(patient_seed, kEvents));
    const double mean_interval = 60.0 / profile.base_rate_bpm;
    std::vector<double> events;
    double t = rng.uniform(0.0, mean_interval);
    while (t < duration_s) {
        events.push_back(t);
        const double interval =
            std::max(0.25 * mean_interval, rng.normal(mean_interval, profile.interval_std_s));
        t += interval;
    }
    return events;
}

std::vector<double> render_waveform(const ClassProfile& profile, const ModalitySpec& spec,
                                    double duration_s, std::uint64_t patient_seed) {
    const double fs = spec.fs;
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
    if (n < 2) throw ConfigError("synth: duration too short for sampling rate");

    const auto events = draw_event_times(profile, duration_s, patient_seed);
    const std::uint64_t modality_tag = static_cast<std::uint64_t>(spec.modality) + 100;
    Rng amp_rng(Rng::mix(patient_seed, Rng::mix(kAmplitude, modality_tag)));

    std::vector<double> x(n, 0.0);
    switch (spec.modality) {
    case Modality::kEcg: {
        // Narrow Gaussian bump per beat.
        const double width_s = 0.025;
        const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * width_s * fs));
        for (double t_beat : events) {
            const double amp = 1.0 + profile.amplitude_jitter * (2.0 * amp_rng.uniform() - 1.0);
            const auto center = static_cast<std::ptrdiff_t>(std::llround(t_beat * fs));
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                const std::ptrdiff_t i = center + k;
                if (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) continue;
                const double dt = static_cast<double>(i) / fs - t_beat;
                x[static_cast<std::size_t>(i)] +=
                    amp * std::exp(-0.5 * dt * dt / (width_s * width_s));
            }
        }
        break;
    }
    case Modality::kPpg: {
        // Half-sine pulse over the first 45% of each beat interval, then a
        // light smoothing pass.
        const double mean_interval = 60.0 / profile.base_rate_bpm;
        for (std::size_t b = 0; b < events.size(); ++b) {
            const double t0 = events[b];
            const double interval =
                (b + 1 < events.size()) ? events[b + 1] - t0 : mean_interval;
            const double pulse_len = 0.45 * interval;
            const double amp = 1.0 + profile.amplitude_jitter * (2.0 * amp_rng.uniform() - 1.0);
            const auto begin = static_cast<std::ptrdiff_t>(std::ceil(t0 * fs));
            const auto end = static_cast<std::ptrdiff_t>(std::floor((t0 + pulse_len) * fs));
            for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, begin);
                 i <= end && i < static_cast<std::ptrdiff_t>(n); ++i) {
                const double phase = (static_cast<double>(i) / fs - t0) / pulse_len;
                x[static_cast<std::size_t>(i)] += amp * std::sin(kPi * phase);
            }
        }
        x = gaussian_smooth_samples(x, std::max(1.0, 0.01 * fs));
        break;
    }
    case Modality::kIp:
    case Modality::kOther: {
        // Slow sinusoid paced by the event intervals (unit phase per event).
        std::size_t next_event = 0;
        double phase = 0.0;
        double prev_event_t = 0.0;
        const double mean_interval = 60.0 / profile.base_rate_bpm;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            while (next_event < events.size() && events[next_event] <= t) {
                prev_event_t = events[next_event];
                ++next_event;
            }
            const double interval =
                (next_event < events.size()) ? events[next_event] - prev_event_t : mean_interval;
            phase = (next_event > 0 ? static_cast<double>(next_event - 1) : 0.0) +
                    std::clamp((t - prev_event_t) / std::max(interval, 1e-6), 0.0, 1.0);
            x[i] = std::sin(2.0 * kPi * phase);
        }
        break;
    }
    }

    // Additive noise, then optional square bursts of loud uniform noise.
    if (profile.noise_std > 0.0) {
        Rng rng(Rng::mix(patient_seed, Rng::mix(kNoise, modality_tag)));
        for (double& v : x) v += rng.normal(0.0, profile.noise_std);
    }
    if (profile.artefact_burst_per_min > 0.0) {
        Rng rng(Rng::mix(patient_seed, Rng::mix(kArtefact, modality_tag)));
        const double rate_per_s = profile.artefact_burst_per_min / 60.0;
        double t = rng.exponential(rate_per_s);
        while (t < duration_s) {
            const auto begin = static_cast<std::size_t>(t * fs);
            const auto end = std::min(n, begin + static_cast<std::size_t>(std::llround(0.5 * fs)));
            for (std::size_t i = begin; i < end; ++i) x[i] += 5.0 * (2.0 * rng.uniform() - 1.0);
            t += rng.exponential(rate_per_s);
        }
    }
    return x;
}

DatasetManifest generate(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.format = cfg.format;
    manifest.description = "synthetic corpus";
    manifest.base_dir = out_dir;

    std::size_t patient_index = 0;
    for (std::size_t c = 0; c < cfg.class_profiles.size(); ++c) {
        const auto& profile = cfg.class_profiles[c];
        for (int p = 0; p < cfg.n_patients_per_class; ++p, ++patient_index) {
            const std::uint64_t patient_seed = Rng::mix(cfg.seed, patient_index);
            char pid[16];
            std::snprintf(pid, sizeof(pid), "p%03zu", patient_index);
            for (const auto& spec : cfg.modalities) {
                const auto samples = render_waveform(profile, spec, cfg.duration_s, patient_seed);
                const std::string ext = cfg.format == WaveFormat::kCsv ? ".csv" : ".f64";
                const std::string filename = std::string(pid) + "_" + to_string(spec.modality) + ext;
                if (cfg.format == WaveFormat::kCsv) {
                    save_waveform_csv(samples, out_dir / filename);
                } else {
                    save_waveform_raw(samples, out_dir / filename);
                }
                ManifestRecord rec;
                rec.path = filename;
                rec.modality = spec.modality;
                rec.fs = spec.fs;
                rec.patient_id = pid;
                rec.label = profile.label;
                rec.channel = 0;
                manifest.records.push_back(std::move(rec));
            }
        }
    }
    save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

} // namespace vitalgrade
