#include "vitalgrade/segment.hpp"

#include <cmath>
#include <string>

#include "vitalgrade/errors.hpp"

namespace vitalgrade {

void SegmentConfig::validate(double fs) const {
    if (!(duration_s > 0.0)) throw ConfigError("segment: duration_s must be > 0");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
        throw ConfigError("segment: overlap_fraction must lie in [0, 1)");
    if (window_length(*this, fs) < 2)
        throw ConfigError("segment: duration " + std::to_string(duration_s) +
                          " s at fs=" + std::to_string(fs) + " yields a window below 2 samples");
}

std::size_t window_length(const SegmentConfig& cfg, double fs) {
    return static_cast<std::size_t>(std::llround(cfg.duration_s * fs));
}

std::size_t window_stride(const SegmentConfig& cfg, double fs) {
    const double l = static_cast<double>(window_length(cfg, fs));
    const auto stride = static_cast<std::size_t>(std::llround(l * (1.0 - cfg.overlap_fraction)));
    return stride == 0 ? 1 : stride;
}

std::size_t expected_window_count(std::size_t n_samples, const SegmentConfig& cfg, double fs) {
    const std::size_t l = window_length(cfg, fs);
    if (n_samples < l) return 0;
    return (n_samples - l) / window_stride(cfg, fs) + 1;
}

SegmentResult segment(const Waveform& w, const SegmentConfig& cfg, const std::string& label) {
    cfg.validate(w.fs());
    const std::size_t l = window_length(cfg, w.fs());
    const std::size_t stride = window_stride(cfg, w.fs());

    SegmentResult result;
    if (w.size() < l) {
        result.input_shorter_than_window = true;
        if (!cfg.drop_partial && w.size() >= 2) {
            result.windows.push_back(Window::slice(w, 0, w.size(), label));
        }
        return result;
    }
    std::size_t offset = 0;
    while (offset + l <= w.size()) {
        result.windows.push_back(Window::slice(w, offset, l, label));
        offset += stride;
    }
    if (!cfg.drop_partial && offset < w.size() && w.size() - offset >= 2) {
        result.windows.push_back(Window::slice(w, offset, w.size() - offset, label));
    }
    return result;
}

} // namespace vitalgrade
