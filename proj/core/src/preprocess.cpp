#include "vitalgrade/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vitalgrade/errors.hpp"

namespace vitalgrade {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Biquad {
    double b0, b1, b2, a1, a2;
};

// Bilinear-transform coefficients for a 2nd-order Butterworth high-pass.
Biquad butterworth_highpass(double cutoff_hz, double fs) {
    const double k = std::tan(kPi * cutoff_hz / fs);
    const double k2 = k * k;
    const double sqrt2 = 1.41421356237309504880;
    const double norm = 1.0 / (1.0 + sqrt2 * k + k2);
    Biquad q;
    q.b0 = norm;
    q.b1 = -2.0 * norm;
    q.b2 = norm;
    q.a1 = 2.0 * (k2 - 1.0) * norm;
    q.a2 = (1.0 - sqrt2 * k + k2) * norm;
    return q;
}

void filter_in_place(const Biquad& q, std::vector<double>& x) {
    // High-pass steady state for constant input is zero, so priming the
    // output history with zeros matches an infinitely long mirrored input.
    double x1 = x.empty() ? 0.0 : x[0];
    double x2 = x1;
    double y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
        const double in = v;
        const double out = q.b0 * in + q.b1 * x1 + q.b2 * x2 - q.a1 * y1 - q.a2 * y2;
        x2 = x1;
        x1 = in;
        y2 = y1;
        y1 = out;
        v = out;
    }
}

// Mirror index fold (no edge duplication): -1 -> 1, n -> n-2.
std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

} // namespace

void FilterConfig::validate() const {
    if (!(hp_cutoff_hz > 0.0)) throw ConfigError("filter: hp_cutoff_hz must be > 0");
    if (!(hp_cutoff_hz < lp_cutoff_hz))
        throw ConfigError("filter: hp_cutoff_hz must be below lp_cutoff_hz");
    if (gaussian_sigma_s && !(*gaussian_sigma_s > 0.0))
        throw ConfigError("filter: gaussian_sigma_s must be > 0");
}

double default_gaussian_sigma_s(double lp_cutoff_hz) {
    return 0.1325 / lp_cutoff_hz;
}

Waveform high_pass(const Waveform& w, double cutoff_hz) {
    const double fs = w.fs();
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0)) {
        throw ConfigError("high_pass: cutoff " + std::to_string(cutoff_hz) +
                          " Hz must lie in (0, fs/2) for fs=" + std::to_string(fs));
    }
    const Biquad q = butterworth_highpass(cutoff_hz, fs);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(w.size());

    // Reflection pad with about three filter time constants per side so the
    // forward/backward transients settle outside the kept region.
    const double pad_samples = std::ceil(3.0 * fs / cutoff_hz);
    const std::ptrdiff_t pad = std::min<std::ptrdiff_t>(
        n - 1, static_cast<std::ptrdiff_t>(std::min(pad_samples, 1.0e7)));

    std::vector<double> buf;
    buf.reserve(static_cast<std::size_t>(n + 2 * pad));
    for (std::ptrdiff_t i = -pad; i < n + pad; ++i)
        buf.push_back(w.samples()[reflect_index(i, n)]);

    filter_in_place(q, buf);
    std::reverse(buf.begin(), buf.end());
    filter_in_place(q, buf);
    std::reverse(buf.begin(), buf.end());

    std::vector<double> out(buf.begin() + pad, buf.begin() + pad + n);
    return Waveform(std::move(out), fs, w.modality(), w.patient_id(), w.start_time_s());
}

std::vector<double> gaussian_smooth_samples(const std::vector<double>& x, double sigma_samples) {
    if (!(sigma_samples > 0.0)) throw ConfigError("gaussian_smooth: sigma must be > 0");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    const std::ptrdiff_t radius =
        std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma_samples)));

    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * static_cast<double>(k * k) / (sigma_samples * sigma_samples));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;

    std::vector<double> out(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
            acc += kernel[static_cast<std::size_t>(k + radius)] * x[reflect_index(i - k, n)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

Waveform gaussian_smooth(const Waveform& w, double sigma_s) {
    if (!(sigma_s > 0.0)) throw ConfigError("gaussian_smooth: sigma_s must be > 0");
    auto out = gaussian_smooth_samples(w.samples(), sigma_s * w.fs());
    return Waveform(std::move(out), w.fs(), w.modality(), w.patient_id(), w.start_time_s());
}

Waveform preprocess(const Waveform& w, const FilterConfig& cfg, PreprocessInfo* info) {
    cfg.validate();
    Waveform filtered = high_pass(w, cfg.hp_cutoff_hz);

    const double sigma_s =
        cfg.gaussian_sigma_s ? *cfg.gaussian_sigma_s : default_gaussian_sigma_s(cfg.lp_cutoff_hz);
    // A cutoff strictly above Nyquist has nothing left to attenuate; skip the
    // smoother instead of silently clamping the configuration.
    const bool skip = !cfg.gaussian_sigma_s && cfg.lp_cutoff_hz > w.fs() / 2.0;
    if (info) {
        info->smoothing_skipped = skip;
        info->gaussian_sigma_s = skip ? 0.0 : sigma_s;
    }
    if (skip) return filtered;
    return gaussian_smooth(filtered, sigma_s);
}

} // namespace vitalgrade
