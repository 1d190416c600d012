#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "vitalgrade/errors.hpp"
#include "vitalgrade/preprocess.hpp"

using namespace vitalgrade;

namespace {

constexpr double kPi = 3.14159265358979323846;

Waveform sinusoid(double freq_hz, double fs, double duration_s, double amplitude = 1.0) {
    const auto n = static_cast<std::size_t>(duration_s * fs);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = amplitude * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) / fs);
    }
    return Waveform(std::move(x), fs, Modality::kEcg, "p", 0.0);
}

// RMS-based amplitude estimate over the central half of the signal.
double central_amplitude(const Waveform& w) {
    const std::size_t n = w.size();
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = n / 4; i < 3 * n / 4; ++i) {
        acc += w.samples()[i] * w.samples()[i];
        ++count;
    }
    return std::sqrt(2.0 * acc / static_cast<double>(count));
}

} // namespace

TEST_SUITE("preprocess") {

TEST_CASE("high_pass rejects DC") {
    const double fs = 50.0, cutoff = 0.5, c = 3.7;
    const Waveform w(std::vector<double>(1500, c), fs, Modality::kEcg, "p", 0.0);
    const Waveform y = high_pass(w, cutoff);
    REQUIRE(y.size() == w.size());
    // Exclude 5/cutoff seconds of transient on each side.
    const auto guard = static_cast<std::size_t>(5.0 / cutoff * fs);
    double worst = 0.0;
    for (std::size_t i = guard; i + guard < y.size(); ++i) {
        worst = std::max(worst, std::abs(y.samples()[i]));
    }
    CHECK(worst <= 1e-3 * std::abs(c));
}

TEST_CASE("high_pass preserves passband amplitude within 1 percent") {
    // Analytic forward-backward Butterworth magnitude at f: 1/(1+(fc/f)^4).
    const Waveform w = sinusoid(10.0, 300.0, 20.0);
    const Waveform y = high_pass(w, 0.05);
    const double expected_gain = 1.0 / (1.0 + std::pow(0.05 / 10.0, 4.0));
    CHECK(central_amplitude(y) == doctest::Approx(expected_gain).epsilon(0.01));
}

TEST_CASE("high_pass is zero-phase on a passband sinusoid") {
    const double fs = 100.0, freq = 5.0;
    const Waveform w = sinusoid(freq, fs, 10.0);
    const Waveform y = high_pass(w, 0.5);
    // Cross-correlation over small lags peaks at zero.
    const auto& a = w.samples();
    const auto& b = y.samples();
    const std::size_t n = a.size();
    int best_lag = -99;
    double best = -1e300;
    for (int lag = -5; lag <= 5; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 100; i + 100 < n; ++i) {
            acc += a[i] * b[static_cast<std::size_t>(static_cast<int>(i) + lag)];
        }
        if (acc > best) {
            best = acc;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 0);
}

TEST_CASE("high_pass validates the cutoff against Nyquist") {
    const Waveform w({1.0, 2.0, 3.0}, 0.08, Modality::kEcg, "p", 0.0);
    CHECK_THROWS_AS(high_pass(w, 0.05), ConfigError);
}

TEST_CASE("gaussian_smooth keeps constants unchanged") {
    const Waveform w(std::vector<double>(200, 2.5), 100.0, Modality::kPpg, "p", 0.0);
    const Waveform y = gaussian_smooth(w, 0.05);
    REQUIRE(y.size() == w.size());
    for (double v : y.samples()) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("gaussian_smooth impulse response is the normalized kernel") {
    const double fs = 100.0, sigma_s = 0.05; // sigma = 5 samples, radius 20
    std::vector<double> x(4001, 0.0);
    x[2000] = 1.0;
    const Waveform w(std::move(x), fs, Modality::kPpg, "p", 0.0);
    const Waveform y = gaussian_smooth(w, sigma_s);

    const double sigma = sigma_s * fs;
    double norm = 0.0;
    for (int k = -20; k <= 20; ++k) norm += std::exp(-0.5 * k * k / (sigma * sigma));
    for (int k = -20; k <= 20; ++k) {
        const double expected = std::exp(-0.5 * k * k / (sigma * sigma)) / norm;
        CHECK(y.samples()[static_cast<std::size_t>(2000 + k)] ==
              doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(y.samples()[100] == doctest::Approx(0.0));
}

TEST_CASE("gaussian_smooth matches dense convolution and reduces noise variance") {
    Rng rng(77);
    std::vector<double> x(1000);
    for (double& v : x) v = rng.normal();
    const double fs = 100.0, sigma_s = 0.1; // sigma = 10 samples
    const Waveform w(x, fs, Modality::kPpg, "p", 0.0);
    const Waveform y = gaussian_smooth(w, sigma_s);

    // Dense convolution oracle with the same mirror boundary rule.
    const double sigma = sigma_s * fs;
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel;
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel.push_back(std::exp(-0.5 * k * k / (sigma * sigma)));
        norm += kernel.back();
    }
    for (double& v : kernel) v /= norm;
    const int n = static_cast<int>(x.size());
    auto reflect = [&](int i) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i;
            if (i >= n) i = 2 * (n - 1) - i;
        }
        return static_cast<std::size_t>(i);
    };
    double var_in = 0.0, var_out = 0.0;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            acc += kernel[static_cast<std::size_t>(k + radius)] * x[reflect(i - k)];
        }
        CHECK(y.samples()[static_cast<std::size_t>(i)] == doctest::Approx(acc).epsilon(1e-12));
        var_in += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        var_out += acc * acc;
    }
    CHECK(var_out < var_in);
}

TEST_CASE("preprocess applies or skips smoothing by modality rate") {
    FilterConfig cfg; // 0.05 / 150 defaults
    Rng rng(3);

    auto make = [&](double fs) {
        std::vector<double> x(static_cast<std::size_t>(fs * 30));
        for (double& v : x) v = rng.normal();
        return Waveform(std::move(x), fs, Modality::kEcg, "p", 0.0);
    };

    PreprocessInfo info;
    preprocess(make(300.0), cfg, &info);
    CHECK_FALSE(info.smoothing_skipped); // 150 Hz cutoff reachable at fs=300
    preprocess(make(100.0), cfg, &info);
    CHECK(info.smoothing_skipped);
    preprocess(make(25.0), cfg, &info);
    CHECK(info.smoothing_skipped);

    // An explicit sigma is always honored.
    FilterConfig manual = cfg;
    manual.gaussian_sigma_s = 0.02;
    preprocess(make(25.0), manual, &info);
    CHECK_FALSE(info.smoothing_skipped);
}

TEST_CASE("preprocess is linear") {
    Rng rng(9);
    const std::size_t n = 2000;
    std::vector<double> xa(n), xb(n), xc(n);
    const double a = 1.7, b = -0.6;
    for (std::size_t i = 0; i < n; ++i) {
        xa[i] = rng.normal();
        xb[i] = rng.normal();
        xc[i] = a * xa[i] + b * xb[i];
    }
    FilterConfig cfg;
    const double fs = 300.0;
    const auto ya = preprocess(Waveform(xa, fs, Modality::kEcg, "p", 0.0), cfg);
    const auto yb = preprocess(Waveform(xb, fs, Modality::kEcg, "p", 0.0), cfg);
    const auto yc = preprocess(Waveform(xc, fs, Modality::kEcg, "p", 0.0), cfg);
    double scale = 1.0;
    for (double v : yc.samples()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) {
        const double combined = a * ya.samples()[i] + b * yb.samples()[i];
        CHECK(std::abs(combined - yc.samples()[i]) / scale < 1e-9);
    }
}

TEST_CASE("stage output length always equals input length") {
    Rng rng(5);
    for (const std::size_t n : {7ull, 64ull, 999ull}) {
        std::vector<double> x(n);
        for (double& v : x) v = rng.normal();
        const Waveform w(std::move(x), 40.0, Modality::kIp, "p", 0.0);
        CHECK(high_pass(w, 0.5).size() == n);
        CHECK(gaussian_smooth(w, 0.05).size() == n);
    }
}

TEST_CASE("filter config validation") {
    FilterConfig cfg;
    cfg.hp_cutoff_hz = 200.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = FilterConfig{};
    cfg.gaussian_sigma_s = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(default_gaussian_sigma_s(150.0) == doctest::Approx(0.1325 / 150.0));
}

} // TEST_SUITE
