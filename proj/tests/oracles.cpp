#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vitalgrade::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_length(std::size_t n) {
    if (n > kMaxOracleLength) {
        throw std::invalid_argument("oracle: input longer than " +
                                    std::to_string(kMaxOracleLength) + " samples refused");
    }
}

} // namespace

std::vector<double> oracle_dft(const std::vector<double>& x) {
    check_length(x.size());
    const std::size_t n = x.size();
    // exp(-2*pi*i*m/n) table indexed by k*n' mod n; the direct definition,
    // evaluated term by term.
    std::vector<double> cos_table(n), sin_table(n);
    for (std::size_t m = 0; m < n; ++m) {
        cos_table[m] = std::cos(-2.0 * kPi * static_cast<double>(m) / static_cast<double>(n));
        sin_table[m] = std::sin(-2.0 * kPi * static_cast<double>(m) / static_cast<double>(n));
    }
    std::vector<double> mags(n / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t m = (k * t) % n;
            re += x[t] * cos_table[m];
            im += x[t] * sin_table[m];
        }
        mags[k] = std::hypot(re, im);
    }
    return mags;
}

std::vector<double> oracle_time_stats(const std::vector<double>& x) {
    check_length(x.size());
    const std::size_t n = x.size();
    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end());

    const double mn = sorted.front();
    const double mx = sorted.back();
    const double median =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / static_cast<double>(n);

    double m2 = 0.0;
    for (double v : x) m2 += (v - mean) * (v - mean);
    const double stdev = std::sqrt(m2 / static_cast<double>(n));

    double energy = 0.0;
    for (double v : x) energy += v * v;

    double m4 = 0.0;
    for (double v : x) m4 += (v - mean) * (v - mean) * (v - mean) * (v - mean);
    const double kurtosis = m2 == 0.0 ? 0.0 : static_cast<double>(n) * m4 / (m2 * m2);

    double crossings = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (x[i] * x[i + 1] < 0.0) crossings += 1.0;
    }
    return {mn, mx, median, mean, stdev, energy, kurtosis, crossings};
}

std::vector<double> oracle_gradient_pooling(const std::vector<double>& x, int chunks) {
    check_length(x.size());
    const std::size_t n = x.size();
    const auto t = static_cast<std::size_t>(chunks);
    std::vector<double> out;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < t; ++c) {
        std::size_t len = n / t;
        if (c < n % t) len += 1;
        std::vector<double> grads;
        for (std::size_t i = begin; i + 1 < begin + len; ++i) grads.push_back(x[i + 1] - x[i]);

        double h_pos = 0.0, h_neg = 0.0, s_pos = 0.0, s_neg = 0.0;
        for (double g : grads) {
            if (g >= 0.0) h_pos += 1.0;
            else h_neg += 1.0;
            s_pos += std::max(g, 0.0);
            s_neg += std::min(g, 0.0);
        }
        out.push_back(h_pos);
        out.push_back(h_neg);
        out.push_back(s_pos);
        out.push_back(s_neg);
        begin += len;
    }
    return out;
}

std::vector<double> oracle_low_freq(const std::vector<double>& magnitudes, int n_low) {
    std::vector<double> out(static_cast<std::size_t>(n_low), 0.0);
    for (std::size_t c = 0; c < out.size() && c < magnitudes.size(); ++c) out[c] = magnitudes[c];
    return out;
}

std::vector<double> oracle_whole_freq(const std::vector<double>& magnitudes,
                                      std::size_t source_length, int n_bands) {
    const double l = static_cast<double>(source_length);
    const double nb = static_cast<double>(n_bands);
    const std::size_t n_mag = source_length / 2 + 1; // 1-based indices run 1..n_mag
    std::vector<double> out;
    for (int j = 1; j <= n_bands; ++j) {
        const double sigma_i = 1.0 + (static_cast<double>(j) - 1.0) * l / (2.0 * nb);
        const double sigma_f = 1.0 + static_cast<double>(j) * l / (2.0 * nb);
        const auto first = static_cast<long long>(std::ceil(sigma_i));
        const long long last = j < n_bands
                                   ? static_cast<long long>(std::ceil(sigma_f)) - 1
                                   : static_cast<long long>(n_mag);
        double sum = 0.0;
        for (long long c = first; c <= last; ++c) {
            if (c < 1 || c > static_cast<long long>(n_mag)) continue;
            sum += magnitudes[static_cast<std::size_t>(c - 1)];
        }
        out.push_back(sum);
    }
    return out;
}

std::vector<double> oracle_features(const Window& win, const FeatureConfig& cfg) {
    check_length(win.length());
    const auto& x = win.samples();
    std::vector<double> out;
    if (cfg.include_groups.count(FeatureGroup::kTime)) {
        const auto stats = oracle_time_stats(x);
        out.insert(out.end(), stats.begin(), stats.end());
    }
    if (cfg.include_groups.count(FeatureGroup::kGradient)) {
        const auto pooled = oracle_gradient_pooling(x, cfg.temporal_resolution);
        out.insert(out.end(), pooled.begin(), pooled.end());
    }
    const bool needs_spectrum = cfg.include_groups.count(FeatureGroup::kLowFreq) ||
                                cfg.include_groups.count(FeatureGroup::kWholeFreq);
    if (needs_spectrum) {
        const auto mags = oracle_dft(x);
        if (cfg.include_groups.count(FeatureGroup::kLowFreq)) {
            const auto lf = oracle_low_freq(mags, cfg.n_low);
            out.insert(out.end(), lf.begin(), lf.end());
        }
        if (cfg.include_groups.count(FeatureGroup::kWholeFreq)) {
            const auto wf = oracle_whole_freq(mags, win.length(), cfg.n_bands);
            out.insert(out.end(), wf.begin(), wf.end());
        }
    }
    return out;
}

} // namespace vitalgrade::oracle
