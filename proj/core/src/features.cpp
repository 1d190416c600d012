#include "vitalgrade/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <tuple>

#include "vitalgrade/errors.hpp"
#include "vitalgrade/fft.hpp"

namespace vitalgrade {

namespace {

// Order-preserving integer key for finite doubles.
inline std::uint64_t order_key(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof(u));
    return (u >> 63) ? ~u : (u | 0x8000000000000000ull);
}

// Exact order statistics at adjacent ranks r0 <= r1. One streaming histogram
// pass over the top 11 key bits narrows the ranks to a few buckets; the
// gathered candidates are then selected directly. Degenerate distributions
// (everything in one bucket) fall back to selection over the full copy.
std::pair<double, double> two_order_stats(std::span<const double> x, std::size_t r0,
                                          std::size_t r1) {
    static thread_local std::vector<std::uint32_t> counts;
    counts.assign(2048, 0);
    for (double v : x) counts[order_key(v) >> 53] += 1;

    std::size_t cum = 0;
    std::uint64_t b0 = 0, b1 = 0;
    std::size_t before0 = 0;
    for (std::uint64_t b = 0; b < counts.size(); ++b) {
        const std::size_t next = cum + counts[b];
        if (r0 >= cum && r0 < next) {
            b0 = b;
            before0 = cum;
        }
        if (r1 >= cum && r1 < next) {
            b1 = b;
            break;
        }
        cum = next;
    }

    static thread_local std::vector<double> candidates;
    candidates.clear();
    for (double v : x) {
        const std::uint64_t b = order_key(v) >> 53;
        if (b >= b0 && b <= b1) candidates.push_back(v);
    }

    const std::size_t l1 = r1 - before0;
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(l1),
                     candidates.end());
    const double v1 = candidates[l1];
    if (r0 == r1) return {v1, v1};
    const double v0 =
        *std::max_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(l1));
    return {v0, v1};
}

} // namespace

std::string to_string(FeatureGroup g) {
    switch (g) {
    case FeatureGroup::kTime: return "time";
    case FeatureGroup::kGradient: return "gradient";
    case FeatureGroup::kLowFreq: return "lowfreq";
    case FeatureGroup::kWholeFreq: return "wholefreq";
    }
    return "time";
}

FeatureGroup feature_group_from_string(std::string_view s) {
    if (s == "time") return FeatureGroup::kTime;
    if (s == "gradient") return FeatureGroup::kGradient;
    if (s == "lowfreq") return FeatureGroup::kLowFreq;
    if (s == "wholefreq") return FeatureGroup::kWholeFreq;
    throw ConfigError("unknown feature group '" + std::string(s) +
                      "' (expected time, gradient, lowfreq or wholefreq)");
}

void FeatureConfig::validate() const {
    if (n_low < 1) throw ConfigError("features: n_low must be >= 1");
    if (n_bands < 1) throw ConfigError("features: n_bands must be >= 1");
    if (temporal_resolution < 1) throw ConfigError("features: temporal_resolution must be >= 1");
    if (include_groups.empty()) throw ConfigError("features: include_groups must be non-empty");
}

double median(std::span<const double> x) {
    if (x.empty()) throw DataError("median: empty input");
    const std::size_t mid = x.size() / 2;
    if (x.size() % 2 == 1) {
        return two_order_stats(x, mid, mid).second;
    }
    const auto [lo, hi] = two_order_stats(x, mid - 1, mid);
    return 0.5 * (lo + hi);
}

TimeStats time_stats(const Window& win) {
    const auto& x = win.samples();
    const std::size_t n = x.size();
    TimeStats st;

    // Kept as separate plain loops: each streams at memory bandwidth, which
    // the complexity checks rely on.
    double sum = 0.0, energy = 0.0;
    for (double v : x) {
        sum += v;
        energy += v * v;
    }
    st.mean = sum / static_cast<double>(n);
    st.energy = energy;

    double mn = x[0], mx = x[0];
    for (double v : x) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    st.min = mn;
    st.max = mx;

    // Strict sign changes only; exact zeros do not count. Bitwise bool ops
    // keep the loop branch-free.
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double prev = x[i - 1];
        const double v = x[i];
        crossings += static_cast<std::size_t>(((prev > 0.0) & (v < 0.0)) | ((prev < 0.0) & (v > 0.0)));
    }
    st.zero_crossings = static_cast<double>(crossings);

    // Median: average of the two central order statistics for even n.
    const std::size_t mid = n / 2;
    if (n % 2 == 1) {
        st.median = two_order_stats(x, mid, mid).second;
    } else {
        const auto [lo, hi] = two_order_stats(x, mid - 1, mid);
        st.median = 0.5 * (lo + hi);
    }

    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - st.mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    st.stdev = std::sqrt(m2 / static_cast<double>(n));
    if (m2 == 0.0) {
        st.kurtosis = 0.0;
        st.kurtosis_degenerate = true;
    } else {
        st.kurtosis = static_cast<double>(n) * m4 / (m2 * m2);
    }
    return st;
}

std::vector<double> gradient(std::span<const double> x) {
    if (x.size() < 2) throw DataError("gradient: needs at least 2 samples");
    std::vector<double> g(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) g[i] = x[i + 1] - x[i];
    return g;
}

std::vector<double> gradient_pooling(const Window& win, int temporal_resolution) {
    const auto& x = win.samples();
    const std::size_t n = x.size();
    const auto t = static_cast<std::size_t>(temporal_resolution);
    if (temporal_resolution < 1) throw ConfigError("gradient_pooling: temporal_resolution must be >= 1");
    if (n / t < 2) {
        throw ConfigError("gradient_pooling: temporal_resolution " + std::to_string(temporal_resolution) +
                          " leaves a chunk below 2 samples for a " + std::to_string(n) +
                          "-sample window");
    }

    const std::size_t base = n / t;
    const std::size_t longer = n % t; // first `longer` chunks get one extra sample

    std::vector<double> out;
    out.reserve(4 * t);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < t; ++c) {
        const std::size_t len = base + (c < longer ? 1 : 0);
        double h_pos = 0.0, s_pos = 0.0, s_neg = 0.0;
        for (std::size_t i = begin; i + 1 < begin + len; ++i) {
            const double g = x[i + 1] - x[i];
            h_pos += g >= 0.0 ? 1.0 : 0.0;
            s_pos += std::max(g, 0.0);
            s_neg += std::min(g, 0.0);
        }
        const double h_neg = static_cast<double>(len - 1) - h_pos;
        out.push_back(h_pos);
        out.push_back(h_neg);
        out.push_back(s_pos);
        out.push_back(s_neg);
        begin += len;
    }
    return out;
}

SpectrumView spectrum(const Window& win) {
    SpectrumView sp;
    sp.magnitudes = fft::magnitude_spectrum(win.samples());
    sp.source_length = win.length();
    sp.fs = win.fs();
    return sp;
}

std::vector<double> low_freq_features(const SpectrumView& sp, int n_low, bool* short_window) {
    if (n_low < 1) throw ConfigError("low_freq_features: n_low must be >= 1");
    const auto n = static_cast<std::size_t>(n_low);
    std::vector<double> out(n, 0.0);
    const std::size_t available = std::min(n, sp.magnitudes.size());
    std::copy(sp.magnitudes.begin(), sp.magnitudes.begin() + static_cast<std::ptrdiff_t>(available),
              out.begin());
    if (short_window) *short_window = available < n;
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> band_bounds(std::size_t source_length,
                                                             int n_bands) {
    if (n_bands < 1) throw ConfigError("band_bounds: n_bands must be >= 1");
    const auto l = static_cast<std::uint64_t>(source_length);
    const auto nb = static_cast<std::uint64_t>(n_bands);
    const std::uint64_t n_mag = l / 2 + 1;
    const std::uint64_t denom = 2 * nb;

    // 1-based coefficient bound for bin j (1-based): 1 + ceil((j-1)*L / (2*Nb)).
    auto lower_bound_c = [&](std::uint64_t j) {
        const std::uint64_t num = (j - 1) * l;
        return 1 + (num + denom - 1) / denom;
    };

    std::vector<std::pair<std::size_t, std::size_t>> bounds;
    bounds.reserve(static_cast<std::size_t>(n_bands));
    for (std::uint64_t j = 1; j <= nb; ++j) {
        const std::uint64_t begin_c = lower_bound_c(j);
        // Interior bins are half-open at the next bin's lower bound; the last
        // bin closes at the final coefficient.
        const std::uint64_t end_c = (j < nb) ? lower_bound_c(j + 1) : n_mag + 1;
        const std::uint64_t b = std::min(begin_c, n_mag + 1);
        const std::uint64_t e = std::min(end_c, n_mag + 1);
        bounds.emplace_back(static_cast<std::size_t>(b - 1),
                            static_cast<std::size_t>(std::max(b, e) - 1));
    }
    return bounds;
}

double compensated_sum(std::span<const double> x) {
    double sum = 0.0, comp = 0.0;
    for (double v : x) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

std::vector<double> whole_freq_features(const SpectrumView& sp, int n_bands) {
    const auto bounds = band_bounds(sp.source_length, n_bands);
    std::vector<double> out;
    out.reserve(bounds.size());
    for (const auto& [begin, end] : bounds) {
        out.push_back(begin >= end
                          ? 0.0
                          : compensated_sum(std::span<const double>(sp.magnitudes).subspan(
                                begin, end - begin)));
    }
    return out;
}

FeatureLayout make_layout(const FeatureConfig& cfg) {
    cfg.validate();
    std::vector<LayoutEntry> entries;
    std::size_t at = 0;
    auto push = [&](const std::string& group, const std::string& name) {
        entries.push_back(LayoutEntry{group, name, at, 1});
        ++at;
    };
    if (cfg.include_groups.count(FeatureGroup::kTime)) {
        for (const char* name : {"min", "max", "median", "mean", "std", "energy", "kurtosis",
                                 "zero_crossing"}) {
            push("time", name);
        }
    }
    if (cfg.include_groups.count(FeatureGroup::kGradient)) {
        for (int c = 0; c < cfg.temporal_resolution; ++c) {
            const std::string prefix = "c" + std::to_string(c) + "_";
            push("gradient", prefix + "h_pos");
            push("gradient", prefix + "h_neg");
            push("gradient", prefix + "s_pos");
            push("gradient", prefix + "s_neg");
        }
    }
    if (cfg.include_groups.count(FeatureGroup::kLowFreq)) {
        for (int c = 0; c < cfg.n_low; ++c) push("lowfreq", "c" + std::to_string(c));
    }
    if (cfg.include_groups.count(FeatureGroup::kWholeFreq)) {
        for (int b = 0; b < cfg.n_bands; ++b) push("wholefreq", "b" + std::to_string(b));
    }
    return FeatureLayout::from_entries(std::move(entries));
}

FeatureVector extract(const Window& win, const FeatureConfig& cfg, ExtractFlags* flags) {
    cfg.validate();
    FeatureVector fv;
    fv.label = win.label();
    fv.patient_id = win.patient_id();
    fv.window_start_s = win.start_time_s();
    fv.source_fs = win.fs();

    ExtractFlags local;
    if (cfg.include_groups.count(FeatureGroup::kTime)) {
        const TimeStats st = time_stats(win);
        local.kurtosis_degenerate = st.kurtosis_degenerate;
        const auto arr = st.as_array();
        fv.values.insert(fv.values.end(), arr.begin(), arr.end());
    }
    if (cfg.include_groups.count(FeatureGroup::kGradient)) {
        const auto pooled = gradient_pooling(win, cfg.temporal_resolution);
        fv.values.insert(fv.values.end(), pooled.begin(), pooled.end());
    }
    const bool needs_spectrum = cfg.include_groups.count(FeatureGroup::kLowFreq) ||
                                cfg.include_groups.count(FeatureGroup::kWholeFreq);
    if (needs_spectrum) {
        const SpectrumView sp = spectrum(win);
        if (cfg.include_groups.count(FeatureGroup::kLowFreq)) {
            bool short_window = false;
            const auto lf = low_freq_features(sp, cfg.n_low, &short_window);
            local.short_window = short_window;
            fv.values.insert(fv.values.end(), lf.begin(), lf.end());
        }
        if (cfg.include_groups.count(FeatureGroup::kWholeFreq)) {
            const auto wf = whole_freq_features(sp, cfg.n_bands);
            fv.values.insert(fv.values.end(), wf.begin(), wf.end());
        }
    }
    if (flags) *flags = local;
    return fv;
}

std::pair<FeatureVector, FeatureLayout> fuse(
    const std::vector<std::tuple<Modality, FeatureVector, FeatureLayout>>& parts) {
    if (parts.empty()) throw DataError("fuse: needs at least one modality");

    double slowest_fs = std::get<1>(parts[0]).source_fs;
    for (const auto& [m, fv, layout] : parts) {
        (void)m;
        (void)layout;
        if (fv.source_fs > 0.0) slowest_fs = std::min(slowest_fs, fv.source_fs);
    }
    const double max_skew_s = slowest_fs > 0.0 ? 1.0 / slowest_fs : 0.0;

    const auto& first = std::get<1>(parts[0]);
    FeatureVector fused;
    fused.patient_id = first.patient_id;
    fused.label = first.label;
    fused.window_start_s = first.window_start_s;
    fused.source_fs = slowest_fs;

    std::vector<LayoutEntry> entries;
    std::size_t at = 0;
    for (const auto& [modality, fv, layout] : parts) {
        if (fv.patient_id != first.patient_id) {
            throw DataError("fuse: mixed patients '" + first.patient_id + "' and '" +
                            fv.patient_id + "'");
        }
        if (std::abs(fv.window_start_s - first.window_start_s) > max_skew_s) {
            throw DataError("fuse: windows misaligned for patient '" + fv.patient_id +
                            "': starts " + std::to_string(first.window_start_s) + " s and " +
                            std::to_string(fv.window_start_s) + " s differ by more than one " +
                            "sample period of the slowest modality");
        }
        if (fv.label != first.label && !fv.label.empty() && !first.label.empty()) {
            throw DataError("fuse: conflicting labels '" + first.label + "' and '" + fv.label + "'");
        }
        validate_feature_vector(fv, layout);
        for (const auto& e : layout.entries()) {
            entries.push_back(LayoutEntry{to_string(modality) + "." + e.group, e.name,
                                          at + e.start, e.length});
        }
        at += layout.total_dim();
        fused.values.insert(fused.values.end(), fv.values.begin(), fv.values.end());
        if (fused.label.empty()) fused.label = fv.label;
    }
    return {std::move(fused), FeatureLayout::from_entries(std::move(entries))};
}

} // namespace vitalgrade
