#include "vitalgrade/fft.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include "vitalgrade/errors.hpp"

namespace vitalgrade::fft {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Half-period twiddle table for a transform of size m (power of two):
// w[j] = exp(-2*pi*i*j/m) for j in [0, m/2). Stage `len` butterflies index it
// with stride m/len. Tables are cached per size; computing each root directly
// from cos/sin keeps precision independent of table length.
using Twiddles = std::vector<std::complex<double>>;

std::shared_ptr<const Twiddles> half_twiddles(std::size_t m) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const Twiddles>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(m);
        if (it != cache.end()) return it->second;
    }
    auto table = std::make_shared<Twiddles>();
    table->resize(m / 2);
    const double step = -2.0 * kPi / static_cast<double>(m);
    for (std::size_t j = 0; j < m / 2; ++j) {
        const double a = step * static_cast<double>(j);
        (*table)[j] = {std::cos(a), std::sin(a)};
    }
    std::lock_guard<std::mutex> lock(mu);
    auto [it, inserted] = cache.emplace(m, table);
    return it->second;
}

void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    auto tw = half_twiddles(n);
    const Twiddles& w = *tw;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t block = 0; block < n; block += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> t = a[block + j + len / 2] * w[j * stride];
                a[block + j + len / 2] = a[block + j] - t;
                a[block + j] += t;
            }
        }
    }
}

void ifft_pow2(std::vector<std::complex<double>>& a) {
    for (auto& v : a) v = std::conj(v);
    fft_pow2(a);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v = std::conj(v) * inv;
}

// Bluestein chirp-z plan for one signal length. X[k] = c[k] * (a conv b)[k]
// with a[n] = x[n]*c[n], b[m] = conj(c[m]) extended symmetrically, and
// c[n] = exp(-i*pi*n^2/L). The convolution runs over a power-of-two FFT of
// size m >= 2L-1; the FFT of b is precomputed once per length.
struct BluesteinPlan {
    std::size_t length = 0;
    std::size_t m = 0;
    std::vector<std::complex<double>> chirp;   // c[n], n in [0, L)
    std::vector<std::complex<double>> b_hat;   // FFT of the symmetric chirp
};

std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t length) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(length);
        if (it != cache.end()) return it->second;
    }
    auto plan = std::make_shared<BluesteinPlan>();
    plan->length = length;
    plan->m = next_pow2(2 * length - 1);
    plan->chirp.resize(length);
    // n^2 mod 2L keeps the angle argument small; exp(-i*pi*n^2/L) has period
    // 2L in n^2, so the reduction is exact.
    const auto two_l = static_cast<std::uint64_t>(2 * length);
    for (std::size_t n = 0; n < length; ++n) {
        const std::uint64_t sq = (static_cast<std::uint64_t>(n) * n) % two_l;
        const double a = -kPi * static_cast<double>(sq) / static_cast<double>(length);
        plan->chirp[n] = {std::cos(a), std::sin(a)};
    }
    std::vector<std::complex<double>> b(plan->m, {0.0, 0.0});
    b[0] = std::conj(plan->chirp[0]);
    for (std::size_t n = 1; n < length; ++n) {
        b[n] = std::conj(plan->chirp[n]);
        b[plan->m - n] = b[n];
    }
    fft_pow2(b);
    plan->b_hat = std::move(b);
    std::lock_guard<std::mutex> lock(mu);
    auto [it, inserted] = cache.emplace(length, plan);
    return it->second;
}

std::vector<std::complex<double>> bluestein(std::span<const double> x) {
    const std::size_t length = x.size();
    auto plan = bluestein_plan(length);
    std::vector<std::complex<double>> a(plan->m, {0.0, 0.0});
    for (std::size_t n = 0; n < length; ++n) a[n] = x[n] * plan->chirp[n];
    fft_pow2(a);
    for (std::size_t i = 0; i < plan->m; ++i) a[i] *= plan->b_hat[i];
    ifft_pow2(a);
    std::vector<std::complex<double>> out(length);
    for (std::size_t k = 0; k < length; ++k) out[k] = a[k] * plan->chirp[k];
    return out;
}

} // namespace

void forward_pow2(std::vector<std::complex<double>>& a) {
    if (!is_pow2(a.size())) throw ConfigError("fft: forward_pow2 requires a power-of-two length");
    fft_pow2(a);
}

std::vector<std::complex<double>> forward(std::span<const double> x) {
    if (x.empty()) throw DataError("fft: empty input");
    if (x.size() == 1) return {std::complex<double>(x[0], 0.0)};
    if (is_pow2(x.size())) {
        std::vector<std::complex<double>> a(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};
        fft_pow2(a);
        return a;
    }
    return bluestein(x);
}

std::vector<double> magnitude_spectrum(std::span<const double> x) {
    const auto spec = forward(x);
    const std::size_t n_mag = x.size() / 2 + 1;
    std::vector<double> mags(n_mag);
    for (std::size_t k = 0; k < n_mag; ++k) mags[k] = std::abs(spec[k]);
    return mags;
}

} // namespace vitalgrade::fft
