#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vitalgrade/errors.hpp"
#include "vitalgrade/fft.hpp"

using namespace vitalgrade;
using vitalgrade::testing::scaled_max_err;

TEST_SUITE("fft") {

TEST_CASE("constant signal concentrates at DC") {
    const std::vector<double> x(8, 3.0);
    const auto mags = fft::magnitude_spectrum(x);
    REQUIRE(mags.size() == 5);
    CHECK(mags[0] == doctest::Approx(24.0).epsilon(1e-12));
    for (std::size_t k = 1; k < mags.size(); ++k) CHECK(mags[k] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("unit sinusoid lands in its bin with magnitude L/2") {
    const std::size_t n = 64;
    const std::size_t bin = 5;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(bin * i) /
                        static_cast<double>(n));
    }
    const auto mags = fft::magnitude_spectrum(x);
    CHECK(mags[bin] == doctest::Approx(static_cast<double>(n) / 2.0).epsilon(1e-9));
    for (std::size_t k = 0; k < mags.size(); ++k) {
        if (k != bin) CHECK(std::abs(mags[k]) < 1e-8);
    }
}

TEST_CASE("matches the direct DFT for power-of-two and odd lengths") {
    Rng rng(404);
    for (const std::size_t n : {2ull, 16ull, 64ull, 100ull, 255ull, 257ull, 1000ull}) {
        std::vector<double> x(n);
        for (double& v : x) v = rng.normal();
        const auto fast = fft::magnitude_spectrum(x);
        const auto slow = oracle::oracle_dft(x);
        REQUIRE(fast.size() == slow.size());
        CHECK_MESSAGE(scaled_max_err(fast, slow) < 1e-9, "length ", n);
    }
}

TEST_CASE("single-sample and empty inputs") {
    const auto spec = fft::forward(std::vector<double>{4.5});
    REQUIRE(spec.size() == 1);
    CHECK(spec[0].real() == doctest::Approx(4.5));
    CHECK_THROWS_AS(fft::forward(std::vector<double>{}), DataError);
}

TEST_CASE("forward_pow2 rejects non-power-of-two sizes") {
    std::vector<std::complex<double>> a(6);
    CHECK_THROWS_AS(fft::forward_pow2(a), ConfigError);
}

} // TEST_SUITE
