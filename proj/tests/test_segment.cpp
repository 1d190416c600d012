#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "vitalgrade/errors.hpp"
#include "vitalgrade/segment.hpp"

using namespace vitalgrade;

TEST_SUITE("segment") {

TEST_CASE("24h at 256 Hz yields 288 five-minute windows") {
    SegmentConfig cfg; // 300 s, no overlap
    CHECK(window_length(cfg, 256.0) == 76800);
    CHECK(expected_window_count(24ull * 3600 * 256, cfg, 256.0) == 288);
}

TEST_CASE("windows tile the waveform and map back to unique source indices") {
    Rng rng(21);
    std::vector<double> x(1000);
    for (double& v : x) v = rng.normal();
    const Waveform w(x, 10.0, Modality::kEcg, "p3", 5.0);

    SegmentConfig cfg;
    cfg.duration_s = 30.0; // L = 300
    const auto result = segment(w, cfg, "sev");
    REQUIRE(result.windows.size() == 3);
    CHECK_FALSE(result.input_shorter_than_window);

    std::set<std::size_t> covered;
    for (std::size_t k = 0; k < result.windows.size(); ++k) {
        const auto& win = result.windows[k];
        CHECK(win.length() == 300);
        CHECK(win.label() == "sev");
        CHECK(win.patient_id() == "p3");
        CHECK(win.start_time_s() == doctest::Approx(5.0 + 30.0 * static_cast<double>(k)));
        for (std::size_t i = 0; i < win.length(); ++i) {
            const std::size_t src = k * 300 + i;
            CHECK(win.samples()[i] == x[src]);
            covered.insert(src);
        }
    }
    CHECK(covered.size() == 900); // coverage <= waveform length, each index once
}

TEST_CASE("overlap shrinks the stride") {
    Rng rng(22);
    std::vector<double> x(1000);
    for (double& v : x) v = rng.normal();
    const Waveform w(std::move(x), 10.0, Modality::kEcg, "p", 0.0);
    SegmentConfig cfg;
    cfg.duration_s = 30.0;
    cfg.overlap_fraction = 0.5; // stride 150
    const auto result = segment(w, cfg, "");
    CHECK(result.windows.size() == 5); // offsets 0,150,...,600; 750+300 > 1000
    CHECK(window_stride(cfg, 10.0) == 150);
}

TEST_CASE("waveform shorter than one window warns instead of failing") {
    const Waveform w(std::vector<double>(240 * 10, 1.0), 10.0, Modality::kEcg, "p", 0.0);
    SegmentConfig cfg; // 300 s at 10 Hz = 3000 samples, waveform has 2400
    const auto result = segment(w, cfg, "x");
    CHECK(result.windows.empty());
    CHECK(result.input_shorter_than_window);
}

TEST_CASE("partial trailing window is kept only when requested") {
    const Waveform w(std::vector<double>(250, 1.0), 1.0, Modality::kEcg, "p", 0.0);
    SegmentConfig cfg;
    cfg.duration_s = 100.0;
    const auto dropped = segment(w, cfg, "");
    CHECK(dropped.windows.size() == 2);
    cfg.drop_partial = false;
    const auto kept = segment(w, cfg, "");
    REQUIRE(kept.windows.size() == 3);
    CHECK(kept.windows.back().length() == 50);
}

TEST_CASE("window count matches floor(N/L) without overlap") {
    SegmentConfig cfg;
    cfg.duration_s = 7.0;
    for (std::size_t n : {14ull, 15ull, 20ull, 21ull, 700ull}) {
        CHECK(expected_window_count(n, cfg, 1.0) == n / 7);
    }
}

TEST_CASE("config validation") {
    SegmentConfig cfg;
    cfg.duration_s = 0.0;
    CHECK_THROWS_AS(cfg.validate(1.0), ConfigError);
    cfg = SegmentConfig{};
    cfg.overlap_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(100.0), ConfigError);
    cfg = SegmentConfig{};
    cfg.duration_s = 0.005; // below 2 samples at 100 Hz
    CHECK_THROWS_AS(cfg.validate(100.0), ConfigError);
}

} // TEST_SUITE
