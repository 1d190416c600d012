#pragma once

// Shared generators and comparators for the test suites.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vitalgrade/rng.hpp"
#include "vitalgrade/types.hpp"

namespace vitalgrade::testing {

inline Window random_window(Rng& rng, std::size_t length, double fs = 100.0,
                            Modality modality = Modality::kEcg, std::string label = "a") {
    std::vector<double> x(length);
    for (double& v : x) v = rng.normal();
    return Window(std::move(x), fs, modality, "pt", std::move(label), 0.0);
}

/// max |a-b| over the vectors, scaled by max(1, ||b||_inf).
inline double scaled_max_err(const std::vector<double>& a, const std::vector<double>& b) {
    double scale = 1.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return a.size() == b.size() ? worst : std::numeric_limits<double>::infinity();
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Unique scratch directory under the system temp root; removed on
/// destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("vitalgrade_test_" + tag + "_" + std::to_string(counter.fetch_add(1)) + "_" +
                 std::to_string(static_cast<unsigned>(::getpid())));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace vitalgrade::testing
