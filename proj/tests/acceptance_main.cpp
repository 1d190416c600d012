// Acceptance suite: one check per release criterion, each printing a PASS or
// FAIL line. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vitalgrade/eval.hpp"
#include "vitalgrade/features.hpp"
#include "vitalgrade/io.hpp"
#include "vitalgrade/pipeline.hpp"
#include "vitalgrade/rng.hpp"
#include "vitalgrade/svm.hpp"

using namespace vitalgrade;
using vitalgrade::testing::TempDir;
using vitalgrade::testing::random_window;
using vitalgrade::testing::slurp;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool passed, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", passed ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!passed) ++g_failures;
}

void run(int number, const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
        const auto [passed, detail] = fn();
        report(number, name, passed, detail);
    } catch (const std::exception& e) {
        report(number, name, false, std::string("exception: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --------------------------------------------------------------------------
// 1. Oracle equivalence on >= 200 random windows, L in {64..4096}, 1e-9.
// --------------------------------------------------------------------------
std::pair<bool, std::string> oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    FeatureConfig cfg; // defaults: all groups, 416 dims
    const FeatureLayout layout = make_layout(cfg);

    double worst = 0.0;
    const int n_windows = 200;
    for (int i = 0; i < n_windows; ++i) {
        const std::size_t length = 64 + rng.uniform_int(4096 - 64 + 1);
        const Window win = random_window(rng, length);
        const FeatureVector fast = extract(win, cfg);
        const auto slow = oracle::oracle_features(win, cfg);
        if (fast.values.size() != slow.size()) {
            return {false, "dimension mismatch"};
        }
        // Per-group scaled comparison: |a-b| <= 1e-9 * max(1, ||group||_inf).
        for (const auto& group : layout.groups()) {
            const auto [begin, end] = layout.group_range(group);
            double scale = 1.0;
            for (std::size_t d = begin; d < end; ++d) scale = std::max(scale, std::abs(slow[d]));
            for (std::size_t d = begin; d < end; ++d) {
                worst = std::max(worst, std::abs(fast.values[d] - slow[d]) / scale);
            }
        }
    }
    const double elapsed = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "200 windows, worst scaled error %.3g, %.1f s", worst, elapsed);
    return {worst < 1e-9 && elapsed < 120.0, buf};
}

// --------------------------------------------------------------------------
// 2. Gradient identities on 1e4 random windows.
// --------------------------------------------------------------------------
std::pair<bool, std::string> gradient_identities() {
    Rng rng(202);
    double worst_sum = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t length = 8 + rng.uniform_int(250);
        const int chunks = 1 + static_cast<int>(rng.uniform_int(4));
        if (length / static_cast<std::size_t>(chunks) < 2) continue;
        const Window win = random_window(rng, length);
        const auto pooled = gradient_pooling(win, chunks);

        std::size_t begin = 0;
        for (int c = 0; c < chunks; ++c) {
            std::size_t len = length / static_cast<std::size_t>(chunks);
            if (static_cast<std::size_t>(c) < length % static_cast<std::size_t>(chunks)) len += 1;
            const double h_pos = pooled[static_cast<std::size_t>(4 * c)];
            const double h_neg = pooled[static_cast<std::size_t>(4 * c) + 1];
            const double s_pos = pooled[static_cast<std::size_t>(4 * c) + 2];
            const double s_neg = pooled[static_cast<std::size_t>(4 * c) + 3];
            if (h_pos + h_neg != static_cast<double>(len - 1)) {
                return {false, "count identity violated"};
            }
            const double telescoped = win.samples()[begin + len - 1] - win.samples()[begin];
            worst_sum = std::max(worst_sum, std::abs(s_pos + s_neg - telescoped));
            begin += len;
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "10000 windows, worst |s+ + s- - (last-first)| = %.3g", worst_sum);
    return {worst_sum <= 1e-12, buf};
}

// --------------------------------------------------------------------------
// 3. Partition property across band counts and window regimes. The partition
// itself is exact at the index level: every one-sided coefficient lands in
// exactly one bin. Summing the rounded per-bin doubles can differ from the
// direct total only by the final rounding, so the numeric check requires
// bitwise equality for a single bin and at most one unit in the last place
// of the total otherwise.
// --------------------------------------------------------------------------
std::pair<bool, std::string> partition_property() {
    Rng rng(303);
    bool index_partition_ok = true;
    bool sums_ok = true;
    double worst_ulp = 0.0;
    for (const std::size_t length : {50ull, 1500ull, 76800ull}) {
        std::vector<double> x(length);
        for (double& v : x) v = rng.normal();
        const Window win(std::move(x), 100.0, Modality::kEcg, "p", "", 0.0);
        const SpectrumView sp = spectrum(win);
        const std::size_t n_mag = length / 2 + 1;
        for (const int n_bands : {1, 4, 200}) {
            // Index-level partition: every coefficient in exactly one bin.
            const auto bounds = band_bounds(length, n_bands);
            std::size_t next = 0;
            for (const auto& [begin, end] : bounds) {
                if (begin == end) continue;
                if (begin != next) index_partition_ok = false;
                next = end;
            }
            if (next != n_mag) index_partition_ok = false;

            const auto wf = whole_freq_features(sp, n_bands);
            const double total = compensated_sum(
                std::span<const double>(sp.magnitudes.data(), sp.magnitudes.size()));
            const double binned = compensated_sum(std::span<const double>(wf.data(), wf.size()));
            const double ulp_of_total = std::ldexp(std::abs(total), -52);
            const double gap_ulp = std::abs(binned - total) / ulp_of_total;
            worst_ulp = std::max(worst_ulp, gap_ulp);
            if (n_bands == 1) {
                sums_ok = sums_ok && binned == total;
            } else {
                sums_ok = sums_ok && gap_ulp <= 1.0;
            }
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "index partition %s, worst total gap %.3f ulp",
                  index_partition_ok ? "exact" : "BROKEN", worst_ulp);
    return {index_partition_ok && sums_ok, buf};
}

// --------------------------------------------------------------------------
// 4. Kurtosis sanity.
// --------------------------------------------------------------------------
std::pair<bool, std::string> kurtosis_sanity() {
    Rng rng(404);
    std::vector<double> x(1'000'000);
    for (double& v : x) v = rng.normal();
    const TimeStats normal_stats =
        time_stats(Window(std::move(x), 100.0, Modality::kEcg, "p", "", 0.0));

    const TimeStats const_stats =
        time_stats(Window(std::vector<double>(1000, 3.25), 100.0, Modality::kEcg, "p", "", 0.0));

    char buf[128];
    std::snprintf(buf, sizeof(buf), "normal k=%.4f, constant k=%g (degenerate=%d)",
                  normal_stats.kurtosis, const_stats.kurtosis,
                  const_stats.kurtosis_degenerate ? 1 : 0);
    const bool ok = normal_stats.kurtosis >= 2.9 && normal_stats.kurtosis <= 3.1 &&
                    const_stats.kurtosis == 0.0 && const_stats.kurtosis_degenerate;
    return {ok, buf};
}

// --------------------------------------------------------------------------
// 5. SVM correctness: blobs, XOR, KKT audits.
// --------------------------------------------------------------------------
std::pair<bool, std::string> svm_correctness() {
    Rng rng(505);
    std::vector<std::vector<double>> blobs;
    std::vector<int> blob_labels;
    for (int i = 0; i < 25; ++i) {
        blobs.push_back({rng.normal(3.0, 0.3), rng.normal(3.0, 0.3)});
        blob_labels.push_back(1);
        blobs.push_back({rng.normal(-3.0, 0.3), rng.normal(-3.0, 0.3)});
        blob_labels.push_back(-1);
    }

    TrainConfig cfg;
    std::size_t kkt_violations = 0;

    BinaryDiagnostics diag;
    train_binary(blobs, blob_labels, cfg, KernelSpec{KernelKind::kLinear, 0.0}, &diag);
    const std::size_t blob_errors = diag.training_errors;
    kkt_violations += kkt_audit(blobs, blob_labels, diag.alphas, diag.bias,
                                KernelSpec{KernelKind::kLinear, 0.0}, cfg.c, cfg.c, 1e-3)
                          .violations;

    const std::vector<std::vector<double>> xor_points = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    const std::vector<int> xor_labels = {1, 1, -1, -1};
    TrainConfig xor_cfg;
    xor_cfg.c = 10.0;

    BinaryDiagnostics diag_g;
    const SvmModel gauss =
        train_binary(xor_points, xor_labels, xor_cfg, KernelSpec{KernelKind::kGaussian, 0.0}, &diag_g);
    std::size_t gauss_errors = 0;
    for (std::size_t i = 0; i < xor_points.size(); ++i) {
        const auto pred = predict(gauss, xor_points[i]);
        if ((pred.label == "+1" ? 1 : -1) != xor_labels[i]) ++gauss_errors;
    }
    kkt_violations +=
        kkt_audit(xor_points, xor_labels, diag_g.alphas, diag_g.bias, gauss.kernel, xor_cfg.c,
                  xor_cfg.c, 1e-3)
            .violations;

    BinaryDiagnostics diag_l;
    const SvmModel lin =
        train_binary(xor_points, xor_labels, xor_cfg, KernelSpec{KernelKind::kLinear, 0.0}, &diag_l);
    std::size_t linear_errors = 0;
    for (std::size_t i = 0; i < xor_points.size(); ++i) {
        const auto pred = predict(lin, xor_points[i]);
        if ((pred.label == "+1" ? 1 : -1) != xor_labels[i]) ++linear_errors;
    }
    kkt_violations +=
        kkt_audit(xor_points, xor_labels, diag_l.alphas, diag_l.bias, lin.kernel, xor_cfg.c,
                  xor_cfg.c, 1e-3)
            .violations;

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "blob errors %zu, xor gaussian errors %zu, xor linear errors %zu, KKT violations %zu",
                  blob_errors, gauss_errors, linear_errors, kkt_violations);
    const bool ok =
        blob_errors == 0 && gauss_errors == 0 && linear_errors > 0 && kkt_violations == 0;
    return {ok, buf};
}

// Shared corpus for criteria 6, 7 and 10.
PipelineConfig study_config() {
    PipelineConfig cfg;
    cfg.seed = 606;
    cfg.threads = 0;
    cfg.segment.duration_s = 300.0;
    cfg.split.repeats = 100;
    cfg.synth.modalities = {{Modality::kEcg, 100.0}};
    cfg.synth.duration_s = 1200.0; // 20 minutes -> 4 five-minute windows
    cfg.synth.n_patients_per_class = 5;
    cfg.synth.class_profiles = {
        {"moderate", 60.0, 0.02, 0.05, 0.02, 0.0},
        {"severe", 120.0, 0.08, 0.10, 0.02, 0.0},
    };
    return cfg;
}

// --------------------------------------------------------------------------
// 6. End-to-end synthetic study.
// --------------------------------------------------------------------------
std::pair<bool, std::string> end_to_end_study(EvalReport& report_out, std::size_t& n5_out) {
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineConfig cfg = study_config();
    TempDir tmp("acceptance_e2e");

    const auto manifest = cmd_synth(cfg, tmp.path() / "corpus");
    cmd_extract(cfg, manifest, tmp.path() / "features.csv");
    const FeatureSet features = load_features(tmp.path() / "features.csv");
    n5_out = features.vectors.size();
    if (features.layout.total_dim() != 416) return {false, "expected 416-dim features"};

    cmd_evaluate(cfg, tmp.path() / "features.csv", tmp.path() / "eval");
    report_out = load_report(tmp.path() / "eval" / "report.txt");

    const double elapsed = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu windows, accuracy %.2f%% +/- %.2f, %.1f s", n5_out,
                  100.0 * report_out.mean.accuracy, 100.0 * report_out.stddev.accuracy, elapsed);
    const bool ok = report_out.per_repeat.size() == 100 && report_out.mean.accuracy >= 0.95 &&
                    report_out.stddev.accuracy <= 0.05 && elapsed < 600.0;
    return {ok, buf};
}

// --------------------------------------------------------------------------
// 7. Window-duration sweep.
// --------------------------------------------------------------------------
std::pair<bool, std::string> window_sweep(const EvalReport& report5, std::size_t n5) {
    PipelineConfig cfg = study_config();
    cfg.segment.duration_s = 60.0;
    TempDir tmp("acceptance_sweep");

    const auto manifest = cmd_synth(cfg, tmp.path() / "corpus");
    cmd_extract(cfg, manifest, tmp.path() / "features.csv");
    const FeatureSet features = load_features(tmp.path() / "features.csv");
    cmd_evaluate(cfg, tmp.path() / "features.csv", tmp.path() / "eval");
    const EvalReport report1 = load_report(tmp.path() / "eval" / "report.txt");

    const double acc5 = 100.0 * report5.mean.accuracy;
    const double acc1 = 100.0 * report1.mean.accuracy;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "1-min windows: %zu samples (5-min: %zu), accuracy %.2f%% vs %.2f%%",
                  features.vectors.size(), n5, acc1, acc5);
    const bool ok = features.vectors.size() >= 4 * n5 && std::abs(acc1 - acc5) <= 10.0;
    return {ok, buf};
}

// --------------------------------------------------------------------------
// 8. Benchmark shape.
// --------------------------------------------------------------------------
std::pair<bool, std::string> benchmark_shape() {
    const PipelineConfig cfg = study_config();
    const ClassProfile profile = cfg.synth.class_profiles.front();
    const auto signal = render_waveform(profile, ModalitySpec{Modality::kPpg, 100.0}, 300.0, 808);

    const BenchReport bench = run_feature_benchmark(signal, 100.0, cfg.features, 31);
    double worst_feature = 0.0;
    for (const auto& row : bench.rows) worst_feature = std::max(worst_feature, row.median_ms);

    const ScalingReport sweep = run_scaling_sweep(default_sweep_lengths(), 5, 909);

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "worst feature %.3f ms, extraction %.3f ms, slopes time %.3f freq %.3f",
                  worst_feature, bench.total_ms, sweep.time_domain_slope, sweep.frequency_slope);
    const bool ok = worst_feature <= 50.0 && bench.total_ms <= 250.0 &&
                    std::abs(sweep.time_domain_slope - 1.0) <= 0.15 &&
                    sweep.frequency_slope >= 0.95 && sweep.frequency_slope <= 1.25;
    return {ok, buf};
}

// --------------------------------------------------------------------------
// 9. Metric identities on 1e4 random confusion matrices.
// --------------------------------------------------------------------------
std::pair<bool, std::string> metric_identities() {
    Rng rng(909);
    for (int trial = 0; trial < 10000; ++trial) {
        const long long tp = static_cast<long long>(rng.uniform_int(60));
        const long long tn = static_cast<long long>(rng.uniform_int(60));
        const long long fp = static_cast<long long>(rng.uniform_int(60));
        const long long fn = static_cast<long long>(rng.uniform_int(60));
        if (tp + tn + fp + fn == 0) continue;
        const Metrics m = binary_metrics(tp, tn, fp, fn);
        if (m.accuracy != static_cast<double>(tp + tn) / static_cast<double>(tp + tn + fp + fn)) {
            return {false, "accuracy identity broken"};
        }
        if (m.precision > 0.0 && m.recall > 0.0) {
            if (m.f1 < std::min(m.precision, m.recall) - 1e-12 ||
                m.f1 > std::sqrt(m.precision * m.recall) + 1e-12) {
                return {false, "harmonic-mean bound broken"};
            }
        }

        ConfusionMatrix cm = ConfusionMatrix::zeros({"a", "b"});
        cm.at(0, 0) = tp;
        cm.at(0, 1) = fn;
        cm.at(1, 0) = fp;
        cm.at(1, 1) = tn;
        const Metrics ova = ova_metrics(cm);
        const Metrics ma = binary_metrics(tp, tn, fp, fn);
        const Metrics mb = binary_metrics(tn, tp, fn, fp);
        if (ova.accuracy != (ma.accuracy + mb.accuracy) / 2.0 ||
            ova.precision != (ma.precision + mb.precision) / 2.0 ||
            ova.recall != (ma.recall + mb.recall) / 2.0 ||
            ova.specificity != (ma.specificity + mb.specificity) / 2.0 ||
            ova.f1 != (ma.f1 + mb.f1) / 2.0) {
            return {false, "two-class OVA does not equal the mirrored-binary average"};
        }
    }
    return {true, "10000 matrices checked"};
}

// --------------------------------------------------------------------------
// 10. Fixed-seed determinism of every artifact-producing command.
// --------------------------------------------------------------------------
std::pair<bool, std::string> determinism() {
    PipelineConfig cfg = study_config();
    cfg.synth.duration_s = 600.0; // keep it quick: 2 windows per patient
    cfg.split.repeats = 10;

    TempDir a("acceptance_det_a");
    TempDir b("acceptance_det_b");
    std::vector<std::string> mismatches;

    auto compare = [&](const std::filesystem::path& pa, const std::filesystem::path& pb) {
        if (slurp(pa) != slurp(pb)) mismatches.push_back(pa.filename().string());
    };

    const auto ma = cmd_synth(cfg, a.path() / "corpus");
    const auto mb = cmd_synth(cfg, b.path() / "corpus");
    for (const auto& entry : std::filesystem::directory_iterator(a.path() / "corpus")) {
        compare(entry.path(), b.path() / "corpus" / entry.path().filename());
    }

    cmd_extract(cfg, ma, a.path() / "features.csv");
    cmd_extract(cfg, mb, b.path() / "features.csv");
    compare(a.path() / "features.csv", b.path() / "features.csv");
    compare(a.path() / "features.csv.meta.json", b.path() / "features.csv.meta.json");

    cmd_train(cfg, a.path() / "features.csv", a.path() / "model.txt");
    cmd_train(cfg, b.path() / "features.csv", b.path() / "model.txt");
    compare(a.path() / "model.txt", b.path() / "model.txt");
    compare(a.path() / "model.txt.meta.json", b.path() / "model.txt.meta.json");

    cmd_evaluate(cfg, a.path() / "features.csv", a.path() / "eval");
    cmd_evaluate(cfg, b.path() / "features.csv", b.path() / "eval");
    compare(a.path() / "eval" / "report.txt", b.path() / "eval" / "report.txt");
    compare(a.path() / "eval" / "confusion.csv", b.path() / "eval" / "confusion.csv");
    compare(a.path() / "eval" / "run_meta.json", b.path() / "eval" / "run_meta.json");

    if (mismatches.empty()) return {true, "synth/extract/train/evaluate byte-identical"};
    std::string detail = "mismatched:";
    for (const auto& m : mismatches) detail += " " + m;
    return {false, detail};
}

} // namespace

int main() {
    std::printf("vitalgrade acceptance suite\n");

    run(1, "oracle equivalence (direct DFT + literal loops)", oracle_equivalence);
    run(2, "gradient pooling identities", gradient_identities);
    run(3, "whole-frequency partition property", partition_property);
    run(4, "kurtosis sanity", kurtosis_sanity);
    run(5, "SVM correctness and KKT audit", svm_correctness);

    EvalReport report5;
    std::size_t n5 = 0;
    run(6, "end-to-end synthetic study", [&] { return end_to_end_study(report5, n5); });
    run(7, "window-duration sweep", [&] { return window_sweep(report5, n5); });
    run(8, "benchmark shape and scaling", benchmark_shape);
    run(9, "metric identities", metric_identities);
    run(10, "fixed-seed determinism", determinism);

    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
