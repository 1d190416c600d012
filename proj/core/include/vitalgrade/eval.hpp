#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vitalgrade/svm.hpp"
#include "vitalgrade/types.hpp"

namespace vitalgrade {

/// Row-major K x K counts; rows are true classes, columns predicted.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<long long> counts;

    static ConfusionMatrix zeros(std::vector<std::string> classes);
    long long& at(std::size_t true_k, std::size_t pred_k);
    long long at(std::size_t true_k, std::size_t pred_k) const;
    long long total() const;
    std::size_t size() const { return classes.size(); }
};

/// Zero-denominator metrics are reported as 0 with the matching flag set,
/// so aggregates always cover the full repeat count.
struct MetricFlags {
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool specificity_undefined = false;

    std::uint32_t bits() const {
        return (precision_undefined ? 1u : 0u) | (recall_undefined ? 2u : 0u) |
               (specificity_undefined ? 4u : 0u);
    }
    static MetricFlags from_bits(std::uint32_t b) {
        return MetricFlags{(b & 1u) != 0, (b & 2u) != 0, (b & 4u) != 0};
    }
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    MetricFlags flags;
};

/// Accuracy, precision, recall, specificity and F1 from binary counts.
Metrics binary_metrics(long long tp, long long tn, long long fp, long long fn);

/// Collapses the matrix to one-vs-all binary counts per class and reports the
/// unweighted (macro) average of the per-class metrics.
Metrics ova_metrics(const ConfusionMatrix& cm);

enum class SplitMode { kSample, kPatient };

std::string to_string(SplitMode m);
SplitMode split_mode_from_string(std::string_view s);

struct SplitConfig {
    double train_frac = 0.8;
    int repeats = 100;
    std::uint64_t seed = 1;
    SplitMode split_mode = SplitMode::kSample;

    void validate() const; // throws ConfigError
};

struct EvalReport {
    std::vector<std::string> classes;
    std::vector<Metrics> per_repeat;
    Metrics mean;
    Metrics stddev; // population std over repeats
    // Row-normalized confusion in percent, averaged over repeats (row-major).
    std::vector<double> confusion_percent;
    std::string config_digest;
    SplitMode split_mode = SplitMode::kSample;
};

/// One train/test split realization: indices into the dataset.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified split for one repeat. SAMPLE mode stratifies by class; PATIENT
/// mode keeps all windows of one patient on the same side (and requires at
/// least 2 patients per class).
Split make_split(const std::vector<FeatureVector>& vectors, const SplitConfig& cfg, int repeat);

/// The repeated holdout harness: per repeat, split, fit normalization and the
/// one-vs-all model on the training side only, evaluate on the held-out side,
/// then aggregate mean and standard deviation across repeats.
EvalReport repeated_split_eval(const FeatureSet& data, const SplitConfig& split_cfg,
                               const TrainConfig& train_cfg, KernelSpec kernel, int threads = 1,
                               std::string config_digest = "");

} // namespace vitalgrade
