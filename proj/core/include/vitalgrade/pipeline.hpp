#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vitalgrade/eval.hpp"
#include "vitalgrade/features.hpp"
#include "vitalgrade/preprocess.hpp"
#include "vitalgrade/segment.hpp"
#include "vitalgrade/svm.hpp"
#include "vitalgrade/synth.hpp"
#include "vitalgrade/types.hpp"

namespace vitalgrade {

/// The single declarative configuration driving every command. Defaults are
/// the pipeline's reference settings; a config file overrides fields and CLI
/// flags override the file. Unknown keys are rejected.
struct PipelineConfig {
    std::uint64_t seed = 1;
    int threads = 0; // 0 = hardware concurrency
    std::vector<Modality> modalities = {Modality::kEcg};
    bool fuse = false;
    FilterConfig filter;
    SegmentConfig segment;
    FeatureConfig features;
    KernelSpec kernel;
    TrainConfig train;
    SplitConfig split;
    SynthConfig synth;

    void validate() const;
};

PipelineConfig default_config();

/// Parses a config file (strict: unknown keys are errors) on top of defaults.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Canonical serialized form of the effective config.
std::string config_to_json(const PipelineConfig& cfg);

/// Digest of the canonical form; recorded in reports and run metadata.
std::string pipeline_config_digest(const PipelineConfig& cfg);

/// Flags accumulated while running a command; recorded in run metadata.
struct RunNotes {
    std::vector<std::string> smoothing_skipped_modalities;
    std::vector<std::string> window_diagnostics; // skipped windows, one line each
    std::size_t short_window_count = 0;
    std::size_t kurtosis_degenerate_count = 0;
    std::size_t empty_waveform_warnings = 0;
    std::string input_digest;
};

/// Generates a corpus into out_dir (waveform files + manifest.json) and
/// writes run metadata. Returns the manifest path.
std::filesystem::path cmd_synth(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// Full extraction: load manifest, preprocess, segment, extract (and fuse
/// when configured), write the feature file + run metadata.
void cmd_extract(const PipelineConfig& cfg, const std::filesystem::path& manifest_path,
                 const std::filesystem::path& out_features);

/// Trains a one-vs-all model on a feature file and writes the model file.
void cmd_train(const PipelineConfig& cfg, const std::filesystem::path& features_path,
               const std::filesystem::path& out_model);

/// Repeated-split evaluation; writes report.txt, confusion.csv and run
/// metadata into out_dir. Returns the report for display.
EvalReport cmd_evaluate(const PipelineConfig& cfg, const std::filesystem::path& features_path,
                        const std::filesystem::path& out_dir);

// --------------------------------------------------------------------------
// Benchmark surface
// --------------------------------------------------------------------------

struct BenchRow {
    std::string group;
    std::string name;
    double median_ms = 0.0;
    double mean_ms = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    double total_ms = 0.0; // median wall time of one full extraction
    std::size_t signal_length = 0;
    double fs = 0.0;
};

/// Times each feature on one signal: the eight statistics individually, the
/// pooled gradient features, and the two frequency groups (each including its
/// transform). reps timed runs follow a short warmup; medians are reported.
BenchReport run_feature_benchmark(const std::vector<double>& signal, double fs,
                                  const FeatureConfig& cfg, int reps);

struct ScalingPoint {
    std::size_t length = 0;
    double time_domain_ms = 0.0;
    double frequency_ms = 0.0;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    double time_domain_slope = 0.0; // log-log fit
    double frequency_slope = 0.0;
};

/// Times the time-domain group and the frequency group across signal lengths
/// and fits log-log slopes.
ScalingReport run_scaling_sweep(const std::vector<std::size_t>& lengths, int reps,
                                std::uint64_t seed);

/// Renders a benchmark table (rows like the feature timing summary) plus the
/// scaling sweep, writes them as CSV to out_csv, and returns the text table.
std::string cmd_benchmark(const PipelineConfig& cfg, const std::filesystem::path& out_csv,
                          const std::vector<std::size_t>& sweep_lengths, int reps);

/// Default sweep lengths: powers of two from 2^10 to 2^20.
std::vector<std::size_t> default_sweep_lengths();

} // namespace vitalgrade
