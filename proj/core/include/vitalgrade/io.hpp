#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vitalgrade/eval.hpp"
#include "vitalgrade/svm.hpp"
#include "vitalgrade/types.hpp"

namespace vitalgrade {

enum class WaveFormat { kCsv, kRawF64le };

std::string to_string(WaveFormat f);
WaveFormat wave_format_from_string(std::string_view s);

struct ManifestRecord {
    std::string path; // relative to the manifest's directory unless absolute
    Modality modality = Modality::kEcg;
    double fs = 0.0;
    std::string patient_id;
    std::string label;
    int channel = 0;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;
    WaveFormat format = WaveFormat::kRawF64le;
    std::map<std::string, std::string> label_merge;
    std::string description;
    std::filesystem::path base_dir; // set on load; not serialized

    std::filesystem::path resolve(const ManifestRecord& r) const;
};

/// Loads and validates a manifest: every referenced file must exist, rates
/// must be positive, (patient, modality, path) triples unique, and the
/// label-merge map must only rename labels that occur. Record labels are
/// returned with the merge applied.
DatasetManifest load_manifest(const std::filesystem::path& path);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Decodes one record's file. CSV: one amplitude per line, optional leading
/// timestamp column (validated strictly increasing), '#' comments.
/// RAW_F64LE: contiguous little-endian IEEE-754 doubles.
Waveform load_waveform(const DatasetManifest& manifest, const ManifestRecord& record);

void save_waveform_csv(const std::vector<double>& samples, const std::filesystem::path& path);
void save_waveform_raw(const std::vector<double>& samples, const std::filesystem::path& path);

/// Columnar text format with a self-describing header; numeric values are
/// written in shortest round-trip form, so load(save(x)) is bit-exact.
void save_features(const FeatureSet& features, const std::filesystem::path& path);
FeatureSet load_features(const std::filesystem::path& path);

/// Versioned structured text; bit-exact round-trip.
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

/// Versioned structured text; bit-exact round-trip.
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

/// Presentational row-normalized confusion matrix in percent (2 decimals).
void write_confusion_csv(const EvalReport& report, const std::filesystem::path& path);

/// Writes via a temp file in the same directory plus an atomic rename.
void atomic_write(const std::filesystem::path& path, const std::string& content);

} // namespace vitalgrade
