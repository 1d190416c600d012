#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vitalgrade {

enum class Modality { kEcg, kPpg, kIp, kOther };

std::string to_string(Modality m);
Modality modality_from_string(std::string_view s);

/// A uniformly sampled single-channel recording. Immutable after
/// construction; construction validates that samples are non-empty and
/// finite and that the sampling rate is positive.
class Waveform {
public:
    Waveform(std::vector<double> samples, double fs_hz, Modality modality,
             std::string patient_id, double start_time_s = 0.0);

    const std::vector<double>& samples() const { return samples_; }
    double fs() const { return fs_hz_; }
    Modality modality() const { return modality_; }
    const std::string& patient_id() const { return patient_id_; }
    double start_time_s() const { return start_time_s_; }
    std::size_t size() const { return samples_.size(); }

private:
    std::vector<double> samples_;
    double fs_hz_;
    Modality modality_;
    std::string patient_id_;
    double start_time_s_;
};

/// A contiguous fixed-length slice of a waveform, the unit of feature
/// extraction. Carries provenance (patient, modality, label, start time).
class Window {
public:
    Window(std::vector<double> samples, double fs_hz, Modality modality,
           std::string patient_id, std::string label, double start_time_s);

    /// Copies exactly [offset, offset + length) out of the source waveform.
    static Window slice(const Waveform& w, std::size_t offset, std::size_t length,
                        std::string label);

    const std::vector<double>& samples() const { return samples_; }
    std::size_t length() const { return samples_.size(); }
    double fs() const { return fs_hz_; }
    Modality modality() const { return modality_; }
    const std::string& patient_id() const { return patient_id_; }
    const std::string& label() const { return label_; }
    double start_time_s() const { return start_time_s_; }

private:
    std::vector<double> samples_;
    double fs_hz_;
    Modality modality_;
    std::string patient_id_;
    std::string label_;
    double start_time_s_;
};

/// Severity class label. Names are opaque strings; the optional ordinal
/// carries a dataset-specific rank when one exists.
struct SeverityLabel {
    std::string name;
    std::optional<int> ordinal;

    bool operator==(const SeverityLabel&) const = default;
};

/// Renames labels per the merge map. Every key of the map must occur in the
/// input's label universe; unmapped labels pass through unchanged.
std::vector<SeverityLabel> merge_labels(const std::vector<SeverityLabel>& labels,
                                        const std::map<std::string, std::string>& merge_map);

/// One scalar slot of a feature vector: which group it belongs to, its name
/// within the group, and its index range [start, start + length).
struct LayoutEntry {
    std::string group;
    std::string name;
    std::size_t start = 0;
    std::size_t length = 1;

    bool operator==(const LayoutEntry&) const = default;
};

/// Maps feature vector positions to named features. Entries are contiguous,
/// non-overlapping and cover [0, total_dim). Identical configuration always
/// produces an identical layout, so its serialized form doubles as a schema
/// fingerprint.
class FeatureLayout {
public:
    FeatureLayout() = default;

    /// Validates contiguity/coverage; throws ConfigError on violation.
    static FeatureLayout from_entries(std::vector<LayoutEntry> entries);

    const std::vector<LayoutEntry>& entries() const { return entries_; }
    std::size_t total_dim() const { return total_dim_; }

    /// One name per scalar column, formatted "group.name.index".
    std::vector<std::string> column_names() const;

    /// Canonical serialized form (comma-joined column names).
    std::string serialize() const;

    /// Rebuilds a layout from its serialized form.
    static FeatureLayout parse(std::string_view serialized);

    /// Ordered list of the distinct groups present.
    std::vector<std::string> groups() const;

    /// Index range [first, last) of a group's columns.
    std::pair<std::size_t, std::size_t> group_range(std::string_view group) const;

    bool operator==(const FeatureLayout& other) const {
        return entries_ == other.entries_;
    }

private:
    std::vector<LayoutEntry> entries_;
    std::size_t total_dim_ = 0;
};

/// An extracted feature row plus provenance. `values` has layout.total_dim
/// entries, all finite. The window start time and source sampling rate let
/// downstream fusion check alignment.
struct FeatureVector {
    std::vector<double> values;
    std::string label;        // empty = unlabeled
    std::string patient_id;
    double window_start_s = 0.0;
    double source_fs = 0.0;
};

/// A feature matrix with its layout; the unit moved between pipeline stages.
struct FeatureSet {
    FeatureLayout layout;
    std::vector<FeatureVector> vectors;
};

/// Throws DataError when a vector's dimension or finiteness violates the
/// layout contract.
void validate_feature_vector(const FeatureVector& fv, const FeatureLayout& layout);

} // namespace vitalgrade
