#include "vitalgrade/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "vitalgrade/errors.hpp"

namespace vitalgrade {

std::string to_string(Modality m) {
    switch (m) {
    case Modality::kEcg: return "ECG";
    case Modality::kPpg: return "PPG";
    case Modality::kIp: return "IP";
    case Modality::kOther: return "OTHER";
    }
    return "OTHER";
}

Modality modality_from_string(std::string_view s) {
    if (s == "ECG") return Modality::kEcg;
    if (s == "PPG") return Modality::kPpg;
    if (s == "IP") return Modality::kIp;
    if (s == "OTHER") return Modality::kOther;
    throw ConfigError("unknown modality '" + std::string(s) +
                      "' (expected ECG, PPG, IP or OTHER)");
}

namespace {

void check_samples_finite(const std::vector<double>& samples, const char* what) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw DataError(std::string(what) + ": non-finite sample at index " +
                            std::to_string(i));
        }
    }
}

} // namespace

Waveform::Waveform(std::vector<double> samples, double fs_hz, Modality modality,
                   std::string patient_id, double start_time_s)
    : samples_(std::move(samples)),
      fs_hz_(fs_hz),
      modality_(modality),
      patient_id_(std::move(patient_id)),
      start_time_s_(start_time_s) {
    if (samples_.empty()) throw DataError("waveform: empty sample sequence");
    if (!(fs_hz_ > 0.0)) throw DataError("waveform: sampling rate must be > 0");
    if (start_time_s_ < 0.0) throw DataError("waveform: start time must be >= 0");
    check_samples_finite(samples_, "waveform");
}

Window::Window(std::vector<double> samples, double fs_hz, Modality modality,
               std::string patient_id, std::string label, double start_time_s)
    : samples_(std::move(samples)),
      fs_hz_(fs_hz),
      modality_(modality),
      patient_id_(std::move(patient_id)),
      label_(std::move(label)),
      start_time_s_(start_time_s) {
    if (samples_.size() < 2) throw DataError("window: needs at least 2 samples");
    if (!(fs_hz_ > 0.0)) throw DataError("window: sampling rate must be > 0");
    check_samples_finite(samples_, "window");
}

Window Window::slice(const Waveform& w, std::size_t offset, std::size_t length,
                     std::string label) {
    if (offset + length > w.size()) {
        throw DataError("window: slice [" + std::to_string(offset) + ", " +
                        std::to_string(offset + length) + ") exceeds waveform of " +
                        std::to_string(w.size()) + " samples");
    }
    std::vector<double> samples(w.samples().begin() + static_cast<std::ptrdiff_t>(offset),
                                w.samples().begin() + static_cast<std::ptrdiff_t>(offset + length));
    return Window(std::move(samples), w.fs(), w.modality(), w.patient_id(),
                  std::move(label), w.start_time_s() + static_cast<double>(offset) / w.fs());
}

std::vector<SeverityLabel> merge_labels(const std::vector<SeverityLabel>& labels,
                                        const std::map<std::string, std::string>& merge_map) {
    std::set<std::string> universe;
    for (const auto& l : labels) universe.insert(l.name);
    for (const auto& [old_name, new_name] : merge_map) {
        (void)new_name;
        if (!universe.count(old_name)) {
            throw ConfigError("label merge: old name '" + old_name +
                              "' does not occur in the dataset");
        }
    }
    std::vector<SeverityLabel> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = merge_map.find(l.name);
        if (it == merge_map.end()) {
            out.push_back(l);
        } else {
            out.push_back(SeverityLabel{it->second, l.ordinal});
        }
    }
    return out;
}

FeatureLayout FeatureLayout::from_entries(std::vector<LayoutEntry> entries) {
    std::size_t next = 0;
    for (const auto& e : entries) {
        if (e.start != next || e.length == 0) {
            throw ConfigError("feature layout: entries must be contiguous from 0 (bad entry " +
                              e.group + "." + e.name + ")");
        }
        next += e.length;
    }
    FeatureLayout layout;
    layout.entries_ = std::move(entries);
    layout.total_dim_ = next;
    return layout;
}

std::vector<std::string> FeatureLayout::column_names() const {
    std::vector<std::string> names;
    names.reserve(total_dim_);
    for (const auto& e : entries_) {
        for (std::size_t k = 0; k < e.length; ++k) {
            std::string name = e.group + "." + e.name;
            if (e.length > 1) name += "_" + std::to_string(k);
            name += "." + std::to_string(e.start + k);
            names.push_back(std::move(name));
        }
    }
    return names;
}

std::string FeatureLayout::serialize() const {
    std::string out;
    bool first = true;
    for (const auto& name : column_names()) {
        if (!first) out += ',';
        out += name;
        first = false;
    }
    return out;
}

FeatureLayout FeatureLayout::parse(std::string_view serialized) {
    std::vector<LayoutEntry> entries;
    std::size_t pos = 0;
    std::size_t index = 0;
    while (pos <= serialized.size()) {
        std::size_t comma = serialized.find(',', pos);
        std::string_view col = serialized.substr(
            pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (col.empty()) throw DataError("feature layout: empty column name");
        // Split from the right: trailing index, then feature name; the group
        // may itself contain dots (modality-prefixed groups).
        std::size_t last_dot = col.rfind('.');
        if (last_dot == std::string_view::npos)
            throw DataError("feature layout: malformed column '" + std::string(col) + "'");
        std::size_t idx = 0;
        for (char c : col.substr(last_dot + 1)) {
            if (c < '0' || c > '9')
                throw DataError("feature layout: malformed column index in '" + std::string(col) + "'");
            idx = idx * 10 + static_cast<std::size_t>(c - '0');
        }
        if (idx != index)
            throw DataError("feature layout: column index out of order in '" + std::string(col) + "'");
        std::string_view rest = col.substr(0, last_dot);
        std::size_t name_dot = rest.rfind('.');
        if (name_dot == std::string_view::npos)
            throw DataError("feature layout: malformed column '" + std::string(col) + "'");
        entries.push_back(LayoutEntry{std::string(rest.substr(0, name_dot)),
                                      std::string(rest.substr(name_dot + 1)), index, 1});
        ++index;
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return from_entries(std::move(entries));
}

std::vector<std::string> FeatureLayout::groups() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) {
        if (out.empty() || out.back() != e.group) out.push_back(e.group);
    }
    return out;
}

std::pair<std::size_t, std::size_t> FeatureLayout::group_range(std::string_view group) const {
    std::size_t first = total_dim_;
    std::size_t last = 0;
    bool seen = false;
    for (const auto& e : entries_) {
        if (e.group == group) {
            if (!seen) first = e.start;
            last = e.start + e.length;
            seen = true;
        }
    }
    if (!seen) throw ConfigError("feature layout: no group named '" + std::string(group) + "'");
    return {first, last};
}

void validate_feature_vector(const FeatureVector& fv, const FeatureLayout& layout) {
    if (fv.values.size() != layout.total_dim()) {
        throw DataError("feature vector for patient '" + fv.patient_id + "' has " +
                        std::to_string(fv.values.size()) + " values, layout expects " +
                        std::to_string(layout.total_dim()));
    }
    for (std::size_t i = 0; i < fv.values.size(); ++i) {
        if (!std::isfinite(fv.values[i])) {
            throw DataError("feature vector for patient '" + fv.patient_id +
                            "': non-finite value at index " + std::to_string(i));
        }
    }
}

} // namespace vitalgrade
