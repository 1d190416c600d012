#include "vitalgrade/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vitalgrade/errors.hpp"

namespace vitalgrade {

namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw DataError("io: failed to format number");
    return std::string(buf, ptr);
}

double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        throw DataError(where + ": not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string(what) + ": cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw DataError(where + ": unknown key '" + key + "'");
    }
}

} // namespace

std::string to_string(WaveFormat f) { return f == WaveFormat::kCsv ? "csv" : "raw_f64le"; }

WaveFormat wave_format_from_string(std::string_view s) {
    if (s == "csv") return WaveFormat::kCsv;
    if (s == "raw_f64le") return WaveFormat::kRawF64le;
    throw ConfigError("unknown waveform format '" + std::string(s) +
                      "' (expected csv or raw_f64le)");
}

std::filesystem::path DatasetManifest::resolve(const ManifestRecord& r) const {
    std::filesystem::path p(r.path);
    if (p.is_absolute()) return p;
    return base_dir / p;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("io: cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("io: short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

DatasetManifest load_manifest(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path, "manifest"));
    } catch (const json::parse_error& e) {
        throw DataError("manifest '" + path.string() + "': " + e.what());
    }
    if (!doc.is_object()) throw DataError("manifest '" + path.string() + "': not an object");
    reject_unknown_keys(doc, {"version", "description", "format", "label_merge", "records"},
                        "manifest");

    DatasetManifest m;
    m.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    m.description = doc.value("description", "");
    m.format = wave_format_from_string(doc.value("format", "raw_f64le"));
    if (doc.contains("label_merge")) {
        for (const auto& [k, v] : doc.at("label_merge").items()) {
            m.label_merge[k] = v.get<std::string>();
        }
    }
    if (!doc.contains("records") || !doc.at("records").is_array() || doc.at("records").empty()) {
        throw DataError("manifest '" + path.string() + "': empty manifest");
    }

    std::set<std::tuple<std::string, std::string, std::string>> seen;
    std::size_t index = 0;
    for (const auto& rec : doc.at("records")) {
        const std::string where = "manifest record " + std::to_string(index);
        if (!rec.is_object()) throw DataError(where + ": not an object");
        reject_unknown_keys(rec, {"path", "modality", "fs", "patient_id", "label", "channel"},
                            where);
        ManifestRecord r;
        try {
            r.path = rec.at("path").get<std::string>();
            r.modality = modality_from_string(rec.at("modality").get<std::string>());
            r.fs = rec.at("fs").get<double>();
            r.patient_id = rec.at("patient_id").get<std::string>();
            r.label = rec.at("label").get<std::string>();
            r.channel = rec.value("channel", 0);
        } catch (const json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        if (!(r.fs > 0.0)) {
            throw DataError(where + " (patient '" + r.patient_id +
                            "'): sampling rate must be > 0");
        }
        if (r.channel < 0) throw DataError(where + ": channel must be >= 0");
        if (!seen.insert({r.patient_id, to_string(r.modality), r.path}).second) {
            throw DataError(where + ": duplicate (patient, modality, path) triple");
        }
        if (!std::filesystem::exists(m.resolve(r))) {
            throw DataError(where + ": file not found: '" + m.resolve(r).string() + "'");
        }
        m.records.push_back(std::move(r));
        ++index;
    }

    // Validate the merge map against the label universe, then apply it.
    std::vector<SeverityLabel> labels;
    labels.reserve(m.records.size());
    for (const auto& r : m.records) labels.push_back(SeverityLabel{r.label, std::nullopt});
    const auto merged = merge_labels(labels, m.label_merge);
    for (std::size_t i = 0; i < m.records.size(); ++i) m.records[i].label = merged[i].name;
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    json doc;
    doc["version"] = 1;
    doc["description"] = manifest.description;
    doc["format"] = to_string(manifest.format);
    doc["label_merge"] = json::object();
    for (const auto& [k, v] : manifest.label_merge) doc["label_merge"][k] = v;
    doc["records"] = json::array();
    for (const auto& r : manifest.records) {
        json rec;
        rec["path"] = r.path;
        rec["modality"] = to_string(r.modality);
        rec["fs"] = r.fs;
        rec["patient_id"] = r.patient_id;
        rec["label"] = r.label;
        rec["channel"] = r.channel;
        doc["records"].push_back(std::move(rec));
    }
    atomic_write(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Waveforms
// ---------------------------------------------------------------------------

namespace {

std::vector<double> load_csv_samples(const std::filesystem::path& path, int channel) {
    const std::string text = read_file(path, "waveform");
    std::vector<double> samples;
    double prev_ts = 0.0;
    bool have_prev_ts = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        // Strip comments and surrounding whitespace.
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        if (line.empty()) continue;

        // Columns split on comma, or whitespace when no comma is present.
        std::vector<std::string_view> cols;
        if (line.find(',') != std::string_view::npos) {
            cols = split(line, ',');
        } else {
            std::size_t i = 0;
            while (i < line.size()) {
                while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
                std::size_t j = i;
                while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
                if (j > i) cols.push_back(line.substr(i, j - i));
                i = j;
            }
        }
        if (cols.empty()) continue;

        const std::string where = "waveform '" + path.string() + "' line " + std::to_string(line_no);
        std::size_t amp_col;
        if (cols.size() == 1) {
            if (channel != 0) throw DataError(where + ": no channel " + std::to_string(channel));
            amp_col = 0;
        } else {
            // First column is a timestamp; validate monotonicity but ignore it
            // otherwise (amplitudes are taken as uniformly sampled).
            const double ts = parse_double(cols[0], where);
            if (have_prev_ts && !(ts > prev_ts)) {
                throw DataError(where + ": non-monotonic timestamp");
            }
            prev_ts = ts;
            have_prev_ts = true;
            amp_col = 1 + static_cast<std::size_t>(channel);
            if (amp_col >= cols.size()) {
                throw DataError(where + ": no channel " + std::to_string(channel));
            }
        }
        const double v = parse_double(cols[amp_col], where);
        if (!std::isfinite(v)) {
            throw DataError(where + ": non-finite sample at index " +
                            std::to_string(samples.size()));
        }
        samples.push_back(v);
    }
    return samples;
}

std::vector<double> load_raw_samples(const std::filesystem::path& path) {
    const std::string bytes = read_file(path, "waveform");
    if (bytes.size() % 8 != 0) {
        throw DataError("waveform '" + path.string() + "': truncated file (" +
                        std::to_string(bytes.size()) + " bytes is not a multiple of 8)");
    }
    std::vector<double> samples(bytes.size() / 8);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::uint64_t u = 0;
        for (std::size_t b = 0; b < 8; ++b) {
            u |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
        }
        const double v = std::bit_cast<double>(u);
        if (!std::isfinite(v)) {
            throw DataError("waveform '" + path.string() + "': non-finite sample at index " +
                            std::to_string(i));
        }
        samples[i] = v;
    }
    return samples;
}

} // namespace

Waveform load_waveform(const DatasetManifest& manifest, const ManifestRecord& record) {
    const auto path = manifest.resolve(record);
    std::vector<double> samples = manifest.format == WaveFormat::kCsv
                                      ? load_csv_samples(path, record.channel)
                                      : load_raw_samples(path);
    if (samples.empty()) throw DataError("waveform '" + path.string() + "': no samples");
    return Waveform(std::move(samples), record.fs, record.modality, record.patient_id, 0.0);
}

void save_waveform_csv(const std::vector<double>& samples, const std::filesystem::path& path) {
    std::string out;
    out.reserve(samples.size() * 12);
    for (double v : samples) {
        out += format_double(v);
        out += '\n';
    }
    atomic_write(path, out);
}

void save_waveform_raw(const std::vector<double>& samples, const std::filesystem::path& path) {
    std::string out(samples.size() * 8, '\0');
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto u = std::bit_cast<std::uint64_t>(samples[i]);
        for (std::size_t b = 0; b < 8; ++b) {
            out[i * 8 + b] = static_cast<char>((u >> (8 * b)) & 0xff);
        }
    }
    atomic_write(path, out);
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

void save_features(const FeatureSet& features, const std::filesystem::path& path) {
    for (const auto& fv : features.vectors) {
        validate_feature_vector(fv, features.layout);
        if (fv.patient_id.find(',') != std::string::npos ||
            fv.label.find(',') != std::string::npos) {
            throw DataError("features: patient ids and labels must not contain commas");
        }
    }
    std::string out = "# vitalgrade features v1\n";
    out += "patient_id,label,window_start_s,source_fs";
    const std::string header = features.layout.serialize();
    if (!header.empty()) {
        out += ',';
        out += header;
    }
    out += '\n';
    for (const auto& fv : features.vectors) {
        out += fv.patient_id;
        out += ',';
        out += fv.label;
        out += ',';
        out += format_double(fv.window_start_s);
        out += ',';
        out += format_double(fv.source_fs);
        for (double v : fv.values) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    atomic_write(path, out);
}

FeatureSet load_features(const std::filesystem::path& path) {
    const std::string text = read_file(path, "features");
    FeatureSet set;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const std::string where = "features '" + path.string() + "' line " + std::to_string(line_no);
        const auto cols = split(line, ',');
        if (!have_header) {
            if (cols.size() < 4 || cols[0] != "patient_id" || cols[1] != "label" ||
                cols[2] != "window_start_s" || cols[3] != "source_fs") {
                throw DataError(where + ": malformed header");
            }
            std::string layout_part;
            for (std::size_t i = 4; i < cols.size(); ++i) {
                if (i > 4) layout_part += ',';
                layout_part += std::string(cols[i]);
            }
            set.layout = layout_part.empty() ? FeatureLayout() : FeatureLayout::parse(layout_part);
            have_header = true;
            continue;
        }
        if (cols.size() != 4 + set.layout.total_dim()) {
            throw DataError(where + ": expected " + std::to_string(4 + set.layout.total_dim()) +
                            " fields, got " + std::to_string(cols.size()));
        }
        FeatureVector fv;
        fv.patient_id = std::string(cols[0]);
        fv.label = std::string(cols[1]);
        fv.window_start_s = parse_double(cols[2], where);
        fv.source_fs = parse_double(cols[3], where);
        fv.values.reserve(set.layout.total_dim());
        for (std::size_t i = 4; i < cols.size(); ++i) fv.values.push_back(parse_double(cols[i], where));
        validate_feature_vector(fv, set.layout);
        set.vectors.push_back(std::move(fv));
    }
    if (!have_header) throw DataError("features '" + path.string() + "': missing header");
    return set;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

namespace {

void append_values(std::string& out, const std::vector<double>& values) {
    for (double v : values) {
        out += ' ';
        out += format_double(v);
    }
    out += '\n';
}

std::vector<double> parse_values(const std::vector<std::string_view>& tokens, std::size_t from,
                                 const std::string& where) {
    std::vector<double> out;
    out.reserve(tokens.size() - from);
    for (std::size_t i = from; i < tokens.size(); ++i) {
        out.push_back(parse_double(tokens[i], where));
    }
    return out;
}

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

struct LineReader {
    std::string text;
    std::size_t pos = 0;
    std::size_t line_no = 0;

    bool next(std::string_view& line) {
        while (pos < text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string::npos) eol = text.size();
            line = std::string_view(text.data() + pos, eol - pos);
            pos = eol + 1;
            ++line_no;
            if (!line.empty()) return true;
        }
        return false;
    }

    std::string_view expect(const std::string& what) {
        std::string_view line;
        if (!next(line)) throw DataError(what + ": unexpected end of file");
        return line;
    }
};

} // namespace

void save_model(const SvmModel& model, const std::filesystem::path& path) {
    std::string out = "vitalgrade model v1\n";
    out += "kernel " + to_string(model.kernel.kind) + "\n";
    out += "gamma " + format_double(model.kernel.gamma) + "\n";
    out += "dim " + std::to_string(model.norm.mean.size()) + "\n";
    out += "classes " + std::to_string(model.classes.size()) + "\n";
    for (const auto& c : model.classes) out += "class " + c + "\n";
    out += "norm_mean";
    append_values(out, model.norm.mean);
    out += "norm_std";
    append_values(out, model.norm.stdev);
    out += "binaries " + std::to_string(model.binaries.size()) + "\n";
    for (const auto& bin : model.binaries) {
        out += "binary nsv " + std::to_string(bin.support_vectors.size()) + " bias " +
               format_double(bin.bias) + "\n";
        for (std::size_t i = 0; i < bin.support_vectors.size(); ++i) {
            out += "sv " + format_double(bin.dual_coeffs[i]);
            append_values(out, bin.support_vectors[i]);
        }
    }
    out += "end\n";
    atomic_write(path, out);
}

SvmModel load_model(const std::filesystem::path& path) {
    LineReader reader{read_file(path, "model")};
    const std::string where = "model '" + path.string() + "'";
    if (reader.expect(where) != "vitalgrade model v1") {
        throw DataError(where + ": unsupported header/version");
    }
    SvmModel model;
    auto tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "kernel") throw DataError(where + ": expected kernel");
    model.kernel.kind = kernel_kind_from_string(tokens[1]);
    tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "gamma") throw DataError(where + ": expected gamma");
    model.kernel.gamma = parse_double(tokens[1], where);
    tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "dim") throw DataError(where + ": expected dim");
    const auto dim = static_cast<std::size_t>(parse_double(tokens[1], where));
    tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "classes") throw DataError(where + ": expected classes");
    const auto n_classes = static_cast<std::size_t>(parse_double(tokens[1], where));
    for (std::size_t i = 0; i < n_classes; ++i) {
        const auto line = reader.expect(where);
        if (!line.starts_with("class ")) throw DataError(where + ": expected class line");
        model.classes.emplace_back(line.substr(6));
    }
    tokens = tokenize(reader.expect(where));
    if (tokens.empty() || tokens[0] != "norm_mean") throw DataError(where + ": expected norm_mean");
    model.norm.mean = parse_values(tokens, 1, where);
    tokens = tokenize(reader.expect(where));
    if (tokens.empty() || tokens[0] != "norm_std") throw DataError(where + ": expected norm_std");
    model.norm.stdev = parse_values(tokens, 1, where);
    if (model.norm.mean.size() != dim || model.norm.stdev.size() != dim) {
        throw DataError(where + ": normalization dimension mismatch");
    }
    tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "binaries") throw DataError(where + ": expected binaries");
    const auto n_bin = static_cast<std::size_t>(parse_double(tokens[1], where));
    for (std::size_t b = 0; b < n_bin; ++b) {
        tokens = tokenize(reader.expect(where));
        if (tokens.size() != 5 || tokens[0] != "binary" || tokens[1] != "nsv" || tokens[3] != "bias") {
            throw DataError(where + ": expected binary header");
        }
        BinarySvm bin;
        const auto nsv = static_cast<std::size_t>(parse_double(tokens[2], where));
        bin.bias = parse_double(tokens[4], where);
        for (std::size_t i = 0; i < nsv; ++i) {
            tokens = tokenize(reader.expect(where));
            if (tokens.size() != 2 + dim || tokens[0] != "sv") {
                throw DataError(where + ": malformed support vector line");
            }
            bin.dual_coeffs.push_back(parse_double(tokens[1], where));
            bin.support_vectors.push_back(parse_values(tokens, 2, where));
        }
        model.binaries.push_back(std::move(bin));
    }
    if (reader.expect(where) != "end") throw DataError(where + ": missing end marker");
    return model;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

void save_report(const EvalReport& report, const std::filesystem::path& path) {
    std::string out = "vitalgrade report v1\n";
    out += "config_digest " + report.config_digest + "\n";
    out += "split_mode " + to_string(report.split_mode) + "\n";
    out += "classes " + std::to_string(report.classes.size()) + "\n";
    for (const auto& c : report.classes) out += "class " + c + "\n";
    out += "repeats " + std::to_string(report.per_repeat.size()) + "\n";
    auto metric_line = [&](const char* name, double mean, double stddev) {
        out += std::string("aggregate ") + name + " mean " + format_double(mean) + " std " +
               format_double(stddev) + "\n";
    };
    metric_line("accuracy", report.mean.accuracy, report.stddev.accuracy);
    metric_line("precision", report.mean.precision, report.stddev.precision);
    metric_line("recall", report.mean.recall, report.stddev.recall);
    metric_line("specificity", report.mean.specificity, report.stddev.specificity);
    metric_line("f1", report.mean.f1, report.stddev.f1);
    out += "confusion_percent";
    append_values(out, report.confusion_percent);
    for (const auto& m : report.per_repeat) {
        out += "repeat " + format_double(m.accuracy) + " " + format_double(m.precision) + " " +
               format_double(m.recall) + " " + format_double(m.specificity) + " " +
               format_double(m.f1) + " " + std::to_string(m.flags.bits()) + "\n";
    }
    out += "end\n";
    atomic_write(path, out);
}

EvalReport load_report(const std::filesystem::path& path) {
    LineReader reader{read_file(path, "report")};
    const std::string where = "report '" + path.string() + "'";
    if (reader.expect(where) != "vitalgrade report v1") {
        throw DataError(where + ": unsupported header/version");
    }
    EvalReport report;
    auto tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "config_digest")
        throw DataError(where + ": expected config_digest");
    report.config_digest = std::string(tokens[1]);
    tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "split_mode")
        throw DataError(where + ": expected split_mode");
    report.split_mode = split_mode_from_string(tokens[1]);
    tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "classes") throw DataError(where + ": expected classes");
    const auto n_classes = static_cast<std::size_t>(parse_double(tokens[1], where));
    for (std::size_t i = 0; i < n_classes; ++i) {
        const auto line = reader.expect(where);
        if (!line.starts_with("class ")) throw DataError(where + ": expected class line");
        report.classes.emplace_back(line.substr(6));
    }
    tokens = tokenize(reader.expect(where));
    if (tokens.size() != 2 || tokens[0] != "repeats") throw DataError(where + ": expected repeats");
    const auto n_repeats = static_cast<std::size_t>(parse_double(tokens[1], where));

    auto metric_line = [&](const char* name, double& mean, double& stddev) {
        const auto t = tokenize(reader.expect(where));
        if (t.size() != 6 || t[0] != "aggregate" || t[1] != name || t[2] != "mean" || t[4] != "std") {
            throw DataError(where + ": expected aggregate " + std::string(name));
        }
        mean = parse_double(t[3], where);
        stddev = parse_double(t[5], where);
    };
    metric_line("accuracy", report.mean.accuracy, report.stddev.accuracy);
    metric_line("precision", report.mean.precision, report.stddev.precision);
    metric_line("recall", report.mean.recall, report.stddev.recall);
    metric_line("specificity", report.mean.specificity, report.stddev.specificity);
    metric_line("f1", report.mean.f1, report.stddev.f1);

    tokens = tokenize(reader.expect(where));
    if (tokens.empty() || tokens[0] != "confusion_percent")
        throw DataError(where + ": expected confusion_percent");
    report.confusion_percent = parse_values(tokens, 1, where);
    if (report.confusion_percent.size() != n_classes * n_classes) {
        throw DataError(where + ": confusion matrix size mismatch");
    }

    for (std::size_t r = 0; r < n_repeats; ++r) {
        tokens = tokenize(reader.expect(where));
        if (tokens.size() != 7 || tokens[0] != "repeat")
            throw DataError(where + ": expected repeat line");
        Metrics m;
        m.accuracy = parse_double(tokens[1], where);
        m.precision = parse_double(tokens[2], where);
        m.recall = parse_double(tokens[3], where);
        m.specificity = parse_double(tokens[4], where);
        m.f1 = parse_double(tokens[5], where);
        m.flags = MetricFlags::from_bits(
            static_cast<std::uint32_t>(parse_double(tokens[6], where)));
        report.per_repeat.push_back(m);
        report.mean.flags.precision_undefined |= m.flags.precision_undefined;
        report.mean.flags.recall_undefined |= m.flags.recall_undefined;
        report.mean.flags.specificity_undefined |= m.flags.specificity_undefined;
    }
    if (reader.expect(where) != "end") throw DataError(where + ": missing end marker");
    return report;
}

void write_confusion_csv(const EvalReport& report, const std::filesystem::path& path) {
    const std::size_t k = report.classes.size();
    std::string out = "true\\pred";
    for (const auto& c : report.classes) out += "," + c;
    out += '\n';
    char buf[32];
    for (std::size_t i = 0; i < k; ++i) {
        out += report.classes[i];
        for (std::size_t j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof(buf), "%.2f", report.confusion_percent[i * k + j]);
            out += ',';
            out += buf;
        }
        out += '\n';
    }
    atomic_write(path, out);
}

} // namespace vitalgrade
