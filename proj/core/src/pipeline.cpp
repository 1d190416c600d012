#include "vitalgrade/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vitalgrade/digest.hpp"
#include "vitalgrade/errors.hpp"
#include "vitalgrade/io.hpp"
#include "vitalgrade/rng.hpp"
#include "vitalgrade/version.hpp"
#include "parallel.hpp"

namespace vitalgrade {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
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
        if (!ok) throw ConfigError("config: unknown key '" + where + key + "'");
    }
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return obj.at(key).get<double>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) throw ConfigError(std::string("config: '") + key + "' must be a bool");
    return obj.at(key).get<bool>();
}

} // namespace

void PipelineConfig::validate() const {
    filter.validate();
    features.validate();
    train.validate();
    split.validate();
    synth.validate();
    if (modalities.empty()) throw ConfigError("config: modalities must be non-empty");
    if (fuse && modalities.size() < 2) {
        throw ConfigError("config: fusion needs at least two modalities");
    }
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
    std::set<Modality> seen(modalities.begin(), modalities.end());
    if (seen.size() != modalities.size()) throw ConfigError("config: duplicate modality");
}

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    json doc;
    try {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config '" + path.string() + "': not an object");
    reject_unknown(doc,
                   {"seed", "threads", "modalities", "fuse", "filter", "segment", "features",
                    "kernel", "train", "eval", "synth"},
                   "");

    PipelineConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(get_number(doc, "seed", static_cast<double>(cfg.seed)));
    cfg.threads = static_cast<int>(get_number(doc, "threads", cfg.threads));
    cfg.fuse = get_bool(doc, "fuse", cfg.fuse);
    if (doc.contains("modalities")) {
        cfg.modalities.clear();
        for (const auto& m : doc.at("modalities")) {
            cfg.modalities.push_back(modality_from_string(m.get<std::string>()));
        }
    }
    if (doc.contains("filter")) {
        const auto& f = doc.at("filter");
        reject_unknown(f, {"hp_cutoff_hz", "lp_cutoff_hz", "gaussian_sigma_s"}, "filter.");
        cfg.filter.hp_cutoff_hz = get_number(f, "hp_cutoff_hz", cfg.filter.hp_cutoff_hz);
        cfg.filter.lp_cutoff_hz = get_number(f, "lp_cutoff_hz", cfg.filter.lp_cutoff_hz);
        if (f.contains("gaussian_sigma_s")) {
            if (f.at("gaussian_sigma_s").is_string()) {
                if (f.at("gaussian_sigma_s").get<std::string>() != "auto") {
                    throw ConfigError("config: filter.gaussian_sigma_s must be a number or \"auto\"");
                }
            } else {
                cfg.filter.gaussian_sigma_s = f.at("gaussian_sigma_s").get<double>();
            }
        }
    }
    if (doc.contains("segment")) {
        const auto& s = doc.at("segment");
        reject_unknown(s, {"duration_s", "overlap_fraction", "drop_partial"}, "segment.");
        cfg.segment.duration_s = get_number(s, "duration_s", cfg.segment.duration_s);
        cfg.segment.overlap_fraction = get_number(s, "overlap_fraction", cfg.segment.overlap_fraction);
        cfg.segment.drop_partial = get_bool(s, "drop_partial", cfg.segment.drop_partial);
    }
    if (doc.contains("features")) {
        const auto& f = doc.at("features");
        reject_unknown(f, {"n_low", "n_bands", "temporal_resolution", "groups"}, "features.");
        cfg.features.n_low = static_cast<int>(get_number(f, "n_low", cfg.features.n_low));
        cfg.features.n_bands = static_cast<int>(get_number(f, "n_bands", cfg.features.n_bands));
        cfg.features.temporal_resolution =
            static_cast<int>(get_number(f, "temporal_resolution", cfg.features.temporal_resolution));
        if (f.contains("groups")) {
            cfg.features.include_groups.clear();
            for (const auto& g : f.at("groups")) {
                cfg.features.include_groups.insert(feature_group_from_string(g.get<std::string>()));
            }
        }
    }
    if (doc.contains("kernel")) {
        const auto& k = doc.at("kernel");
        reject_unknown(k, {"kind", "gamma"}, "kernel.");
        if (k.contains("kind")) cfg.kernel.kind = kernel_kind_from_string(k.at("kind").get<std::string>());
        if (k.contains("gamma")) {
            if (k.at("gamma").is_string()) {
                if (k.at("gamma").get<std::string>() != "scale") {
                    throw ConfigError("config: kernel.gamma must be a positive number or \"scale\"");
                }
                cfg.kernel.gamma = 0.0;
            } else {
                cfg.kernel.gamma = k.at("gamma").get<double>();
                if (!(cfg.kernel.gamma > 0.0)) {
                    throw ConfigError("config: kernel.gamma must be a positive number or \"scale\"");
                }
            }
        }
    }
    if (doc.contains("train")) {
        const auto& t = doc.at("train");
        reject_unknown(t, {"c", "tolerance", "max_passes", "class_weighting"}, "train.");
        cfg.train.c = get_number(t, "c", cfg.train.c);
        cfg.train.tolerance = get_number(t, "tolerance", cfg.train.tolerance);
        cfg.train.max_passes = static_cast<long>(get_number(t, "max_passes", cfg.train.max_passes));
        cfg.train.class_weighting = get_bool(t, "class_weighting", cfg.train.class_weighting);
    }
    if (doc.contains("eval")) {
        const auto& e = doc.at("eval");
        reject_unknown(e, {"train_frac", "repeats", "split_mode"}, "eval.");
        cfg.split.train_frac = get_number(e, "train_frac", cfg.split.train_frac);
        cfg.split.repeats = static_cast<int>(get_number(e, "repeats", cfg.split.repeats));
        if (e.contains("split_mode")) {
            cfg.split.split_mode = split_mode_from_string(e.at("split_mode").get<std::string>());
        }
    }
    if (doc.contains("synth")) {
        const auto& s = doc.at("synth");
        reject_unknown(s, {"modalities", "duration_s", "n_patients_per_class", "classes", "format"},
                       "synth.");
        cfg.synth.duration_s = get_number(s, "duration_s", cfg.synth.duration_s);
        cfg.synth.n_patients_per_class =
            static_cast<int>(get_number(s, "n_patients_per_class", cfg.synth.n_patients_per_class));
        if (s.contains("format")) {
            cfg.synth.format = wave_format_from_string(s.at("format").get<std::string>());
        }
        if (s.contains("modalities")) {
            cfg.synth.modalities.clear();
            for (const auto& m : s.at("modalities")) {
                reject_unknown(m, {"modality", "fs"}, "synth.modalities.");
                ModalitySpec spec;
                spec.modality = modality_from_string(m.at("modality").get<std::string>());
                spec.fs = m.at("fs").get<double>();
                cfg.synth.modalities.push_back(spec);
            }
        }
        if (s.contains("classes")) {
            cfg.synth.class_profiles.clear();
            for (const auto& c : s.at("classes")) {
                reject_unknown(c,
                               {"label", "base_rate_bpm", "interval_std_s", "amplitude_jitter",
                                "noise_std", "artefact_burst_per_min"},
                               "synth.classes.");
                ClassProfile p;
                p.label = c.at("label").get<std::string>();
                p.base_rate_bpm = get_number(c, "base_rate_bpm", p.base_rate_bpm);
                p.interval_std_s = get_number(c, "interval_std_s", p.interval_std_s);
                p.amplitude_jitter = get_number(c, "amplitude_jitter", p.amplitude_jitter);
                p.noise_std = get_number(c, "noise_std", p.noise_std);
                p.artefact_burst_per_min = get_number(c, "artefact_burst_per_min", p.artefact_burst_per_min);
                cfg.synth.class_profiles.push_back(std::move(p));
            }
        }
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    doc["threads"] = cfg.threads;
    doc["fuse"] = cfg.fuse;
    doc["modalities"] = json::array();
    for (auto m : cfg.modalities) doc["modalities"].push_back(to_string(m));
    doc["filter"]["hp_cutoff_hz"] = cfg.filter.hp_cutoff_hz;
    doc["filter"]["lp_cutoff_hz"] = cfg.filter.lp_cutoff_hz;
    if (cfg.filter.gaussian_sigma_s) {
        doc["filter"]["gaussian_sigma_s"] = *cfg.filter.gaussian_sigma_s;
    } else {
        doc["filter"]["gaussian_sigma_s"] = "auto";
    }
    doc["segment"]["duration_s"] = cfg.segment.duration_s;
    doc["segment"]["overlap_fraction"] = cfg.segment.overlap_fraction;
    doc["segment"]["drop_partial"] = cfg.segment.drop_partial;
    doc["features"]["n_low"] = cfg.features.n_low;
    doc["features"]["n_bands"] = cfg.features.n_bands;
    doc["features"]["temporal_resolution"] = cfg.features.temporal_resolution;
    doc["features"]["groups"] = json::array();
    for (auto g : {FeatureGroup::kTime, FeatureGroup::kGradient, FeatureGroup::kLowFreq,
                   FeatureGroup::kWholeFreq}) {
        if (cfg.features.include_groups.count(g)) doc["features"]["groups"].push_back(to_string(g));
    }
    doc["kernel"]["kind"] = to_string(cfg.kernel.kind);
    if (cfg.kernel.gamma > 0.0) {
        doc["kernel"]["gamma"] = cfg.kernel.gamma;
    } else {
        doc["kernel"]["gamma"] = "scale";
    }
    doc["train"]["c"] = cfg.train.c;
    doc["train"]["tolerance"] = cfg.train.tolerance;
    doc["train"]["max_passes"] = cfg.train.max_passes;
    doc["train"]["class_weighting"] = cfg.train.class_weighting;
    doc["eval"]["train_frac"] = cfg.split.train_frac;
    doc["eval"]["repeats"] = cfg.split.repeats;
    doc["eval"]["split_mode"] = to_string(cfg.split.split_mode);
    doc["synth"]["duration_s"] = cfg.synth.duration_s;
    doc["synth"]["n_patients_per_class"] = cfg.synth.n_patients_per_class;
    doc["synth"]["format"] = to_string(cfg.synth.format);
    doc["synth"]["modalities"] = json::array();
    for (const auto& m : cfg.synth.modalities) {
        doc["synth"]["modalities"].push_back({{"modality", to_string(m.modality)}, {"fs", m.fs}});
    }
    doc["synth"]["classes"] = json::array();
    for (const auto& p : cfg.synth.class_profiles) {
        doc["synth"]["classes"].push_back({{"label", p.label},
                                           {"base_rate_bpm", p.base_rate_bpm},
                                           {"interval_std_s", p.interval_std_s},
                                           {"amplitude_jitter", p.amplitude_jitter},
                                           {"noise_std", p.noise_std},
                                           {"artefact_burst_per_min", p.artefact_burst_per_min}});
    }
    return doc.dump(2);
}

std::string pipeline_config_digest(const PipelineConfig& cfg) {
    return digest_hex(config_to_json(cfg));
}

namespace {

// Removes declared outputs when a command fails partway.
class OutputGuard {
public:
    void track(const std::filesystem::path& p) { outputs_.push_back(p); }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : outputs_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }

private:
    std::vector<std::filesystem::path> outputs_;
    bool committed_ = false;
};

void write_run_metadata(const std::filesystem::path& path, const PipelineConfig& cfg,
                        const std::string& command, const RunNotes& notes) {
    json doc;
    doc["tool"] = "vitalgrade";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["seed"] = cfg.seed;
    doc["threads"] = cfg.threads;
    doc["config_digest"] = pipeline_config_digest(cfg);
    doc["config"] = json::parse(config_to_json(cfg));
    if (!notes.input_digest.empty()) doc["input_digest"] = notes.input_digest;
    doc["notes"]["smoothing_skipped_modalities"] = notes.smoothing_skipped_modalities;
    doc["notes"]["windows_skipped"] = notes.window_diagnostics;
    doc["notes"]["short_window_count"] = notes.short_window_count;
    doc["notes"]["kurtosis_degenerate_count"] = notes.kurtosis_degenerate_count;
    doc["notes"]["waveforms_shorter_than_window"] = notes.empty_waveform_warnings;
    // Interpretation choices surfaced for reproducibility audits.
    doc["notes"]["zero_gradient_counted_positive"] = true;
    doc["notes"]["spectrum_one_sided"] = true;
    doc["notes"]["window_overlap_fraction"] = cfg.segment.overlap_fraction;
    doc["notes"]["sample_split_may_leak_patients"] =
        cfg.split.split_mode == SplitMode::kSample;
    atomic_write(path, doc.dump(2) + "\n");
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return digest_hex(ss.str());
}

} // namespace

std::filesystem::path cmd_synth(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    SynthConfig synth_cfg = cfg.synth;
    synth_cfg.seed = cfg.seed;
    generate(synth_cfg, out_dir);
    RunNotes notes;
    write_run_metadata(out_dir / "run_meta.json", cfg, "synth", notes);
    return out_dir / "manifest.json";
}

namespace {

struct ExtractedDataset {
    FeatureSet features;
    RunNotes notes;
};

ExtractedDataset extract_dataset(const PipelineConfig& cfg,
                                 const std::filesystem::path& manifest_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    RunNotes notes;
    notes.input_digest = file_digest(manifest_path);

    std::map<Modality, std::size_t> modality_rank;
    for (std::size_t i = 0; i < cfg.modalities.size(); ++i) modality_rank[cfg.modalities[i]] = i;

    std::vector<const ManifestRecord*> records;
    for (const auto& r : manifest.records) {
        if (modality_rank.count(r.modality)) records.push_back(&r);
    }
    if (records.empty()) {
        throw DataError("no manifest records match the configured modalities");
    }

    // Stage 1: load/preprocess/segment each record independently.
    struct RecordWindows {
        std::vector<Window> windows;
        bool smoothing_skipped = false;
        bool too_short = false;
    };
    std::vector<RecordWindows> staged(records.size());
    parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
        const ManifestRecord& rec = *records[i];
        const Waveform raw = load_waveform(manifest, rec);
        PreprocessInfo info;
        const Waveform clean = preprocess(raw, cfg.filter, &info);
        SegmentResult segs = segment(clean, cfg.segment, rec.label);
        staged[i].windows = std::move(segs.windows);
        staged[i].smoothing_skipped = info.smoothing_skipped;
        staged[i].too_short = segs.input_shorter_than_window;
    });

    std::set<std::string> skipped_modalities;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (staged[i].smoothing_skipped) skipped_modalities.insert(to_string(records[i]->modality));
        if (staged[i].too_short) ++notes.empty_waveform_warnings;
    }
    notes.smoothing_skipped_modalities.assign(skipped_modalities.begin(), skipped_modalities.end());

    FeatureSet out;
    const FeatureLayout base_layout = make_layout(cfg.features);

    if (!cfg.fuse) {
        // Flatten windows with a deterministic sort key.
        struct Slot {
            const Window* win;
            std::size_t rank;
            std::size_t record_idx;
        };
        std::vector<Slot> slots;
        for (std::size_t i = 0; i < records.size(); ++i) {
            for (const auto& w : staged[i].windows) {
                slots.push_back(Slot{&w, modality_rank.at(records[i]->modality), i});
            }
        }
        std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
            return std::make_tuple(std::cref(a.win->patient_id()), a.win->start_time_s(), a.rank,
                                   a.record_idx) <
                   std::make_tuple(std::cref(b.win->patient_id()), b.win->start_time_s(), b.rank,
                                   b.record_idx);
        });

        std::vector<FeatureVector> vectors(slots.size());
        std::vector<ExtractFlags> flags(slots.size());
        std::vector<std::string> window_errors(slots.size());
        parallel_for(slots.size(), cfg.threads, [&](std::size_t i) {
            // A failing window is skipped with a diagnostic, never zero-filled.
            try {
                vectors[i] = extract(*slots[i].win, cfg.features, &flags[i]);
            } catch (const std::exception& e) {
                window_errors[i] = e.what();
            }
        });
        out.layout = base_layout;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!window_errors[i].empty()) {
                notes.window_diagnostics.push_back(
                    slots[i].win->patient_id() + " @" + std::to_string(slots[i].win->start_time_s()) +
                    "s: " + window_errors[i]);
                continue;
            }
            if (flags[i].kurtosis_degenerate) ++notes.kurtosis_degenerate_count;
            if (flags[i].short_window) ++notes.short_window_count;
            out.vectors.push_back(std::move(vectors[i]));
        }
    } else {
        // Group windows per patient and modality, fuse k-th with k-th.
        std::map<std::string, std::vector<std::vector<Window>>> per_patient; // [rank] -> windows
        for (std::size_t i = 0; i < records.size(); ++i) {
            const std::size_t rank = modality_rank.at(records[i]->modality);
            for (auto& w : staged[i].windows) {
                auto& lists = per_patient[w.patient_id()];
                lists.resize(cfg.modalities.size());
                lists[rank].push_back(w);
            }
        }
        struct FuseJob {
            std::vector<const Window*> parts; // one per modality, in order
        };
        std::vector<FuseJob> jobs;
        for (auto& [patient, lists] : per_patient) {
            (void)patient;
            for (auto& l : lists) {
                std::sort(l.begin(), l.end(), [](const Window& a, const Window& b) {
                    return a.start_time_s() < b.start_time_s();
                });
            }
            std::size_t n_fused = lists[0].size();
            bool missing = false;
            for (const auto& l : lists) {
                n_fused = std::min(n_fused, l.size());
                if (l.empty()) missing = true;
            }
            if (missing) {
                ++notes.empty_waveform_warnings;
                continue;
            }
            for (std::size_t k = 0; k < n_fused; ++k) {
                FuseJob job;
                for (const auto& l : lists) job.parts.push_back(&l[k]);
                jobs.push_back(std::move(job));
            }
        }

        std::vector<ExtractFlags> flags(jobs.size());
        std::vector<std::string> window_errors(jobs.size());
        std::vector<std::vector<FeatureVector>> part_vectors(jobs.size());
        parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
            try {
                auto& parts = part_vectors[i];
                parts.resize(jobs[i].parts.size());
                for (std::size_t m = 0; m < jobs[i].parts.size(); ++m) {
                    ExtractFlags f;
                    parts[m] = extract(*jobs[i].parts[m], cfg.features, &f);
                    flags[i].kurtosis_degenerate |= f.kurtosis_degenerate;
                    flags[i].short_window |= f.short_window;
                }
            } catch (const std::exception& e) {
                window_errors[i] = e.what();
            }
        });
        std::vector<FeatureVector> fused;
        FeatureLayout fused_layout;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (!window_errors[i].empty()) {
                notes.window_diagnostics.push_back(
                    jobs[i].parts[0]->patient_id() + " @" +
                    std::to_string(jobs[i].parts[0]->start_time_s()) + "s: " + window_errors[i]);
                continue;
            }
            std::vector<std::tuple<Modality, FeatureVector, FeatureLayout>> parts;
            for (std::size_t m = 0; m < cfg.modalities.size(); ++m) {
                parts.emplace_back(cfg.modalities[m], std::move(part_vectors[i][m]), base_layout);
            }
            auto [fv, layout] = fuse(parts);
            fused.push_back(std::move(fv));
            fused_layout = std::move(layout);
            if (flags[i].kurtosis_degenerate) ++notes.kurtosis_degenerate_count;
            if (flags[i].short_window) ++notes.short_window_count;
        }
        std::sort(fused.begin(), fused.end(), [](const FeatureVector& a, const FeatureVector& b) {
            return std::tie(a.patient_id, a.window_start_s) < std::tie(b.patient_id, b.window_start_s);
        });
        out.layout = std::move(fused_layout);
        out.vectors = std::move(fused);
    }

    if (out.vectors.empty()) throw DataError("no windows extracted");
    return ExtractedDataset{std::move(out), std::move(notes)};
}

} // namespace

void cmd_extract(const PipelineConfig& cfg, const std::filesystem::path& manifest_path,
                 const std::filesystem::path& out_features) {
    cfg.validate();
    OutputGuard guard;
    guard.track(out_features);
    const auto meta_path = std::filesystem::path(out_features.string() + ".meta.json");
    guard.track(meta_path);

    ExtractedDataset data = extract_dataset(cfg, manifest_path);
    for (const auto& diag : data.notes.window_diagnostics) {
        std::cerr << "warning: window skipped: " << diag << "\n";
    }
    if (data.notes.empty_waveform_warnings > 0) {
        std::cerr << "warning: " << data.notes.empty_waveform_warnings
                  << " waveform(s) shorter than one window\n";
    }
    save_features(data.features, out_features);
    write_run_metadata(meta_path, cfg, "extract", data.notes);
    guard.commit();
}

void cmd_train(const PipelineConfig& cfg, const std::filesystem::path& features_path,
               const std::filesystem::path& out_model) {
    cfg.validate();
    OutputGuard guard;
    guard.track(out_model);
    const auto meta_path = std::filesystem::path(out_model.string() + ".meta.json");
    guard.track(meta_path);

    const FeatureSet data = load_features(features_path);
    if (data.vectors.empty()) throw DataError("training: feature file has no rows");
    std::vector<std::vector<double>> x;
    std::vector<std::string> labels;
    x.reserve(data.vectors.size());
    for (const auto& fv : data.vectors) {
        validate_feature_vector(fv, data.layout);
        if (fv.label.empty()) throw DataError("training: unlabeled feature row");
        x.push_back(fv.values);
        labels.push_back(fv.label);
    }
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;
    const SvmModel model = train_ova(x, labels, train_cfg, cfg.kernel, cfg.threads);
    save_model(model, out_model);

    RunNotes notes;
    notes.input_digest = file_digest(features_path);
    write_run_metadata(meta_path, cfg, "train", notes);
    guard.commit();
}

EvalReport cmd_evaluate(const PipelineConfig& cfg, const std::filesystem::path& features_path,
                        const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    OutputGuard guard;
    const auto report_path = out_dir / "report.txt";
    const auto confusion_path = out_dir / "confusion.csv";
    const auto meta_path = out_dir / "run_meta.json";
    guard.track(report_path);
    guard.track(confusion_path);
    guard.track(meta_path);

    const FeatureSet data = load_features(features_path);
    SplitConfig split_cfg = cfg.split;
    split_cfg.seed = cfg.seed;
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;

    const EvalReport report = repeated_split_eval(data, split_cfg, train_cfg, cfg.kernel,
                                                  cfg.threads, pipeline_config_digest(cfg));
    save_report(report, report_path);
    write_confusion_csv(report, confusion_path);

    RunNotes notes;
    notes.input_digest = file_digest(features_path);
    write_run_metadata(meta_path, cfg, "evaluate", notes);
    guard.commit();
    return report;
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

namespace {

volatile double g_bench_sink = 0.0;

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// One timed sample per rep; fn must feed g_bench_sink itself.
template <typename Fn>
std::pair<double, double> time_reps_ms(Fn&& fn, int reps, int warmup = 3) {
    for (int i = 0; i < warmup; ++i) fn();
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i) {
        const double t0 = now_ms();
        fn();
        times.push_back(now_ms() - t0);
    }
    double mean = 0.0;
    for (double t : times) mean += t;
    mean /= static_cast<double>(times.size());
    return {median_of(times), mean};
}

// For very fast bodies: calibrates an inner batch so one measurement is at
// least ~0.3 ms, then reports per-call medians.
template <typename Fn>
double time_batched_ms(Fn&& fn, int reps) {
    std::size_t batch = 1;
    for (;;) {
        const double t0 = now_ms();
        for (std::size_t i = 0; i < batch; ++i) fn();
        const double elapsed = now_ms() - t0;
        if (elapsed >= 0.3 || batch >= (1u << 20)) break;
        batch *= 2;
    }
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        for (std::size_t i = 0; i < batch; ++i) fn();
        times.push_back((now_ms() - t0) / static_cast<double>(batch));
    }
    return median_of(times);
}

} // namespace

BenchReport run_feature_benchmark(const std::vector<double>& signal, double fs,
                                  const FeatureConfig& cfg, int reps) {
    if (signal.size() < 2) throw DataError("benchmark: signal too short");
    const Window win(signal, fs, Modality::kPpg, "bench", "", 0.0);
    const std::size_t n = signal.size();

    BenchReport report;
    report.signal_length = n;
    report.fs = fs;

    auto add_row = [&](const char* group, const char* name, auto&& fn) {
        const auto [median, mean] = time_reps_ms(fn, reps);
        report.rows.push_back(BenchRow{group, name, median, mean});
    };

    // Each basic statistic timed standalone, matching how the extraction
    // stage is summarized: one row per feature.
    add_row("time", "Mean", [&] {
        double s = 0.0;
        for (double v : signal) s += v;
        g_bench_sink = s / static_cast<double>(n);
    });
    add_row("time", "STD", [&] {
        double s = 0.0;
        for (double v : signal) s += v;
        const double mean = s / static_cast<double>(n);
        double m2 = 0.0;
        for (double v : signal) m2 += (v - mean) * (v - mean);
        g_bench_sink = std::sqrt(m2 / static_cast<double>(n));
    });
    add_row("time", "Zero-crossing", [&] {
        std::size_t c = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if ((signal[i] > 0.0 && signal[i + 1] < 0.0) || (signal[i] < 0.0 && signal[i + 1] > 0.0))
                ++c;
        }
        g_bench_sink = static_cast<double>(c);
    });
    add_row("time", "Minimum", [&] { g_bench_sink = *std::min_element(signal.begin(), signal.end()); });
    add_row("time", "Maximum", [&] { g_bench_sink = *std::max_element(signal.begin(), signal.end()); });
    add_row("time", "Median", [&] { g_bench_sink = median(signal); });
    add_row("time", "Energy", [&] {
        double e = 0.0;
        for (double v : signal) e += v * v;
        g_bench_sink = e;
    });
    add_row("time", "Kurtosis", [&] {
        double s = 0.0;
        for (double v : signal) s += v;
        const double mean = s / static_cast<double>(n);
        double m2 = 0.0, m4 = 0.0;
        for (double v : signal) {
            const double d2 = (v - mean) * (v - mean);
            m2 += d2;
            m4 += d2 * d2;
        }
        g_bench_sink = m2 > 0.0 ? static_cast<double>(n) * m4 / (m2 * m2) : 0.0;
    });
    add_row("time", "Gradient", [&] {
        const auto pooled = gradient_pooling(win, cfg.temporal_resolution);
        g_bench_sink = pooled[0];
    });
    add_row("frequency", "Low Freq.", [&] {
        const auto sp = spectrum(win);
        const auto lf = low_freq_features(sp, cfg.n_low);
        g_bench_sink = lf[0];
    });
    add_row("frequency", "Whole Freq.", [&] {
        const auto sp = spectrum(win);
        const auto wf = whole_freq_features(sp, cfg.n_bands);
        g_bench_sink = wf[0];
    });

    const auto [total_median, total_mean] = time_reps_ms(
        [&] {
            const FeatureVector fv = extract(win, cfg);
            g_bench_sink = fv.values[0];
        },
        reps);
    (void)total_mean;
    report.total_ms = total_median;
    return report;
}

ScalingReport run_scaling_sweep(const std::vector<std::size_t>& lengths, int reps,
                                std::uint64_t seed) {
    if (lengths.size() < 2) throw ConfigError("benchmark: scaling sweep needs >= 2 lengths");
    ScalingReport report;
    FeatureConfig cfg; // defaults

    for (const std::size_t len : lengths) {
        Rng rng(Rng::mix(seed, len));
        std::vector<double> x(len);
        for (double& v : x) v = rng.normal();
        const Window win(std::move(x), 100.0, Modality::kPpg, "sweep", "", 0.0);

        ScalingPoint point;
        point.length = len;
        point.time_domain_ms = time_batched_ms(
            [&] {
                const TimeStats st = time_stats(win);
                const auto pooled = gradient_pooling(win, cfg.temporal_resolution);
                g_bench_sink = st.mean + pooled[0];
            },
            reps);
        point.frequency_ms = time_batched_ms(
            [&] {
                const auto sp = spectrum(win);
                const auto lf = low_freq_features(sp, cfg.n_low);
                const auto wf = whole_freq_features(sp, cfg.n_bands);
                g_bench_sink = lf[0] + wf[0];
            },
            reps);
        report.points.push_back(point);
    }

    auto fit_slope = [&](auto member) {
        const double n = static_cast<double>(report.points.size());
        double sx = 0.0, sy = 0.0;
        for (const auto& p : report.points) {
            sx += std::log(static_cast<double>(p.length));
            sy += std::log(p.*member);
        }
        const double mx = sx / n, my = sy / n;
        double num = 0.0, den = 0.0;
        for (const auto& p : report.points) {
            const double dx = std::log(static_cast<double>(p.length)) - mx;
            num += dx * (std::log(p.*member) - my);
            den += dx * dx;
        }
        return num / den;
    };
    report.time_domain_slope = fit_slope(&ScalingPoint::time_domain_ms);
    report.frequency_slope = fit_slope(&ScalingPoint::frequency_ms);
    return report;
}

std::vector<std::size_t> default_sweep_lengths() {
    std::vector<std::size_t> lengths;
    for (std::size_t l = 1024; l <= (1u << 20); l <<= 1) lengths.push_back(l);
    return lengths;
}

std::string cmd_benchmark(const PipelineConfig& cfg, const std::filesystem::path& out_csv,
                          const std::vector<std::size_t>& sweep_lengths, int reps) {
    cfg.validate();
    // Reference signal: ~5 minutes of PPG-like data at 100 Hz.
    const ClassProfile profile = cfg.synth.class_profiles.front();
    const ModalitySpec spec{Modality::kPpg, 100.0};
    const auto signal = render_waveform(profile, spec, 300.0, Rng::mix(cfg.seed, 0xbe7c));

    const BenchReport bench = run_feature_benchmark(signal, spec.fs, cfg.features, reps);
    const ScalingReport sweep = run_scaling_sweep(sweep_lengths, std::max(3, reps / 10), cfg.seed);

    std::ostringstream text;
    std::ostringstream csv;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "Feature timing on a %.0f s PPG-like signal at %.0f Hz (L=%zu, %d runs)\n",
                  static_cast<double>(bench.signal_length) / bench.fs, bench.fs,
                  bench.signal_length, reps);
    text << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %-14s %12s %12s\n", "group", "feature", "median_ms",
                  "mean_ms");
    text << buf;
    csv << "kind,group,feature,median_ms,mean_ms\n";
    for (const auto& row : bench.rows) {
        std::snprintf(buf, sizeof(buf), "%-10s %-14s %12.4f %12.4f\n", row.group.c_str(),
                      row.name.c_str(), row.median_ms, row.mean_ms);
        text << buf;
        std::snprintf(buf, sizeof(buf), "feature,%s,%s,%.6f,%.6f\n", row.group.c_str(),
                      row.name.c_str(), row.median_ms, row.mean_ms);
        csv << buf;
    }
    std::snprintf(buf, sizeof(buf), "full extraction (all groups): %.4f ms median\n\n",
                  bench.total_ms);
    text << buf;
    std::snprintf(buf, sizeof(buf), "total,,,%.6f,\n", bench.total_ms);
    csv << buf;

    text << "Scaling sweep (median ms per call)\n";
    std::snprintf(buf, sizeof(buf), "%-10s %14s %14s\n", "L", "time_domain", "frequency");
    text << buf;
    for (const auto& p : sweep.points) {
        std::snprintf(buf, sizeof(buf), "%-10zu %14.5f %14.5f\n", p.length, p.time_domain_ms,
                      p.frequency_ms);
        text << buf;
        std::snprintf(buf, sizeof(buf), "scaling,%zu,,%.6f,%.6f\n", p.length, p.time_domain_ms,
                      p.frequency_ms);
        csv << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "fitted log-log slopes: time/gradient %.3f, frequency %.3f\n",
                  sweep.time_domain_slope, sweep.frequency_slope);
    text << buf;
    std::snprintf(buf, sizeof(buf), "slope,time_domain,,%.6f,\nslope,frequency,,%.6f,\n",
                  sweep.time_domain_slope, sweep.frequency_slope);
    csv << buf;

    atomic_write(out_csv, csv.str());
    RunNotes notes;
    write_run_metadata(std::filesystem::path(out_csv.string() + ".meta.json"), cfg, "benchmark",
                       notes);
    return text.str();
}

} // namespace vitalgrade
