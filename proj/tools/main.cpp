// vitalgrade: severity classification from physiological waveforms.
//
// Subcommands: synth, extract, train, evaluate, benchmark. All commands read
// one declarative config file; flags override file values. Exit codes:
// 0 success, 2 config error, 3 data error, 4 training error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vitalgrade/errors.hpp"
#include "vitalgrade/pipeline.hpp"
#include "vitalgrade/version.hpp"

namespace {

using vitalgrade::PipelineConfig;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> split_mode;
    std::optional<double> window_s;
    std::optional<std::string> groups;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "pipeline config file (JSON)");
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--threads", flags.threads, "worker threads (0 = auto)");
    cmd->add_option("--split-mode", flags.split_mode, "evaluation split mode: sample or patient");
    cmd->add_option("--window-s", flags.window_s, "window duration override in seconds");
    cmd->add_option("--groups", flags.groups,
                    "comma list of feature groups (time,gradient,lowfreq,wholefreq)");
}

PipelineConfig effective_config(const CommonFlags& flags) {
    PipelineConfig cfg = flags.config_path.empty()
                             ? vitalgrade::default_config()
                             : vitalgrade::load_pipeline_config(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.threads) cfg.threads = *flags.threads;
    if (flags.split_mode) cfg.split.split_mode = vitalgrade::split_mode_from_string(*flags.split_mode);
    if (flags.window_s) cfg.segment.duration_s = *flags.window_s;
    if (flags.groups) {
        cfg.features.include_groups.clear();
        std::string rest = *flags.groups;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string part = rest.substr(0, comma);
            if (!part.empty()) {
                cfg.features.include_groups.insert(vitalgrade::feature_group_from_string(part));
            }
            if (comma == std::string::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vitalgrade: waveform severity classification toolkit"};
    app.set_version_flag("--version", std::string(vitalgrade::kVersion));
    app.require_subcommand(1);

    CommonFlags flags;
    std::string out;
    std::string manifest_path;
    std::string features_path;
    std::string sizes_csv;
    int bench_reps = 50;

    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    add_common_flags(synth, flags);
    synth->add_option("--out", out, "output directory")->required();

    auto* extract = app.add_subcommand("extract", "extract features from a manifest");
    add_common_flags(extract, flags);
    extract->add_option("--manifest", manifest_path, "dataset manifest")->required();
    extract->add_option("--out", out, "output feature file")->required();

    auto* train = app.add_subcommand("train", "train a one-vs-all SVM on a feature file");
    add_common_flags(train, flags);
    train->add_option("--features", features_path, "feature file")->required();
    train->add_option("--out", out, "output model file")->required();

    auto* evaluate = app.add_subcommand("evaluate", "repeated-split evaluation of a feature file");
    add_common_flags(evaluate, flags);
    evaluate->add_option("--features", features_path, "feature file")->required();
    evaluate->add_option("--out", out, "output directory")->required();

    auto* benchmark = app.add_subcommand("benchmark", "feature timing table and scaling sweep");
    add_common_flags(benchmark, flags);
    benchmark->add_option("--out", out, "output CSV path")->required();
    benchmark->add_option("--sizes", sizes_csv, "comma list of sweep lengths (default 2^10..2^20)");
    benchmark->add_option("--reps", bench_reps, "timed runs per feature (default 50)");

    CLI11_PARSE(app, argc, argv);

    try {
        const PipelineConfig cfg = effective_config(flags);
        if (synth->parsed()) {
            const auto manifest = vitalgrade::cmd_synth(cfg, out);
            std::cout << manifest.string() << "\n";
        } else if (extract->parsed()) {
            vitalgrade::cmd_extract(cfg, manifest_path, out);
            std::cout << out << "\n";
        } else if (train->parsed()) {
            vitalgrade::cmd_train(cfg, features_path, out);
            std::cout << out << "\n";
        } else if (evaluate->parsed()) {
            const auto report = vitalgrade::cmd_evaluate(cfg, features_path, out);
            char line[128];
            auto print = [&](const char* name, double mean, double std) {
                std::snprintf(line, sizeof(line), "%-12s %6.2f%% +/- %.2f\n", name, 100.0 * mean,
                              100.0 * std);
                std::cout << line;
            };
            print("accuracy", report.mean.accuracy, report.stddev.accuracy);
            print("precision", report.mean.precision, report.stddev.precision);
            print("recall", report.mean.recall, report.stddev.recall);
            print("specificity", report.mean.specificity, report.stddev.specificity);
            print("f1", report.mean.f1, report.stddev.f1);
            std::cout << (std::filesystem::path(out) / "report.txt").string() << "\n";
        } else if (benchmark->parsed()) {
            std::vector<std::size_t> lengths;
            if (sizes_csv.empty()) {
                lengths = vitalgrade::default_sweep_lengths();
            } else {
                std::string rest = sizes_csv;
                while (!rest.empty()) {
                    const auto comma = rest.find(',');
                    lengths.push_back(static_cast<std::size_t>(std::stoull(rest.substr(0, comma))));
                    if (comma == std::string::npos) break;
                    rest = rest.substr(comma + 1);
                }
            }
            std::cout << vitalgrade::cmd_benchmark(cfg, out, lengths, bench_reps);
        }
    } catch (const vitalgrade::ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
        return 2;
    } catch (const vitalgrade::DataError& e) {
        std::cerr << "error[data]: " << e.what() << "\n";
        return 3;
    } catch (const vitalgrade::TrainError& e) {
        std::cerr << "error[train]: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
