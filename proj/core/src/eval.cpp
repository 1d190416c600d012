#include "vitalgrade/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "vitalgrade/errors.hpp"
#include "vitalgrade/rng.hpp"
#include "parallel.hpp"

namespace vitalgrade {

ConfusionMatrix ConfusionMatrix::zeros(std::vector<std::string> classes) {
    ConfusionMatrix cm;
    cm.counts.assign(classes.size() * classes.size(), 0);
    cm.classes = std::move(classes);
    return cm;
}

long long& ConfusionMatrix::at(std::size_t true_k, std::size_t pred_k) {
    return counts[true_k * classes.size() + pred_k];
}

long long ConfusionMatrix::at(std::size_t true_k, std::size_t pred_k) const {
    return counts[true_k * classes.size() + pred_k];
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (long long v : counts) t += v;
    return t;
}

Metrics binary_metrics(long long tp, long long tn, long long fp, long long fn) {
    if (tp < 0 || tn < 0 || fp < 0 || fn < 0) throw DataError("metrics: negative count");
    const long long total = tp + tn + fp + fn;
    if (total == 0) throw DataError("metrics: all counts are zero");

    Metrics m;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);

    if (tp + fp == 0) {
        m.precision = 0.0;
        m.flags.precision_undefined = true;
    } else {
        m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn == 0) {
        m.recall = 0.0;
        m.flags.recall_undefined = true;
    } else {
        m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (tn + fp == 0) {
        m.specificity = 0.0;
        m.flags.specificity_undefined = true;
    } else {
        m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    }
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

Metrics ova_metrics(const ConfusionMatrix& cm) {
    const std::size_t k = cm.size();
    if (k < 2) throw DataError("ova_metrics: need at least 2 classes");
    const long long total = cm.total();

    Metrics sum;
    MetricFlags any;
    for (std::size_t c = 0; c < k; ++c) {
        long long tp = cm.at(c, c);
        long long row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        const long long fn = row - tp;
        const long long fp = col - tp;
        const long long tn = total - tp - fn - fp;
        const Metrics m = binary_metrics(tp, tn, fp, fn);
        sum.accuracy += m.accuracy;
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.specificity += m.specificity;
        sum.f1 += m.f1;
        any.precision_undefined |= m.flags.precision_undefined;
        any.recall_undefined |= m.flags.recall_undefined;
        any.specificity_undefined |= m.flags.specificity_undefined;
    }
    const double dk = static_cast<double>(k);
    Metrics avg;
    avg.accuracy = sum.accuracy / dk;
    avg.precision = sum.precision / dk;
    avg.recall = sum.recall / dk;
    avg.specificity = sum.specificity / dk;
    avg.f1 = sum.f1 / dk;
    avg.flags = any;
    return avg;
}

std::string to_string(SplitMode m) { return m == SplitMode::kSample ? "sample" : "patient"; }

SplitMode split_mode_from_string(std::string_view s) {
    if (s == "sample") return SplitMode::kSample;
    if (s == "patient") return SplitMode::kPatient;
    throw ConfigError("unknown split mode '" + std::string(s) + "' (expected sample or patient)");
}

void SplitConfig::validate() const {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw ConfigError("eval: train_frac must lie in (0, 1)");
    if (repeats < 1) throw ConfigError("eval: repeats must be >= 1");
}

namespace {

// Ordered class -> member indices map. Deterministic: classes sorted, members
// in dataset order.
std::map<std::string, std::vector<std::size_t>> by_class(const std::vector<FeatureVector>& vectors) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].label.empty())
            throw DataError("eval: unlabeled vector at row " + std::to_string(i));
        groups[vectors[i].label].push_back(i);
    }
    return groups;
}

std::size_t train_count(double frac, std::size_t n) {
    auto k = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
    if (k < 1) k = 1;
    if (k > n - 1) k = n - 1;
    return k;
}

} // namespace

Split make_split(const std::vector<FeatureVector>& vectors, const SplitConfig& cfg, int repeat) {
    cfg.validate();
    auto groups = by_class(vectors);
    if (groups.size() < 2) throw DataError("eval: need at least 2 classes, got " +
                                           std::to_string(groups.size()));
    Rng rng(Rng::mix(cfg.seed, static_cast<std::uint64_t>(repeat)));

    Split split;
    if (cfg.split_mode == SplitMode::kSample) {
        for (auto& [label, members] : groups) {
            if (members.size() < 2) {
                throw DataError("eval: class '" + label + "' has fewer than 2 samples");
            }
            rng.shuffle(members);
            const std::size_t k = train_count(cfg.train_frac, members.size());
            for (std::size_t i = 0; i < members.size(); ++i) {
                (i < k ? split.train : split.test).push_back(members[i]);
            }
        }
    } else {
        for (auto& [label, members] : groups) {
            // Group members by patient, preserving first-seen order.
            std::vector<std::string> patients;
            std::map<std::string, std::vector<std::size_t>> per_patient;
            for (std::size_t idx : members) {
                const auto& pid = vectors[idx].patient_id;
                if (!per_patient.count(pid)) patients.push_back(pid);
                per_patient[pid].push_back(idx);
            }
            if (patients.size() < 2) {
                throw DataError("eval: class '" + label +
                                "' has fewer than 2 patients (patient split mode)");
            }
            std::sort(patients.begin(), patients.end());
            rng.shuffle(patients);
            const std::size_t k = train_count(cfg.train_frac, patients.size());
            for (std::size_t i = 0; i < patients.size(); ++i) {
                auto& side = i < k ? split.train : split.test;
                for (std::size_t idx : per_patient[patients[i]]) side.push_back(idx);
            }
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

EvalReport repeated_split_eval(const FeatureSet& data, const SplitConfig& split_cfg,
                               const TrainConfig& train_cfg, KernelSpec kernel, int threads,
                               std::string config_digest) {
    split_cfg.validate();
    train_cfg.validate();
    for (const auto& fv : data.vectors) validate_feature_vector(fv, data.layout);

    const auto groups = by_class(data.vectors);
    std::vector<std::string> classes;
    for (const auto& [label, members] : groups) {
        (void)members;
        classes.push_back(label);
    }
    if (classes.size() < 2) throw DataError("eval: need at least 2 classes");

    const auto repeats = static_cast<std::size_t>(split_cfg.repeats);
    std::vector<Metrics> per_repeat(repeats);
    std::vector<std::vector<double>> per_repeat_confusion(repeats);

    parallel_for(repeats, threads, [&](std::size_t r) {
        const Split split = make_split(data.vectors, split_cfg, static_cast<int>(r));

        std::vector<std::vector<double>> x_train;
        std::vector<std::string> y_train;
        x_train.reserve(split.train.size());
        for (std::size_t idx : split.train) {
            x_train.push_back(data.vectors[idx].values);
            y_train.push_back(data.vectors[idx].label);
        }
        TrainConfig repeat_cfg = train_cfg;
        repeat_cfg.seed = Rng::mix(train_cfg.seed, r);
        const SvmModel model = train_ova(x_train, y_train, repeat_cfg, kernel, /*threads=*/1);

        ConfusionMatrix cm = ConfusionMatrix::zeros(model.classes);
        std::map<std::string, std::size_t> class_index;
        for (std::size_t k = 0; k < model.classes.size(); ++k) class_index[model.classes[k]] = k;
        for (std::size_t idx : split.test) {
            const auto pred = predict(model, data.vectors[idx].values);
            cm.at(class_index.at(data.vectors[idx].label), class_index.at(pred.label)) += 1;
        }
        per_repeat[r] = ova_metrics(cm);

        // Row-normalized percent matrix for this repeat.
        const std::size_t k = cm.size();
        std::vector<double> percent(k * k, 0.0);
        for (std::size_t row = 0; row < k; ++row) {
            long long row_total = 0;
            for (std::size_t col = 0; col < k; ++col) row_total += cm.at(row, col);
            if (row_total > 0) {
                for (std::size_t col = 0; col < k; ++col) {
                    percent[row * k + col] =
                        100.0 * static_cast<double>(cm.at(row, col)) / static_cast<double>(row_total);
                }
            }
        }
        per_repeat_confusion[r] = std::move(percent);
    });

    EvalReport report;
    report.classes = classes;
    report.per_repeat = std::move(per_repeat);
    report.split_mode = split_cfg.split_mode;
    report.config_digest = std::move(config_digest);

    const double n = static_cast<double>(repeats);
    auto aggregate = [&](auto member) {
        double mean = 0.0;
        for (const auto& m : report.per_repeat) mean += m.*member;
        mean /= n;
        double var = 0.0;
        for (const auto& m : report.per_repeat) {
            const double d = m.*member - mean;
            var += d * d;
        }
        return std::pair<double, double>(mean, std::sqrt(var / n));
    };
    std::tie(report.mean.accuracy, report.stddev.accuracy) = aggregate(&Metrics::accuracy);
    std::tie(report.mean.precision, report.stddev.precision) = aggregate(&Metrics::precision);
    std::tie(report.mean.recall, report.stddev.recall) = aggregate(&Metrics::recall);
    std::tie(report.mean.specificity, report.stddev.specificity) = aggregate(&Metrics::specificity);
    std::tie(report.mean.f1, report.stddev.f1) = aggregate(&Metrics::f1);
    for (const auto& m : report.per_repeat) {
        report.mean.flags.precision_undefined |= m.flags.precision_undefined;
        report.mean.flags.recall_undefined |= m.flags.recall_undefined;
        report.mean.flags.specificity_undefined |= m.flags.specificity_undefined;
    }

    const std::size_t k = classes.size();
    report.confusion_percent.assign(k * k, 0.0);
    for (const auto& percent : per_repeat_confusion) {
        for (std::size_t i = 0; i < k * k; ++i) report.confusion_percent[i] += percent[i];
    }
    for (double& v : report.confusion_percent) v /= n;
    return report;
}

} // namespace vitalgrade
