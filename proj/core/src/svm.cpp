#include "vitalgrade/svm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vitalgrade/errors.hpp"
#include "vitalgrade/rng.hpp"
#include "parallel.hpp"

namespace vitalgrade {

std::string to_string(KernelKind k) {
    return k == KernelKind::kLinear ? "linear" : "gaussian";
}

KernelKind kernel_kind_from_string(std::string_view s) {
    if (s == "linear") return KernelKind::kLinear;
    if (s == "gaussian") return KernelKind::kGaussian;
    throw ConfigError("unknown kernel '" + std::string(s) + "' (expected linear or gaussian)");
}

void TrainConfig::validate() const {
    if (!(c > 0.0)) throw ConfigError("train: C must be > 0");
    if (!(tolerance > 0.0)) throw ConfigError("train: tolerance must be > 0");
    if (max_passes <= 0) throw ConfigError("train: max_passes must be > 0");
}

double kernel_eval(std::span<const double> a, std::span<const double> b, const KernelSpec& k) {
    if (a.size() != b.size()) {
        throw DataError("kernel: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
    }
    if (k.kind == KernelKind::kLinear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        return dot;
    }
    double dist2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        dist2 += d * d;
    }
    return std::exp(-k.gamma * dist2);
}

NormStats fit_norm_stats(const std::vector<std::vector<double>>& x) {
    if (x.empty()) throw TrainError("normalization: empty training set");
    const std::size_t d = x[0].size();
    NormStats stats;
    stats.mean.assign(d, 0.0);
    stats.stdev.assign(d, 0.0);
    for (const auto& row : x) {
        for (std::size_t j = 0; j < d; ++j) stats.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) stats.mean[j] /= static_cast<double>(x.size());
    for (const auto& row : x) {
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = row[j] - stats.mean[j];
            stats.stdev[j] += diff * diff;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        stats.stdev[j] = std::sqrt(stats.stdev[j] / static_cast<double>(x.size()));
    }
    return stats;
}

std::vector<double> apply_norm(const NormStats& stats, std::span<const double> x) {
    if (x.size() != stats.mean.size()) {
        throw DataError("normalization: dimension mismatch (" + std::to_string(x.size()) +
                        " vs " + std::to_string(stats.mean.size()) + ")");
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        // Constant features carry no information; leave them centered.
        const double s = stats.stdev[j] > 0.0 ? stats.stdev[j] : 1.0;
        out[j] = (x[j] - stats.mean[j]) / s;
    }
    return out;
}

std::pair<double, double> effective_c(const TrainConfig& cfg, std::size_t n_pos, std::size_t n_neg) {
    if (!cfg.class_weighting) return {cfg.c, cfg.c};
    const double n = static_cast<double>(n_pos + n_neg);
    return {cfg.c * n / (2.0 * static_cast<double>(n_pos)),
            cfg.c * n / (2.0 * static_cast<double>(n_neg))};
}

namespace {

// Resolves the gamma scale heuristic on the matrix the kernel will see.
KernelSpec resolve_kernel(const std::vector<std::vector<double>>& x, KernelSpec k) {
    if (k.kind != KernelKind::kGaussian || k.gamma > 0.0) return k;
    const std::size_t d = x[0].size();
    double mean_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (const auto& row : x) mean += row[j];
        mean /= static_cast<double>(x.size());
        double var = 0.0;
        for (const auto& row : x) {
            const double diff = row[j] - mean;
            var += diff * diff;
        }
        mean_var += var / static_cast<double>(x.size());
    }
    mean_var /= static_cast<double>(d);
    k.gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var)
                             : 1.0 / static_cast<double>(d);
    return k;
}

// Sequential minimal optimization on the soft-margin dual. Deterministic for
// a fixed seed: the only randomness is the scan start offset when the
// second-choice heuristic fails.
class SmoSolver {
public:
    SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
              double c_pos, double c_neg, const KernelSpec& kernel, double tol,
              long max_passes, std::uint64_t seed)
        : x_(x),
          y_(y),
          c_pos_(c_pos),
          c_neg_(c_neg),
          kernel_(kernel),
          tol_(tol),
          max_passes_(max_passes),
          rng_(seed),
          n_(x.size()) {
        alphas_.assign(n_, 0.0);
        errors_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) errors_[i] = -static_cast<double>(y_[i]);
        if (n_ <= kCacheLimit) {
            cache_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = 0; j <= i; ++j) {
                    const double v = kernel_eval(x_[i], x_[j], kernel_);
                    cache_[i * n_ + j] = v;
                    cache_[j * n_ + i] = v;
                }
            }
        }
    }

    long solve() {
        long sweeps = 0;
        bool examine_all = true;
        std::size_t changed = 1;
        while ((changed > 0 || examine_all) && sweeps < max_passes_) {
            changed = 0;
            if (examine_all) {
                for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
            } else {
                for (std::size_t i = 0; i < n_; ++i) {
                    if (is_free(i)) changed += examine(i);
                }
            }
            if (examine_all) {
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
            ++sweeps;
        }
        return sweeps;
    }

    const std::vector<double>& alphas() const { return alphas_; }
    double bias() const { return bias_; }

    double decision(std::size_t i) const { return errors_[i] + static_cast<double>(y_[i]); }

private:
    static constexpr std::size_t kCacheLimit = 2048;

    double c_of(std::size_t i) const { return y_[i] > 0 ? c_pos_ : c_neg_; }

    bool is_free(std::size_t i) const { return alphas_[i] > 0.0 && alphas_[i] < c_of(i); }

    double kval(std::size_t i, std::size_t j) const {
        if (!cache_.empty()) return cache_[i * n_ + j];
        return kernel_eval(x_[i], x_[j], kernel_);
    }

    std::size_t examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double a2 = alphas_[i2];
        const double e2 = errors_[i2];
        const double r2 = e2 * y2; // y*f - 1
        const bool violated = (r2 < -tol_ && a2 < c_of(i2)) || (r2 > tol_ && a2 > 0.0);
        if (!violated) return 0;

        // Second-choice heuristic: the free point with the largest |E1 - E2|.
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!is_free(i)) continue;
            const double gap = std::abs(errors_[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n_ && take_step(best, i2)) return 1;

        const std::size_t start_free = static_cast<std::size_t>(rng_.uniform_int(n_));
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start_free + k) % n_;
            if (is_free(i1) && take_step(i1, i2)) return 1;
        }
        const std::size_t start_all = static_cast<std::size_t>(rng_.uniform_int(n_));
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start_all + k) % n_;
            if (take_step(i1, i2)) return 1;
        }
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alphas_[i1];
        const double a2 = alphas_[i2];
        const double y1 = y_[i1];
        const double y2 = y_[i2];
        const double e1 = errors_[i1];
        const double e2 = errors_[i2];
        const double s = y1 * y2;
        const double c1 = c_of(i1);
        const double c2 = c_of(i2);

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c2, c1 + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c1);
            hi = std::min(c2, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = kval(i1, i1);
        const double k12 = kval(i1, i2);
        const double k22 = kval(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2_new;
        if (eta > 0.0) {
            a2_new = a2 + y2 * (e1 - e2) / eta;
            a2_new = std::clamp(a2_new, lo, hi);
        } else {
            // Degenerate curvature: evaluate the dual objective at both ends.
            const double f1 = y1 * (e1 + bias_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + bias_) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double obj_lo =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double obj_hi =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - kEps) {
                a2_new = lo;
            } else if (obj_lo > obj_hi + kEps) {
                a2_new = hi;
            } else {
                return false;
            }
        }
        if (std::abs(a2_new - a2) < kEps * (a2_new + a2 + kEps)) return false;

        double a1_new = a1 + s * (a2 - a2_new);
        // Clear sub-epsilon dust so support vectors are exactly at/inside the box.
        if (a1_new < kDust) a1_new = 0.0;
        if (a1_new > c1 - kDust) a1_new = c1;

        const double d1 = y1 * (a1_new - a1);
        const double d2 = y2 * (a2_new - a2);
        const double b1 = bias_ - e1 - d1 * k11 - d2 * k12;
        const double b2 = bias_ - e2 - d1 * k12 - d2 * k22;
        double bias_new;
        if (a1_new > 0.0 && a1_new < c1) {
            bias_new = b1;
        } else if (a2_new > 0.0 && a2_new < c2) {
            bias_new = b2;
        } else {
            bias_new = 0.5 * (b1 + b2);
        }

        const double bias_delta = bias_new - bias_;
        for (std::size_t i = 0; i < n_; ++i) {
            errors_[i] += d1 * kval(i1, i) + d2 * kval(i2, i) + bias_delta;
        }
        bias_ = bias_new;
        alphas_[i1] = a1_new;
        alphas_[i2] = a2_new;
        return true;
    }

    static constexpr double kEps = 1e-12;
    static constexpr double kDust = 1e-12;

    const std::vector<std::vector<double>>& x_;
    const std::vector<int>& y_;
    double c_pos_;
    double c_neg_;
    KernelSpec kernel_;
    double tol_;
    long max_passes_;
    Rng rng_;
    std::size_t n_;
    std::vector<double> alphas_;
    std::vector<double> errors_; // E[i] = f(x_i) - y_i
    std::vector<double> cache_;
    double bias_ = 0.0;
};

void check_matrix(const std::vector<std::vector<double>>& x) {
    if (x.empty()) throw TrainError("training: empty feature matrix");
    const std::size_t d = x[0].size();
    if (d == 0) throw TrainError("training: zero-dimensional features");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != d) {
            throw TrainError("training: ragged feature matrix at row " + std::to_string(i));
        }
        for (double v : x[i]) {
            if (!std::isfinite(v)) {
                throw TrainError("training: non-finite feature in row " + std::to_string(i));
            }
        }
    }
}

BinarySvm solve_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       const TrainConfig& cfg, const KernelSpec& kernel, double c_pos,
                       double c_neg, std::uint64_t seed, BinaryDiagnostics* diag) {
    SmoSolver solver(x, y, c_pos, c_neg, kernel, cfg.tolerance, cfg.max_passes, seed);
    const long sweeps = solver.solve();

    BinarySvm model;
    model.bias = solver.bias();
    double sum_alpha_y = 0.0;
    std::size_t training_errors = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = solver.alphas()[i];
        sum_alpha_y += a * static_cast<double>(y[i]);
        if (solver.decision(i) * static_cast<double>(y[i]) <= 0.0) ++training_errors;
        if (a > 0.0) {
            model.support_vectors.push_back(x[i]);
            model.dual_coeffs.push_back(a * static_cast<double>(y[i]));
        }
    }
    if (diag) {
        diag->alphas = solver.alphas();
        diag->bias = solver.bias();
        diag->sum_alpha_y = sum_alpha_y;
        diag->training_errors = training_errors;
        diag->sweeps = sweeps;
    }
    return model;
}

double binary_decision(const BinarySvm& bin, const KernelSpec& kernel,
                       std::span<const double> x) {
    double f = bin.bias;
    for (std::size_t i = 0; i < bin.support_vectors.size(); ++i) {
        f += bin.dual_coeffs[i] * kernel_eval(bin.support_vectors[i], x, kernel);
    }
    return f;
}

} // namespace

SvmModel train_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      const TrainConfig& cfg, KernelSpec kernel, BinaryDiagnostics* diag) {
    cfg.validate();
    check_matrix(x);
    if (y.size() != x.size()) throw TrainError("training: label count does not match rows");
    std::size_t n_pos = 0, n_neg = 0;
    for (int v : y) {
        if (v == 1) ++n_pos;
        else if (v == -1) ++n_neg;
        else throw TrainError("training: labels must be +1 or -1");
    }
    if (n_pos == 0 || n_neg == 0) {
        throw TrainError("training: need at least one example of each sign");
    }

    SvmModel model;
    model.kernel = resolve_kernel(x, kernel);
    model.norm.mean.assign(x[0].size(), 0.0);
    model.norm.stdev.assign(x[0].size(), 1.0);
    model.classes = {"+1", "-1"};
    const auto [c_pos, c_neg] = effective_c(cfg, n_pos, n_neg);
    model.binaries.push_back(solve_binary(x, y, cfg, model.kernel, c_pos, c_neg, cfg.seed, diag));
    return model;
}

SvmModel train_ova(const std::vector<std::vector<double>>& x,
                   const std::vector<std::string>& labels, const TrainConfig& cfg,
                   KernelSpec kernel, int threads, std::vector<BinaryDiagnostics>* diag) {
    cfg.validate();
    check_matrix(x);
    if (labels.size() != x.size()) throw TrainError("training: label count does not match rows");

    std::set<std::string> class_set(labels.begin(), labels.end());
    if (class_set.size() < 2) throw TrainError("training: need at least 2 classes");

    SvmModel model;
    model.classes.assign(class_set.begin(), class_set.end());
    model.norm = fit_norm_stats(x);

    std::vector<std::vector<double>> normalized;
    normalized.reserve(x.size());
    for (const auto& row : x) normalized.push_back(apply_norm(model.norm, row));

    model.kernel = resolve_kernel(normalized, kernel);
    model.binaries.resize(model.classes.size());
    if (diag) diag->resize(model.classes.size());

    parallel_for(model.classes.size(), threads, [&](std::size_t k) {
        const std::string& cls = model.classes[k];
        std::vector<int> y(labels.size());
        std::size_t n_pos = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            y[i] = labels[i] == cls ? 1 : -1;
            if (y[i] == 1) ++n_pos;
        }
        const auto [c_pos, c_neg] = effective_c(cfg, n_pos, labels.size() - n_pos);
        // Every per-class solver uses the same seed: mirrored two-class
        // problems then follow exactly mirrored trajectories, so their
        // decision functions are exact negations of each other.
        model.binaries[k] = solve_binary(normalized, y, cfg, model.kernel, c_pos, c_neg,
                                         cfg.seed, diag ? &(*diag)[k] : nullptr);
    });
    return model;
}

Prediction predict(const SvmModel& model, std::span<const double> x) {
    if (model.binaries.empty()) throw DataError("predict: model has no trained classifiers");
    const auto normalized = apply_norm(model.norm, x);

    Prediction pred;
    if (model.binaries.size() == 1) {
        const double f = binary_decision(model.binaries[0], model.kernel, normalized);
        pred.decision_values = {f, -f};
    } else {
        pred.decision_values.reserve(model.binaries.size());
        for (const auto& bin : model.binaries) {
            pred.decision_values.push_back(binary_decision(bin, model.kernel, normalized));
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < pred.decision_values.size(); ++k) {
        if (pred.decision_values[k] > pred.decision_values[best]) best = k;
    }
    pred.label = model.classes[best];
    return pred;
}

KktReport kkt_audit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                    const std::vector<double>& alphas, double bias, const KernelSpec& kernel,
                    double c_pos, double c_neg, double tol) {
    KktReport report;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = bias;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (alphas[j] == 0.0) continue;
            f += alphas[j] * static_cast<double>(y[j]) * kernel_eval(x[j], x[i], kernel);
        }
        const double margin = static_cast<double>(y[i]) * f;
        const double c = y[i] > 0 ? c_pos : c_neg;
        double violation = 0.0;
        if (alphas[i] <= 0.0) {
            violation = std::max(0.0, (1.0 - tol) - margin);
        } else if (alphas[i] >= c) {
            violation = std::max(0.0, margin - (1.0 + tol));
        } else {
            violation = std::max(0.0, std::abs(margin - 1.0) - tol);
        }
        if (violation > 0.0) ++report.violations;
        report.worst_violation = std::max(report.worst_violation, violation);
    }
    return report;
}

} // namespace vitalgrade
