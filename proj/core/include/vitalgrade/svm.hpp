#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vitalgrade/types.hpp"

namespace vitalgrade {

enum class KernelKind { kLinear, kGaussian };

std::string to_string(KernelKind k);
KernelKind kernel_kind_from_string(std::string_view s);

struct KernelSpec {
    KernelKind kind = KernelKind::kGaussian;
    // gamma <= 0 requests the scale heuristic 1 / (d * mean feature
    // variance), resolved at training time from the data the kernel sees.
    double gamma = 0.0;
};

struct TrainConfig {
    double c = 1.0;
    double tolerance = 1e-3;
    long max_passes = 100000; // cap on optimization sweeps
    std::uint64_t seed = 1;
    bool class_weighting = false;

    void validate() const; // throws ConfigError
};

/// Per-feature z-score statistics fitted on training data.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stdev;
};

NormStats fit_norm_stats(const std::vector<std::vector<double>>& x);
std::vector<double> apply_norm(const NormStats& stats, std::span<const double> x);

/// One trained binary decision function: f(x) = sum_i coeff_i * K(sv_i, x) + bias
/// with coeff_i = alpha_i * y_i.
struct BinarySvm {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coeffs;
    double bias = 0.0;
};

/// Trained classifier. For one-vs-all multiclass there is one BinarySvm per
/// class (that class positive); a plain binary model has classes {"+1","-1"}
/// and a single BinarySvm.
struct SvmModel {
    KernelSpec kernel; // gamma resolved
    NormStats norm;
    std::vector<std::string> classes;
    std::vector<BinarySvm> binaries;
};

/// Solver output retained for optimality audits; not part of the model.
struct BinaryDiagnostics {
    std::vector<double> alphas;
    double bias = 0.0;
    double sum_alpha_y = 0.0;
    std::size_t training_errors = 0;
    long sweeps = 0;
};

double kernel_eval(std::span<const double> a, std::span<const double> b, const KernelSpec& k);

/// Trains a single binary classifier on +/-1 labels. The caller is expected
/// to have normalized the features already; the returned model carries
/// identity normalization statistics.
SvmModel train_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      const TrainConfig& cfg, KernelSpec kernel,
                      BinaryDiagnostics* diag = nullptr);

/// One-vs-all training: z-score statistics are fitted once on the training
/// set and shared by all per-class binary models. Classes are ordered
/// lexicographically. `threads` > 1 trains the independent per-class
/// problems concurrently.
SvmModel train_ova(const std::vector<std::vector<double>>& x,
                   const std::vector<std::string>& labels, const TrainConfig& cfg,
                   KernelSpec kernel, int threads = 1,
                   std::vector<BinaryDiagnostics>* diag = nullptr);

struct Prediction {
    std::string label;
    std::vector<double> decision_values; // one per class, in model class order
};

/// Normalizes with the stored statistics and takes the argmax class decision
/// value; ties go to the earliest class in model order.
Prediction predict(const SvmModel& model, std::span<const double> x);

/// Karush-Kuhn-Tucker optimality audit of a solved binary problem:
///   alpha = 0      =>  y f >= 1 - tol
///   0 < alpha < C  =>  |y f - 1| <= tol
///   alpha = C      =>  y f <= 1 + tol
/// x must be the (normalized) training matrix the solver saw.
struct KktReport {
    std::size_t violations = 0;
    double worst_violation = 0.0;
};

KktReport kkt_audit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                    const std::vector<double>& alphas, double bias, const KernelSpec& kernel,
                    double c_pos, double c_neg, double tol);

/// Effective per-class box constraints for a binary subproblem.
std::pair<double, double> effective_c(const TrainConfig& cfg, std::size_t n_pos, std::size_t n_neg);

} // namespace vitalgrade
