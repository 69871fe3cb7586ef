#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roadval {

enum class KernelKind {
    linear,
    sigmoid,
    polynomial,
    rbf_gaussian,     // per-dimension mean of scalar Gaussians
    rbf_exponential,  // per-dimension mean of Laplacian terms
    rbf_gaussian_l2,  // conventional exp(-|d-e|^2 / 2 sigma^2), for comparison
};

struct KernelSpec {
    KernelKind kind = KernelKind::rbf_gaussian;
    double sigma = 0.8;   // RBF kinds
    int degree = 2;       // polynomial
    double scale = 1.0;   // sigmoid
    double offset = 0.0;  // sigmoid

    void validate() const {
        if (sigma <= 0.0) throw std::invalid_argument("kernel sigma must be > 0");
        if (degree < 1) throw std::invalid_argument("kernel degree must be >= 1");
    }
};

KernelKind kernel_kind_from_string(const std::string& s);
std::string kernel_kind_to_string(KernelKind k);

double kernel_eval(const KernelSpec& spec, std::span<const double> d, std::span<const double> e);

struct TrainingSet {
    std::vector<std::vector<double>> descriptors;
    std::vector<int> labels;  // -1 / +1

    size_t size() const { return descriptors.size(); }
};

struct TrainOptions {
    double box_c = 1.0;
    double tol = 1e-3;
    long max_iters = 0;  // 0: 20000 + 2000 * N
};

struct ConvergenceError : std::runtime_error {
    double worst_kkt_violation;
    ConvergenceError(const std::string& msg, double v)
        : std::runtime_error(msg), worst_kkt_violation(v) {}
};

struct SvmModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> multipliers;  // lambda_i in (0, box_c]
    std::vector<int> sv_labels;       // c_i
    double bias = 0.0;
    KernelSpec kernel;
    double box_c = 1.0;
    std::array<double, 9> color_scale{1, 1, 1, 1, 1, 1, 1, 1, 1};
    double sigma_s = 2.8;  // descriptor smoothing the model was trained with
};

SvmModel train(const TrainingSet& data, const KernelSpec& spec, const TrainOptions& opts = {});

// score = sum_i lambda_i c_i k(d, d_i) + b; class = sign(score), 0 mapped to +1.
struct Prediction {
    double score;
    int label;
};
Prediction predict(const SvmModel& model, std::span<const double> d);

// Dual objective W(lambda) for a multiplier assignment on a training set (test support).
double dual_objective(const TrainingSet& data, const KernelSpec& spec,
                      const std::vector<double>& lambda);

void save_model(const SvmModel& model, const std::string& path);
SvmModel load_model(const std::string& path);

}  // namespace roadval
