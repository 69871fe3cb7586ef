#include "roadval/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace roadval {

using nlohmann::json;

KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "linear") return KernelKind::linear;
    if (s == "sigmoid") return KernelKind::sigmoid;
    if (s == "polynomial") return KernelKind::polynomial;
    if (s == "rbf_gaussian") return KernelKind::rbf_gaussian;
    if (s == "rbf_exponential") return KernelKind::rbf_exponential;
    if (s == "rbf_gaussian_l2") return KernelKind::rbf_gaussian_l2;
    throw std::invalid_argument("unknown kernel kind: " + s);
}

std::string kernel_kind_to_string(KernelKind k) {
    switch (k) {
        case KernelKind::linear: return "linear";
        case KernelKind::sigmoid: return "sigmoid";
        case KernelKind::polynomial: return "polynomial";
        case KernelKind::rbf_gaussian: return "rbf_gaussian";
        case KernelKind::rbf_exponential: return "rbf_exponential";
        case KernelKind::rbf_gaussian_l2: return "rbf_gaussian_l2";
    }
    return "unknown";
}

double kernel_eval(const KernelSpec& spec, std::span<const double> d, std::span<const double> e) {
    if (d.size() != e.size()) throw std::invalid_argument("kernel operands differ in length");
    size_t m = d.size();
    for (size_t i = 0; i < m; ++i) {
        if (!std::isfinite(d[i]) || !std::isfinite(e[i]))
            throw std::invalid_argument("non-finite kernel operand");
    }
    switch (spec.kind) {
        case KernelKind::linear: {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += d[i] * e[i];
            return s;
        }
        case KernelKind::sigmoid: {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += d[i] * e[i];
            return std::tanh(spec.scale * s + spec.offset);
        }
        case KernelKind::polynomial: {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += d[i] * e[i];
            return std::pow(s, spec.degree);
        }
        case KernelKind::rbf_gaussian: {
            // Per-dimension mean of scalar Gaussians.
            double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) {
                double diff = d[i] - e[i];
                s += std::exp(-diff * diff * inv);
            }
            return s / static_cast<double>(m);
        }
        case KernelKind::rbf_exponential: {
            double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += std::exp(-std::abs(d[i] - e[i]) * inv);
            return s / static_cast<double>(m);
        }
        case KernelKind::rbf_gaussian_l2: {
            double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) {
                double diff = d[i] - e[i];
                s += diff * diff;
            }
            return std::exp(-s * inv);
        }
    }
    throw std::invalid_argument("unknown kernel kind");
}

namespace {

constexpr size_t kFullGramLimit = 20000;

// Lazily computed Gram rows: all rows kept when N <= kFullGramLimit, LRU above.
class KernelCache {
public:
    KernelCache(const TrainingSet& data, const KernelSpec& spec)
        : data_(data), spec_(spec), n_(data.size()) {
        rows_.resize(n_);
        if (n_ > kFullGramLimit) {
            max_rows_ = std::max<size_t>(2, (size_t{2} << 30) / (sizeof(double) * n_));
        }
    }

    const std::vector<double>& row(size_t i) {
        if (rows_[i].empty()) {
            rows_[i].resize(n_);
            for (size_t j = 0; j < n_; ++j)
                rows_[i][j] = kernel_eval(spec_, data_.descriptors[i], data_.descriptors[j]);
            if (max_rows_ > 0) {
                lru_.push_back(i);
                if (lru_.size() > max_rows_) {
                    rows_[lru_.front()].clear();
                    rows_[lru_.front()].shrink_to_fit();
                    lru_.pop_front();
                }
            }
        }
        return rows_[i];
    }

private:
    const TrainingSet& data_;
    const KernelSpec& spec_;
    size_t n_;
    size_t max_rows_ = 0;  // 0: unbounded (full Gram)
    std::vector<std::vector<double>> rows_;
    std::list<size_t> lru_;
};

}  // namespace

SvmModel train(const TrainingSet& data, const KernelSpec& spec, const TrainOptions& opts) {
    spec.validate();
    size_t n = data.size();
    if (n == 0 || data.labels.size() != n)
        throw std::invalid_argument("training set empty or labels mismatched");
    bool has_pos = false, has_neg = false;
    for (int y : data.labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw std::invalid_argument("labels must be -1 or +1");
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("training set must contain both classes");

    const double C = opts.box_c;
    const double tol = opts.tol;
    long max_iters = opts.max_iters > 0 ? opts.max_iters : 20000 + 2000 * static_cast<long>(n);

    KernelCache cache(data, spec);
    std::vector<double> lambda(n, 0.0);
    // grad_i of (1/2) lambda' Q lambda - sum(lambda), Q_ij = y_i y_j K_ij
    std::vector<double> grad(n, -1.0);
    const std::vector<int>& y = data.labels;

    auto in_up = [&](size_t i) {
        return (y[i] == 1 && lambda[i] < C - 1e-12) || (y[i] == -1 && lambda[i] > 1e-12);
    };
    auto in_low = [&](size_t i) {
        return (y[i] == -1 && lambda[i] < C - 1e-12) || (y[i] == 1 && lambda[i] > 1e-12);
    };

    double m_up = 0.0, m_low = 0.0;
    long iter = 0;
    for (; iter < max_iters; ++iter) {
        // Maximal violating pair; ties broken by lowest index.
        size_t i1 = n, i2 = n;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < n; ++i) {
            double v = -y[i] * grad[i];
            if (in_up(i) && v > m_up) {
                m_up = v;
                i1 = i;
            }
            if (in_low(i) && v < m_low) {
                m_low = v;
                i2 = i;
            }
        }
        if (i1 == n || i2 == n || m_up - m_low <= tol) break;

        const std::vector<double>& row1 = cache.row(i1);
        const std::vector<double>& row2 = cache.row(i2);
        double e1 = y[i1] * grad[i1];  // decision value minus label, bias-free
        double e2 = y[i2] * grad[i2];
        double eta = row1[i1] + row2[i2] - 2.0 * row1[i2];
        if (eta < 1e-12) eta = 1e-12;

        double a1_old = lambda[i1], a2_old = lambda[i2];
        double L, H;
        if (y[i1] != y[i2]) {
            L = std::max(0.0, a2_old - a1_old);
            H = std::min(C, C + a2_old - a1_old);
        } else {
            L = std::max(0.0, a1_old + a2_old - C);
            H = std::min(C, a1_old + a2_old);
        }
        double a2 = a2_old + y[i2] * (e1 - e2) / eta;
        a2 = std::min(H, std::max(L, a2));
        double a1 = a1_old + y[i1] * y[i2] * (a2_old - a2);
        if (std::abs(a2 - a2_old) < 1e-15) {
            // Degenerate pair; nudge a2 to the better bound to stay deterministic.
            double obj_l = (L - a2_old) * y[i2] * (e2 - e1);
            double obj_h = (H - a2_old) * y[i2] * (e2 - e1);
            a2 = obj_l < obj_h ? L : H;
            a1 = a1_old + y[i1] * y[i2] * (a2_old - a2);
            if (std::abs(a2 - a2_old) < 1e-15) break;
        }
        lambda[i1] = a1;
        lambda[i2] = a2;

        double d1 = (a1 - a1_old) * y[i1];
        double d2 = (a2 - a2_old) * y[i2];
        for (size_t k = 0; k < n; ++k) grad[k] += y[k] * (d1 * row1[k] + d2 * row2[k]);
    }

    if (iter >= max_iters) {
        std::ostringstream os;
        os << "SMO did not converge after " << max_iters
           << " iterations; worst KKT violation = " << (m_up - m_low);
        throw ConvergenceError(os.str(), m_up - m_low);
    }

    // Bias: averaged KKT bias over non-bound support vectors; fall back to the
    // midpoint of the feasible interval when every multiplier is at a bound.
    double bias;
    {
        double sum = 0.0;
        int count = 0;
        for (size_t i = 0; i < n; ++i) {
            if (lambda[i] > 1e-8 && lambda[i] < C - 1e-8) {
                double f_i = y[i] * (grad[i] + 1.0);  // sum_j lambda_j y_j K_ij
                sum += y[i] - f_i;
                ++count;
            }
        }
        if (count > 0) {
            bias = sum / count;
        } else {
            double up = -std::numeric_limits<double>::infinity();
            double low = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < n; ++i) {
                double v = -y[i] * grad[i];
                if (in_up(i)) up = std::max(up, v);
                if (in_low(i)) low = std::min(low, v);
            }
            bias = 0.5 * (up + low);
        }
    }

    SvmModel model;
    model.kernel = spec;
    model.box_c = C;
    model.bias = bias;
    for (size_t i = 0; i < n; ++i) {
        if (lambda[i] > 1e-8) {
            model.support_vectors.push_back(data.descriptors[i]);
            model.multipliers.push_back(lambda[i]);
            model.sv_labels.push_back(y[i]);
        }
    }
    return model;
}

Prediction predict(const SvmModel& model, std::span<const double> d) {
    double score = model.bias;
    for (size_t i = 0; i < model.support_vectors.size(); ++i) {
        score += model.multipliers[i] * model.sv_labels[i] *
                 kernel_eval(model.kernel, d, model.support_vectors[i]);
    }
    return {score, score < 0.0 ? -1 : 1};
}

double dual_objective(const TrainingSet& data, const KernelSpec& spec,
                      const std::vector<double>& lambda) {
    size_t n = data.size();
    double obj = 0.0;
    for (size_t i = 0; i < n; ++i) obj += lambda[i];
    for (size_t i = 0; i < n; ++i) {
        if (lambda[i] == 0.0) continue;
        for (size_t j = 0; j < n; ++j) {
            if (lambda[j] == 0.0) continue;
            obj -= 0.5 * lambda[i] * lambda[j] * data.labels[i] * data.labels[j] *
                   kernel_eval(spec, data.descriptors[i], data.descriptors[j]);
        }
    }
    return obj;
}

void save_model(const SvmModel& model, const std::string& path) {
    json j;
    j["version"] = 1;
    j["kernel"] = json{{"kind", kernel_kind_to_string(model.kernel.kind)},
                       {"sigma", model.kernel.sigma},
                       {"degree", model.kernel.degree},
                       {"scale", model.kernel.scale},
                       {"offset", model.kernel.offset}};
    j["box_c"] = model.box_c;
    j["bias"] = model.bias;
    j["sigma_s"] = model.sigma_s;
    j["color_scale"] = model.color_scale;
    json svs = json::array();
    for (size_t i = 0; i < model.support_vectors.size(); ++i) {
        svs.push_back(json{{"lambda", model.multipliers[i]},
                           {"label", model.sv_labels[i]},
                           {"d", model.support_vectors[i]}});
    }
    j["support_vectors"] = svs;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump(1) << "\n";
}

SvmModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed model file: ") + e.what());
    }
    SvmModel m;
    if (!j.contains("version")) throw std::runtime_error("model file missing `version`");
    m.kernel.kind = kernel_kind_from_string(j.at("kernel").at("kind").get<std::string>());
    m.kernel.sigma = j.at("kernel").at("sigma").get<double>();
    m.kernel.degree = j.at("kernel").at("degree").get<int>();
    m.kernel.scale = j.at("kernel").at("scale").get<double>();
    m.kernel.offset = j.at("kernel").at("offset").get<double>();
    m.box_c = j.at("box_c").get<double>();
    m.bias = j.at("bias").get<double>();
    if (j.contains("sigma_s")) m.sigma_s = j.at("sigma_s").get<double>();
    auto cs = j.at("color_scale").get<std::vector<double>>();
    std::copy(cs.begin(), cs.end(), m.color_scale.begin());
    for (const json& sv : j.at("support_vectors")) {
        m.multipliers.push_back(sv.at("lambda").get<double>());
        m.sv_labels.push_back(sv.at("label").get<int>());
        m.support_vectors.push_back(sv.at("d").get<std::vector<double>>());
    }
    return m;
}

}  // namespace roadval
