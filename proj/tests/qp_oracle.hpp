#pragma once

#include <cmath>
#include <vector>

#include "roadval/svm.hpp"

namespace testutil {

// Independent dual-QP solver: projected gradient ascent on
//   W(l) = sum l_i - 1/2 sum_ij l_i l_j c_i c_j K_ij
// over the feasible set {0 <= l_i <= C, sum l_i c_i = 0}. The projection onto
// box-intersect-hyperplane is exact via bisection on the Lagrange shift.
struct QpOracle {
    std::vector<double> lambda;
    double objective = 0.0;
};

inline std::vector<double> project_feasible(std::vector<double> v, const std::vector<int>& c,
                                            double box_c) {
    auto constraint = [&](double nu) {
        double s = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            double x = std::clamp(v[i] + nu * c[i], 0.0, box_c);
            s += x * c[i];
        }
        return s;
    };
    double lo = -1.0, hi = 1.0;
    double span = box_c;
    for (double x : v) span = std::max(span, std::abs(x));
    lo = -(span + box_c + 1.0);
    hi = span + box_c + 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (constraint(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    double nu = 0.5 * (lo + hi);
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i] + nu * c[i], 0.0, box_c);
    return v;
}

inline QpOracle solve_dual_oracle(const roadval::TrainingSet& data,
                                  const roadval::KernelSpec& spec, double box_c,
                                  int iters = 30000) {
    size_t n = data.size();
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    double row_norm = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < n; ++j) {
            q[i][j] = data.labels[i] * data.labels[j] *
                      roadval::kernel_eval(spec, data.descriptors[i], data.descriptors[j]);
            s += std::abs(q[i][j]);
        }
        row_norm = std::max(row_norm, s);
    }
    double step = 1.0 / std::max(row_norm, 1e-9);

    // FISTA (accelerated projected ascent) with adaptive restart.
    std::vector<double> l(n, 0.0), y = project_feasible(l, data.labels, box_c);
    l = y;
    double t = 1.0;
    int stall = 0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> g(n, 1.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) g[i] -= q[i][j] * y[j];
        std::vector<double> next(n);
        for (size_t i = 0; i < n; ++i) next[i] = y[i] + step * g[i];
        next = project_feasible(std::move(next), data.labels, box_c);
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        // restart when momentum points against ascent
        double restart = 0.0;
        for (size_t i = 0; i < n; ++i) restart += (y[i] - next[i]) * (next[i] - l[i]);
        if (restart > 0.0) {
            t_next = 1.0;
            y = next;
        } else {
            for (size_t i = 0; i < n; ++i)
                y[i] = next[i] + ((t - 1.0) / t_next) * (next[i] - l[i]);
            y = project_feasible(std::move(y), data.labels, box_c);
        }
        double moved = 0.0;
        for (size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(next[i] - l[i]));
        l = std::move(next);
        t = t_next;
        // fixed point of the projected step: exit once the iterate stops moving
        stall = moved < 1e-14 ? stall + 1 : 0;
        if (stall >= 25) break;
    }

    QpOracle out;
    out.lambda = l;
    double obj = 0.0;
    for (size_t i = 0; i < n; ++i) {
        obj += l[i];
        for (size_t j = 0; j < n; ++j) obj -= 0.5 * l[i] * l[j] * q[i][j];
    }
    out.objective = obj;
    return out;
}

}  // namespace testutil
