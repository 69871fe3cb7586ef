#include "roadval/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace roadval {

Metrics metrics(const ConfusionCounts& c) {
    Metrics m;
    if (c.tp + c.fn > 0) m.sensitivity = static_cast<double>(c.tp) / (c.tp + c.fn);
    if (c.fp + c.tn > 0) m.specificity = static_cast<double>(c.tn) / (c.fp + c.tn);
    long total = c.tp + c.fp + c.tn + c.fn;
    if (total > 0) m.accuracy = static_cast<double>(c.tp + c.tn) / total;
    return m;
}

RocCurve roc(const std::vector<std::pair<double, int>>& scores) {
    long n_pos = 0, n_neg = 0;
    for (const auto& [s, t] : scores) {
        if (t == 1) ++n_pos;
        else if (t == -1) ++n_neg;
        else throw std::invalid_argument("roc truth labels must be -1 or +1");
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc needs both truth classes present");

    std::vector<std::pair<double, int>> sorted = scores;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    long tp = 0, fp = 0;
    size_t i = 0;
    while (i < sorted.size()) {
        double s = sorted[i].first;
        // Group ties at one threshold.
        while (i < sorted.size() && sorted[i].first == s) {
            if (sorted[i].second == 1) ++tp;
            else ++fp;
            ++i;
        }
        curve.points.push_back({s, static_cast<double>(fp) / n_neg,
                                static_cast<double>(tp) / n_pos});
    }

    double auc = 0.0;
    for (size_t k = 1; k < curve.points.size(); ++k) {
        double dx = curve.points[k].fpr - curve.points[k - 1].fpr;
        auc += dx * 0.5 * (curve.points[k].tpr + curve.points[k - 1].tpr);
    }
    curve.auc = auc;
    return curve;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Bounded uniform via rejection; avoids implementation-defined std distributions.
std::uint64_t bounded(std::uint64_t& state, std::uint64_t n) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = splitmix64(state);
    } while (v >= limit);
    return v % n;
}

// First n_test entries of a seeded partial Fisher-Yates shuffle of [0, n).
void sample_class(size_t n, size_t n_test, std::uint64_t& state, std::vector<size_t>& test,
                  std::vector<size_t>& train) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (size_t i = 0; i < n_test; ++i) {
        size_t j = i + static_cast<size_t>(bounded(state, n - i));
        std::swap(idx[i], idx[j]);
    }
    test.assign(idx.begin(), idx.begin() + n_test);
    train.assign(idx.begin() + n_test, idx.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
}

}  // namespace

std::vector<Split> split_protocol(size_t n_pos, size_t n_neg, size_t n_test, size_t n_splits,
                                  std::uint64_t seed) {
    if (n_pos <= n_test || n_neg <= n_test)
        throw std::invalid_argument("each class must be larger than n_test");
    std::vector<Split> splits(n_splits);
    std::uint64_t state = seed ^ 0xA02E90ED4C34B9D1ULL;
    for (size_t s = 0; s < n_splits; ++s) {
        sample_class(n_pos, n_test, state, splits[s].test_pos, splits[s].train_pos);
        sample_class(n_neg, n_test, state, splits[s].test_neg, splits[s].train_neg);
    }
    return splits;
}

void save_roc(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write roc file: " + path);
    out << "# roadval roc v1\n";
    out << "# threshold\tfpr\ttpr\n";
    char buf[128];
    for (const RocPoint& p : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%.17g\n", p.threshold, p.fpr, p.tpr);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "# auc\t%.17g\n", curve.auc);
    out << buf;
}

}  // namespace roadval
