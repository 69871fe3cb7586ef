#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roadval {

struct ConfusionCounts {
    long tp = 0;
    long tn = 0;
    long fp = 0;
    long fn = 0;
};

// Absent optionals mark metrics with a zero denominator.
struct Metrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
};

Metrics metrics(const ConfusionCounts& counts);

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // sorted by fpr, (0,0) .. (1,1)
    double auc = 0.0;
};

// Threshold sweep over distinct scores (descending), ties grouped; trapezoidal AUC.
// Scores are (score, truth) with truth in {-1, +1}. Throws on single-class input.
RocCurve roc(const std::vector<std::pair<double, int>>& scores);

struct Split {
    std::vector<size_t> train_pos, train_neg;
    std::vector<size_t> test_pos, test_neg;
};

// Per split, n_test indices held out per class uniformly without replacement.
// Deterministic under seed.
std::vector<Split> split_protocol(size_t n_pos, size_t n_neg, size_t n_test = 2500,
                                  size_t n_splits = 80, std::uint64_t seed = 0);

void save_roc(const RocCurve& curve, const std::string& path);

}  // namespace roadval
