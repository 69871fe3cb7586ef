#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "roadval/evaluation.hpp"

using namespace roadval;

namespace {

// Mann-Whitney statistic: fraction of (pos, neg) pairs where the positive
// outranks the negative, ties counted half.
double mann_whitney_auc(const std::vector<std::pair<double, int>>& scores) {
    double wins = 0.0;
    long n_pos = 0, n_neg = 0;
    for (const auto& [sp, tp] : scores) {
        if (tp != 1) continue;
        ++n_pos;
        for (const auto& [sn, tn] : scores) {
            if (tn != -1) continue;
            if (sp > sn)
                wins += 1.0;
            else if (sp == sn)
                wins += 0.5;
        }
    }
    for (const auto& [s, t] : scores)
        if (t == -1) ++n_neg;
    return wins / (static_cast<double>(n_pos) * n_neg);
}

std::vector<std::pair<double, int>> random_scores(std::uint64_t seed, int n) {
    testutil::Rng rng(seed);
    std::vector<std::pair<double, int>> out;
    for (int i = 0; i < n; ++i) {
        int label = rng.uniform() < 0.5 ? 1 : -1;
        // coarse quantization to force score ties
        double s = std::round(rng.uniform(-2, 2) * 4.0) / 4.0 + (label == 1 ? 0.3 : 0.0);
        out.push_back({s, label});
    }
    return out;
}

}  // namespace

TEST_CASE("reference confusion counts give exact metrics") {
    Metrics m = metrics({.tp = 89, .tn = 71, .fp = 29, .fn = 11});
    REQUIRE(m.sensitivity.has_value());
    REQUIRE(m.specificity.has_value());
    REQUIRE(m.accuracy.has_value());
    CHECK(*m.sensitivity == 0.89);
    CHECK(*m.specificity == 0.71);
    CHECK(*m.accuracy == 0.80);
}

TEST_CASE("all-correct counts give all ones") {
    Metrics m = metrics({.tp = 10, .tn = 20, .fp = 0, .fn = 0});
    CHECK(*m.sensitivity == 1.0);
    CHECK(*m.specificity == 1.0);
    CHECK(*m.accuracy == 1.0);
}

TEST_CASE("one of everything gives one-half everywhere") {
    Metrics m = metrics({.tp = 1, .tn = 1, .fp = 1, .fn = 1});
    CHECK(*m.sensitivity == 0.5);
    CHECK(*m.specificity == 0.5);
    CHECK(*m.accuracy == 0.5);
}

TEST_CASE("zero denominators leave metrics absent") {
    Metrics m = metrics({.tp = 0, .tn = 0, .fp = 0, .fn = 0});
    CHECK_FALSE(m.sensitivity.has_value());
    CHECK_FALSE(m.specificity.has_value());
    CHECK_FALSE(m.accuracy.has_value());
    Metrics pos_only = metrics({.tp = 3, .tn = 0, .fp = 0, .fn = 1});
    CHECK(pos_only.sensitivity.has_value());
    CHECK_FALSE(pos_only.specificity.has_value());
    CHECK(pos_only.accuracy.has_value());
}

TEST_CASE("perfectly separated scores give AUC 1") {
    std::vector<std::pair<double, int>> scores;
    for (int i = 0; i < 20; ++i) scores.push_back({1.0 + 0.01 * i, 1});
    for (int i = 0; i < 20; ++i) scores.push_back({-1.0 - 0.01 * i, -1});
    RocCurve c = roc(scores);
    CHECK(c.auc == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.points.front().fpr == 0.0);
    CHECK(c.points.front().tpr == 0.0);
    CHECK(c.points.back().fpr == 1.0);
    CHECK(c.points.back().tpr == 1.0);
}

TEST_CASE("identical scores for both classes give AUC one-half") {
    std::vector<std::pair<double, int>> scores;
    for (int i = 0; i < 15; ++i) {
        scores.push_back({0.25, 1});
        scores.push_back({0.25, -1});
    }
    RocCurve c = roc(scores);
    CHECK(c.auc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("AUC matches the Mann-Whitney statistic") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
        auto scores = random_scores(seed, 120);
        RocCurve c = roc(scores);
        CHECK(c.auc == doctest::Approx(mann_whitney_auc(scores)).epsilon(1e-12));
    }
}

TEST_CASE("AUC is invariant to monotone score transforms") {
    auto scores = random_scores(42, 150);
    auto warped = scores;
    for (auto& [s, t] : warped) s = std::atan(3.0 * s) + 5.0;
    CHECK(roc(scores).auc == doctest::Approx(roc(warped).auc).epsilon(1e-12));
}

TEST_CASE("duplicating every sample leaves the curve unchanged") {
    auto scores = random_scores(7, 80);
    auto doubled = scores;
    doubled.insert(doubled.end(), scores.begin(), scores.end());
    RocCurve a = roc(scores), b = roc(doubled);
    CHECK(a.auc == doctest::Approx(b.auc).epsilon(1e-12));
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].fpr == doctest::Approx(b.points[i].fpr).epsilon(1e-12));
        CHECK(a.points[i].tpr == doctest::Approx(b.points[i].tpr).epsilon(1e-12));
    }
}

TEST_CASE("curve point at threshold zero agrees with direct metrics") {
    auto scores = random_scores(13, 200);
    RocCurve c = roc(scores);
    ConfusionCounts counts;
    for (const auto& [s, t] : scores) {
        int pred = s >= 0.0 ? 1 : -1;
        if (t == 1)
            (pred == 1 ? counts.tp : counts.fn)++;
        else
            (pred == 1 ? counts.fp : counts.tn)++;
    }
    Metrics m = metrics(counts);
    // find the sweep point whose threshold admits exactly the scores >= 0
    double best = 1e9;
    RocPoint at_zero{};
    for (const auto& p : c.points) {
        if (p.threshold <= 0.0 || !std::isfinite(p.threshold)) continue;
        if (p.threshold < best) {
            best = p.threshold;
            at_zero = p;
        }
    }
    // the next point after all positive-threshold ones covers score >= 0 exactly
    // when some score equals 0; guard by checking the constructed counts instead
    bool has_zero = std::any_of(scores.begin(), scores.end(),
                                [](const auto& s) { return s.first == 0.0; });
    if (!has_zero) {
        CHECK(at_zero.tpr == doctest::Approx(*m.sensitivity).epsilon(1e-12));
        CHECK(at_zero.fpr == doctest::Approx(1.0 - *m.specificity).epsilon(1e-12));
    }
}

TEST_CASE("roc sweep is monotone and ties are grouped") {
    auto scores = random_scores(19, 300);
    RocCurve c = roc(scores);
    std::set<double> distinct;
    for (const auto& [s, t] : scores) distinct.insert(s);
    // one point per distinct score plus the (inf, 0, 0) anchor
    CHECK(c.points.size() == distinct.size() + 1);
    CHECK(std::isinf(c.points.front().threshold));
    for (size_t i = 1; i < c.points.size(); ++i) {
        CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
        CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
        CHECK(c.points[i].threshold < c.points[i - 1].threshold);
    }
}

TEST_CASE("single-class score lists are rejected") {
    std::vector<std::pair<double, int>> scores{{0.1, 1}, {0.2, 1}};
    CHECK_THROWS(roc(scores));
}

TEST_CASE("split protocol produces the requested sizes") {
    auto splits = split_protocol(3000, 3000, 2500, 5, 17);
    REQUIRE(splits.size() == 5);
    for (const auto& s : splits) {
        CHECK(s.test_pos.size() == 2500);
        CHECK(s.test_neg.size() == 2500);
        CHECK(s.train_pos.size() == 500);
        CHECK(s.train_neg.size() == 500);
        std::set<size_t> pos(s.test_pos.begin(), s.test_pos.end());
        for (size_t i : s.train_pos) pos.insert(i);
        CHECK(pos.size() == 3000);  // disjoint, exhaustive
        CHECK(*pos.rbegin() == 2999);
    }
}

TEST_CASE("split protocol is bitwise deterministic") {
    auto a = split_protocol(500, 400, 100, 10, 99);
    auto b = split_protocol(500, 400, 100, 10, 99);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].test_pos == b[i].test_pos);
        CHECK(a[i].test_neg == b[i].test_neg);
        CHECK(a[i].train_pos == b[i].train_pos);
        CHECK(a[i].train_neg == b[i].train_neg);
    }
}

TEST_CASE("different seeds give different splits") {
    auto a = split_protocol(500, 400, 100, 1, 1);
    auto b = split_protocol(500, 400, 100, 1, 2);
    CHECK(a[0].test_pos != b[0].test_pos);
}

TEST_CASE("membership frequencies match the sampling design") {
    const size_t n = 200, n_test = 50, n_splits = 2000;
    auto splits = split_protocol(n, n, n_test, n_splits, 7);
    std::vector<int> freq(n, 0);
    for (const auto& s : splits)
        for (size_t i : s.test_pos) ++freq[i];
    double p = static_cast<double>(n_test) / n;
    double mean = n_splits * p;
    double sigma = std::sqrt(n_splits * p * (1 - p));
    for (size_t i = 0; i < n; ++i) CHECK(std::abs(freq[i] - mean) < 5.0 * sigma);
}
