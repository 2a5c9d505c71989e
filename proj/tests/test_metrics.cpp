#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "core/rng.hpp"
#include "doctest.h"
#include "eval/metrics.hpp"

using namespace graphae;

namespace {

double dist(const std::array<double, 2>& p, const std::array<double, 2>& q) {
    return std::hypot(p[0] - q[0], p[1] - q[1]);
}

bool matchable(const Triplet& p, const Triplet& g, double tol) {
    const bool straight = dist(p.a, g.a) <= tol && dist(p.b, g.b) <= tol;
    const bool crossed = dist(p.a, g.b) <= tol && dist(p.b, g.a) <= tol;
    return straight || crossed;
}

// exhaustive maximum matching: try every subset assignment recursively
int brute_force_matches(const std::vector<Triplet>& pred,
                        const std::vector<Triplet>& gt, double tol, size_t p = 0,
                        std::vector<char>* used = nullptr) {
    std::vector<char> local;
    if (!used) {
        local.assign(gt.size(), 0);
        used = &local;
    }
    if (p == pred.size()) return 0;
    int best = brute_force_matches(pred, gt, tol, p + 1, used);  // leave p unmatched
    for (size_t g = 0; g < gt.size(); ++g) {
        if ((*used)[g] || !matchable(pred[p], gt[g], tol)) continue;
        (*used)[g] = 1;
        best = std::max(best, 1 + brute_force_matches(pred, gt, tol, p + 1, used));
        (*used)[g] = 0;
    }
    return best;
}

// independent re-statement of the dedup order and merge rule
std::vector<Triplet> dedup_reference(std::vector<Triplet> ts, double radius) {
    std::stable_sort(ts.begin(), ts.end(), [](const Triplet& x, const Triplet& y) {
        if (x.prob != y.prob) return x.prob > y.prob;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    std::vector<Triplet> kept;
    for (const auto& t : ts) {
        bool absorbed = false;
        for (const auto& k : kept)
            if (matchable(t, k, radius)) {
                absorbed = true;
                break;
            }
        if (!absorbed) kept.push_back(t);
    }
    return kept;
}

bool same_triplets(const std::vector<Triplet>& x, const std::vector<Triplet>& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i].a != y[i].a || x[i].b != y[i].b || x[i].prob != y[i].prob) return false;
    return true;
}

Triplet t(double ax, double ay, double bx, double by, double prob = 1.0) {
    return make_triplet({ax, ay}, {bx, by}, prob);
}

}  // namespace

TEST_CASE("triplet endpoints are canonicalized") {
    auto a = make_triplet({5, 1}, {2, 3}, 0.7);
    CHECK(a.a == std::array<double, 2>{2, 3});
    CHECK(a.b == std::array<double, 2>{5, 1});
    auto b = make_triplet({2, 3}, {5, 1}, 0.7);
    CHECK(a.a == b.a);
    CHECK(a.b == b.b);
    // ties on x fall back to y
    auto c = make_triplet({2, 9}, {2, 3}, 0.7);
    CHECK(c.a == std::array<double, 2>{2, 3});
}

TEST_CASE("extract_triplets thresholding") {
    const int n = 4;
    std::vector<std::array<double, 2>> coords = {{10, 10}, {100, 10}, {10, 100}, {3, 3}};
    std::vector<double> probs(16, 0.0);

    CHECK(extract_triplets(coords, probs, n, 0.5).empty());

    // triangle on the first three nodes
    auto set = [&](int i, int j, double v) {
        probs[size_t(i) * n + j] = v;
        probs[size_t(j) * n + i] = v;
    };
    set(0, 1, 0.9);
    set(0, 2, 0.8);
    set(1, 2, 0.7);
    auto tri = extract_triplets(coords, probs, n, 0.5);
    CHECK(tri.size() == 3);

    // exactly at threshold counts as kept
    set(0, 3, 0.5);
    CHECK(extract_triplets(coords, probs, n, 0.5).size() == 4);
    set(0, 3, 0.4999);
    CHECK(extract_triplets(coords, probs, n, 0.5).size() == 3);
}

TEST_CASE("dedup merges near-duplicates and keeps disjoint sets") {
    auto a = t(10, 10, 60, 60, 0.9);
    auto b = t(11, 11, 61, 59, 0.8);  // 2 px off at both ends
    auto far = t(100, 10, 120, 40, 0.7);
    auto merged = dedup({a, b, far}, 8.0);
    CHECK(merged.size() == 2);
    CHECK(merged[0].prob == 0.9);  // higher-probability one survives

    auto disjoint = dedup({a, far}, 8.0);
    CHECK(disjoint.size() == 2);

    // both endpoints must be close: one shared endpoint is not a duplicate
    auto shares_one = t(10, 10, 120, 40, 0.6);
    CHECK(dedup({a, shares_one}, 8.0).size() == 2);
}

TEST_CASE("dedup matches the scalar reference and is idempotent") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = 1 + rng.uniform_int(6);
        std::vector<Triplet> ts;
        for (int k = 0; k < m; ++k) {
            // clustered coordinates so chains of near-duplicates occur
            const double ax = 10 * rng.uniform_int(5) + rng.uniform(0, 6);
            const double ay = 10 * rng.uniform_int(5) + rng.uniform(0, 6);
            const double bx = 10 * rng.uniform_int(5) + rng.uniform(0, 6);
            const double by = 10 * rng.uniform_int(5) + rng.uniform(0, 6);
            ts.push_back(t(ax, ay, bx, by, 0.1 * rng.uniform_int(10)));
        }
        auto got = dedup(ts, 8.0);
        auto want = dedup_reference(ts, 8.0);
        CHECK(same_triplets(got, want));
        CHECK(same_triplets(dedup(got, 8.0), got));
    }
}

TEST_CASE("match handles identity, empties, and crossed endpoints") {
    std::vector<Triplet> gt = {t(10, 10, 60, 60), t(100, 10, 120, 40)};

    auto exact = match(gt, gt, 8.0);
    CHECK(exact.tp == 2);
    CHECK(exact.fp == 0);
    CHECK(exact.fn == 0);

    auto none = match({}, gt, 8.0);
    CHECK(none.tp == 0);
    CHECK(none.fn == 2);
    auto rep = finalize_report(none, 0.5, 8.0, 8.0);
    CHECK(rep.precision == 0.0);
    CHECK(rep.recall == 0.0);
    CHECK(rep.f1 == 0.0);

    // a triplet built from swapped endpoints still matches (unordered edges)
    std::vector<Triplet> swapped = {make_triplet({60, 60}, {10, 10}, 1.0),
                                    make_triplet({120, 40}, {100, 10}, 1.0)};
    auto sw = match(swapped, gt, 8.0);
    CHECK(sw.tp == 2);
}

TEST_CASE("match equals brute force on random 4-node instances") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        // random 4-node graph, perturbed + spurious predictions
        std::vector<std::array<double, 2>> nodes(4);
        for (auto& p : nodes) p = {rng.uniform(0, 128), rng.uniform(0, 128)};
        std::vector<Triplet> gt, pred;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                if (rng.uniform() < 0.5)
                    gt.push_back(make_triplet(nodes[size_t(i)], nodes[size_t(j)], 1.0));
                if (rng.uniform() < 0.6) {
                    const double r1 = rng.uniform(0, 12), a1 = rng.uniform(0, 6.2831853);
                    const double r2 = rng.uniform(0, 12), a2 = rng.uniform(0, 6.2831853);
                    pred.push_back(make_triplet(
                        {nodes[size_t(i)][0] + r1 * std::cos(a1),
                         nodes[size_t(i)][1] + r1 * std::sin(a1)},
                        {nodes[size_t(j)][0] + r2 * std::cos(a2),
                         nodes[size_t(j)][1] + r2 * std::sin(a2)},
                        rng.uniform()));
                }
            }
        if (rng.uniform() < 0.5)
            pred.push_back(t(rng.uniform(0, 128), rng.uniform(0, 128),
                             rng.uniform(0, 128), rng.uniform(0, 128), 0.9));

        auto counts = match(pred, gt, 8.0);
        const int oracle = brute_force_matches(pred, gt, 8.0);
        CHECK(counts.tp == oracle);
        CHECK(counts.fp == int64_t(pred.size()) - oracle);
        CHECK(counts.fn == int64_t(gt.size()) - oracle);

        // swapping pred and gt swaps precision and recall exactly
        auto inv = match(gt, pred, 8.0);
        CHECK(inv.tp == counts.tp);
        CHECK(inv.fp == counts.fn);
        CHECK(inv.fn == counts.fp);
    }
}

TEST_CASE("micro-average equals hand-computed ratios on a 3-sample fixture") {
    MatchCounts total;
    total += MatchCounts{2, 1, 0};
    total += MatchCounts{1, 0, 2};
    total += MatchCounts{0, 1, 1};
    auto rep = finalize_report(total, 0.5, 8.0, 8.0);
    CHECK(rep.tp == 3);
    CHECK(rep.fp == 2);
    CHECK(rep.fn == 3);
    CHECK(rep.precision == doctest::Approx(3.0 / 5.0));
    CHECK(rep.recall == doctest::Approx(0.5));
    CHECK(rep.f1 == doctest::Approx(2 * (3.0 / 5.0) * 0.5 / (3.0 / 5.0 + 0.5)));
}
