#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "core/ops.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "doctest.h"
#include "gradcheck.hpp"
#include "model/baseline.hpp"

using namespace graphae;
using graphae::testing::gradcheck;

namespace {

// cell (i,j) center expressed in canvas pixels (canvas 128, map 32 -> r = 4)
std::array<float, 2> cell_center_px(int j, int i, int canvas = 128, int map = 32) {
    const float r = float(canvas) / float(map);
    return {r * float(j) + (r - 1) / 2.0f, r * float(i) + (r - 1) / 2.0f};
}

double assignment_cost(const std::vector<double>& cost, int n,
                       const std::vector<int>& col_of_row) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += cost[size_t(i * n + col_of_row[size_t(i)])];
    return s;
}

// exhaustive minimum over all permutations
double brute_min_cost(const std::vector<double>& cost, int n) {
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        best = std::min(best, assignment_cost(cost, n, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// exhaustive minimum total distance over injective gt -> slot maps
double brute_min_injection(const std::vector<std::array<double, 2>>& pred,
                           const std::vector<std::array<double, 2>>& gt) {
    const int n_max = int(pred.size()), n = int(gt.size());
    std::vector<int> slots(static_cast<size_t>(n_max));
    std::iota(slots.begin(), slots.end(), 0);
    double best = 1e300;
    std::sort(slots.begin(), slots.end());
    do {
        double s = 0;
        for (int g = 0; g < n; ++g) s += dist(gt[size_t(g)], pred[size_t(slots[size_t(g)])]);
        best = std::min(best, s);
    } while (std::next_permutation(slots.begin(), slots.end()));
    return best;
}

}  // namespace

TEST_CASE("gt heatmaps put unit peaks at node cells") {
    const double sigma = 1.5;

    SUBCASE("one node at a cell center") {
        auto m = gt_heatmap({cell_center_px(9, 20)}, 128, 32, sigma);
        REQUIRE(m.size() == 32 * 32);
        CHECK(m[20 * 32 + 9] == doctest::Approx(1.0));
        CHECK(m[0] == doctest::Approx(0.0).epsilon(1e-8));  // far corner
        // one cell away in x: exp(-1 / (2 sigma^2))
        CHECK(m[20 * 32 + 10] == doctest::Approx(std::exp(-1.0 / (2 * sigma * sigma))));
        // total mass of an interior Gaussian is close to 2 pi sigma^2
        double sum = 0;
        for (float v : m) sum += v;
        CHECK(sum == doctest::Approx(2 * M_PI * sigma * sigma).epsilon(0.01));
    }

    SUBCASE("distant nodes each keep a unit peak, near nodes superpose") {
        auto m = gt_heatmap({cell_center_px(5, 5), cell_center_px(25, 25)}, 128, 32,
                            sigma);
        CHECK(m[5 * 32 + 5] == doctest::Approx(1.0));
        CHECK(m[25 * 32 + 25] == doctest::Approx(1.0));

        auto s = gt_heatmap({cell_center_px(8, 8), cell_center_px(9, 8)}, 128, 32,
                            sigma);
        const double bleed = std::exp(-1.0 / (2 * sigma * sigma));
        CHECK(s[8 * 32 + 8] == doctest::Approx(1.0 + bleed).epsilon(1e-5));
        CHECK(s[8 * 32 + 9] == doctest::Approx(1.0 + bleed).epsilon(1e-5));
    }

    SUBCASE("off-center nodes shift the peak between cells") {
        // halfway between cell 9 and 10 in x: both carry exp(-0.125/sigma^2...)
        auto c = cell_center_px(9, 20);
        auto m = gt_heatmap({{c[0] + 2.0f, c[1]}}, 128, 32, sigma);
        const double half = std::exp(-0.25 / (2 * sigma * sigma));
        CHECK(m[20 * 32 + 9] == doctest::Approx(half).epsilon(1e-5));
        CHECK(m[20 * 32 + 10] == doctest::Approx(half).epsilon(1e-5));
    }
}

TEST_CASE("node loss compares normalized attention mass to the gt maps") {
    SUBCASE("hand-computed 2x2 fixture") {
        auto att = Tensor<float>::zeros({1, 2, 2, 2}, false);
        const float ch0[4] = {0.2f, 0.4f, 0.1f, 0.4f};   // max 0.4
        const float ch1[4] = {0.3f, 0.3f, 0.6f, 0.1f};   // max 0.6
        std::copy(ch0, ch0 + 4, att.data());
        std::copy(ch1, ch1 + 4, att.data() + 4);
        auto gt = Tensor<float>::full({1, 1, 2, 2}, 1.0f, false);
        // normalized sums: [1.0, 1.5, 1.25, 7/6]; diffs vs 1: [0,.5,.25,1/6]
        const double expect = (0.0 + 0.25 + 0.0625 + 1.0 / 36.0) / 4.0;
        CHECK(node_loss(att, gt).item() == doctest::Approx(expect).epsilon(1e-6));
    }

    SUBCASE("zero exactly when the normalized mass matches") {
        auto att = Tensor<float>::zeros({1, 2, 2, 2}, false);
        att.data()[0] = 0.8f;  // channel 0 one-hot at cell 0
        att.data()[4 + 3] = 0.3f;  // channel 1 one-hot at cell 3
        auto gt = Tensor<float>::zeros({1, 1, 2, 2}, false);
        gt.data()[0] = 1.0f;
        gt.data()[3] = 1.0f;
        CHECK(node_loss(att, gt).item() == doctest::Approx(0.0));

        gt.data()[1] = 0.4f;  // now they disagree
        CHECK(node_loss(att, gt).item() > 0.0);
    }

    SUBCASE("matches finite differences") {
        Rng rng(3);
        auto att = Tensor<double>::zeros({1, 2, 3, 3}, true);
        for (int64_t k = 0; k < att.numel(); ++k) att.data()[k] = rng.uniform(0.05, 0.4);
        att.data()[2] = 0.9;  // unique, well-separated channel maxima
        att.data()[9 + 7] = 0.8;
        auto gt = Tensor<double>::zeros({1, 1, 3, 3}, false);
        for (int64_t k = 0; k < gt.numel(); ++k) gt.data()[k] = rng.uniform(0.0, 1.0);
        gradcheck({att}, [&] { return node_loss(att, gt); }, 1e-6, 1e-5);
    }
}

TEST_CASE("assignment solver reaches the exhaustive optimum") {
    SUBCASE("known 3x3 instance") {
        // row 0 -> col 1, row 1 -> col 0, row 2 -> col 2 (total 1+2+3)
        const std::vector<double> cost = {9, 1, 9, 2, 9, 9, 9, 9, 3};
        auto col = solve_assignment(cost, 3);
        CHECK(col == std::vector<int>{1, 0, 2});
    }

    SUBCASE("random instances, all sizes that permit brute force") {
        Rng rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 1 + int(rng.uniform_int(5));
            std::vector<double> cost(size_t(n * n));
            for (auto& c : cost) c = rng.uniform(0.0, 10.0);
            auto col = solve_assignment(cost, n);

            // col_of_row is a permutation
            std::vector<int> seen(size_t(n), 0);
            for (int i = 0; i < n; ++i) {
                REQUIRE(col[size_t(i)] >= 0);
                REQUIRE(col[size_t(i)] < n);
                ++seen[size_t(col[size_t(i)])];
            }
            for (int s : seen) CHECK(s == 1);

            CHECK(assignment_cost(cost, n, col) ==
                  doctest::Approx(brute_min_cost(cost, n)).epsilon(1e-9));
        }
    }
}

TEST_CASE("adjacency alignment maps gt edges onto predicted slots") {
    SUBCASE("a permuted exact match is recovered") {
        const std::vector<std::array<double, 2>> gt = {
            {-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
        const int sigma[4] = {2, 0, 3, 1};  // slot sigma[g] holds gt node g
        std::vector<std::array<double, 2>> pred(4);
        for (int g = 0; g < 4; ++g) pred[size_t(sigma[g])] = gt[size_t(g)];
        // a 4-cycle in gt order
        std::vector<std::vector<uint8_t>> adj(4, std::vector<uint8_t>(4, 0));
        for (int g = 0; g < 4; ++g) {
            adj[size_t(g)][size_t((g + 1) % 4)] = 1;
            adj[size_t((g + 1) % 4)][size_t(g)] = 1;
        }

        auto a = align_adjacency(pred, gt, adj, 4);
        for (int g = 0; g < 4; ++g) CHECK(a.slot_of_gt[size_t(g)] == sigma[g]);
        for (int g = 0; g < 4; ++g)
            for (int h = 0; h < 4; ++h)
                CHECK(a.adjacency[size_t(sigma[g] * 4 + sigma[h])] ==
                      float(adj[size_t(g)][size_t(h)]));
        // all slots are real: every unordered pair is valid
        int valid = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (i < j) valid += int(a.pair_mask[size_t(i * 4 + j)]);
                else CHECK(a.pair_mask[size_t(i * 4 + j)] == 0.0f);
            }
        CHECK(valid == 6);
    }

    SUBCASE("assignment cost matches the exhaustive injection optimum") {
        Rng rng(23);
        for (int trial = 0; trial < 300; ++trial) {
            const int n = 1 + int(rng.uniform_int(4));
            std::vector<std::array<double, 2>> gt(static_cast<size_t>(n));
            std::vector<std::array<double, 2>> pred(4);
            for (auto& p : gt) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            for (auto& p : pred) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            std::vector<std::vector<uint8_t>> adj(size_t(n),
                                                  std::vector<uint8_t>(size_t(n), 0));
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    adj[size_t(i)][size_t(j)] = adj[size_t(j)][size_t(i)] =
                        uint8_t(rng.uniform_int(2));

            auto a = align_adjacency(pred, gt, adj, 4);

            // injectivity and optimality
            std::vector<int> used(4, 0);
            double total = 0;
            for (int g = 0; g < n; ++g) {
                const int s = a.slot_of_gt[size_t(g)];
                REQUIRE(s >= 0);
                REQUIRE(s < 4);
                ++used[size_t(s)];
                total += dist(gt[size_t(g)], pred[size_t(s)]);
            }
            for (int u : used) CHECK(u <= 1);
            CHECK(total == doctest::Approx(brute_min_injection(pred, gt)).epsilon(1e-9));

            // mask marks exactly the i<j pairs whose slots both hold gt nodes
            std::vector<int> holds(4, 0);
            for (int g = 0; g < n; ++g) holds[size_t(a.slot_of_gt[size_t(g)])] = 1;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    const float want =
                        (i < j && holds[size_t(i)] && holds[size_t(j)]) ? 1.0f : 0.0f;
                    CHECK(a.pair_mask[size_t(i * 4 + j)] == want);
                }

            // aligned edges replicate the gt adjacency under the mapping
            for (int g = 0; g < n; ++g)
                for (int h = 0; h < n; ++h)
                    CHECK(a.adjacency[size_t(a.slot_of_gt[size_t(g)] * 4 +
                                             a.slot_of_gt[size_t(h)])] ==
                          float(adj[size_t(g)][size_t(h)]));
        }
    }

    SUBCASE("gt labeling is irrelevant") {
        Rng rng(29);
        std::vector<std::array<double, 2>> gt(3), pred(4);
        for (auto& p : gt) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        for (auto& p : pred) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        std::vector<std::vector<uint8_t>> adj = {{0, 1, 0}, {1, 0, 1}, {0, 1, 0}};

        const int perm[3] = {2, 0, 1};
        std::vector<std::array<double, 2>> gt_p(3);
        std::vector<std::vector<uint8_t>> adj_p(3, std::vector<uint8_t>(3, 0));
        for (int i = 0; i < 3; ++i) {
            gt_p[size_t(perm[i])] = gt[size_t(i)];
            for (int j = 0; j < 3; ++j)
                adj_p[size_t(perm[i])][size_t(perm[j])] = adj[size_t(i)][size_t(j)];
        }

        auto a = align_adjacency(pred, gt, adj, 4);
        auto b = align_adjacency(pred, gt_p, adj_p, 4);
        CHECK(a.adjacency == b.adjacency);
        CHECK(a.pair_mask == b.pair_mask);
    }

    SUBCASE("a single gt node leaves no valid pair") {
        auto a = align_adjacency({{0.1, 0.1}, {0.9, 0.9}, {-0.9, 0.3}, {0.4, -0.2}},
                                 {{0.0, 0.0}}, {{0}}, 4);
        for (float m : a.pair_mask) CHECK(m == 0.0f);
        CHECK(a.slot_of_gt.size() == 1);
        CHECK(a.slot_of_gt[0] == 0);  // nearest slot wins
    }
}

TEST_CASE("edge loss is masked cross-entropy over unordered pairs") {
    const int n = 4;

    auto probs_of = [&](std::vector<float> upper) {
        // fill i<j entries row by row from the list, mirror below
        auto t = Tensor<float>::zeros({1, n, n}, false);
        size_t q = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++q)
                t.data()[i * n + j] = t.data()[j * n + i] = upper[q];
        return t;
    };

    SUBCASE("uninformed predictions cost ln 2") {
        auto p = probs_of({0.5f, 0.5f, 0.5f, 0.5f, 0.5f, 0.5f});
        std::vector<float> targets(16, 0.0f), mask(16, 0.0f);
        targets[0 * 4 + 1] = 1.0f;
        mask[0 * 4 + 1] = 1.0f;
        mask[2 * 4 + 3] = 1.0f;  // target 0
        CHECK(edge_loss(p, targets, mask).item() ==
              doctest::Approx(std::log(2.0)).epsilon(1e-6));
    }

    SUBCASE("hand-computed two-pair fixture") {
        auto p = probs_of({0.8f, 0.3f, 0.5f, 0.5f, 0.5f, 0.5f});
        std::vector<float> targets(16, 0.0f), mask(16, 0.0f);
        targets[0 * 4 + 1] = 1.0f;  // p=0.8 -> -log 0.8
        mask[0 * 4 + 1] = 1.0f;
        mask[0 * 4 + 2] = 1.0f;    // p=0.3, target 0 -> -log 0.7
        const double expect = -(std::log(0.8) + std::log(0.7)) / 2.0;
        CHECK(edge_loss(p, targets, mask).item() == doctest::Approx(expect).epsilon(1e-6));
    }

    SUBCASE("perfect confident predictions cost nothing") {
        auto p = probs_of({1.0f, 0.0f, 0.0f, 1.0f, 0.0f, 0.0f});
        std::vector<float> targets(16, 0.0f), mask(16, 0.0f);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                mask[size_t(i * n + j)] = 1.0f;
                targets[size_t(i * n + j)] = p.data()[i * n + j];
            }
        // the 1e-7 clamp keeps log finite; the result is epsilon-small
        CHECK(edge_loss(p, targets, mask).item() == doctest::Approx(0.0).epsilon(1e-5));
    }

    SUBCASE("an empty mask yields a zero, gradient-free loss") {
        auto p = probs_of({0.8f, 0.3f, 0.6f, 0.2f, 0.9f, 0.4f});
        std::vector<float> targets(16, 1.0f), mask(16, 0.0f);
        auto l = edge_loss(p, targets, mask);
        CHECK(l.item() == 0.0);
        CHECK(!l.requires_grad());
    }

    SUBCASE("pairs are pooled across the batch before averaging") {
        // batch of 2, one valid pair each: denominator is 2, not per-sample
        auto p = Tensor<float>::zeros({2, n, n}, false);
        p.data()[0 * 16 + 0 * 4 + 1] = 0.8f;
        p.data()[1 * 16 + 1 * 4 + 3] = 0.4f;
        std::vector<float> targets(32, 0.0f), mask(32, 0.0f);
        targets[0 * 16 + 0 * 4 + 1] = 1.0f;
        mask[0 * 16 + 0 * 4 + 1] = 1.0f;
        targets[1 * 16 + 1 * 4 + 3] = 1.0f;
        mask[1 * 16 + 1 * 4 + 3] = 1.0f;
        const double expect = -(std::log(0.8) + std::log(0.4)) / 2.0;
        CHECK(edge_loss(p, targets, mask).item() == doctest::Approx(expect).epsilon(1e-6));
    }

    SUBCASE("masked-out entries carry no gradient") {
        auto p = Tensor<double>::zeros({1, n, n}, true);
        Rng rng(31);
        for (int64_t k = 0; k < p.numel(); ++k) p.data()[k] = rng.uniform(0.1, 0.9);
        std::vector<double> targets(16, 0.0), mask(16, 0.0);
        targets[0 * 4 + 1] = 1.0;
        mask[0 * 4 + 1] = 1.0;
        mask[1 * 4 + 2] = 1.0;

        gradcheck({p}, [&] { return edge_loss(p, targets, mask); }, 1e-6, 1e-5);

        p.zero_grad();
        backward(edge_loss(p, targets, mask));
        p.node()->ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double g = p.node()->grad[size_t(i * n + j)];
                if (mask[size_t(i * n + j)] > 0) CHECK(g != 0.0);
                else CHECK(g == 0.0);
            }
    }
}
