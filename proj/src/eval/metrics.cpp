#include "eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "core/check.hpp"

namespace graphae {

namespace {

double dist(const std::array<double, 2>& p, const std::array<double, 2>& q) {
    return std::hypot(p[0] - q[0], p[1] - q[1]);
}

bool lex_less(const std::array<double, 2>& p, const std::array<double, 2>& q) {
    return p[0] != q[0] ? p[0] < q[0] : p[1] < q[1];
}

}  // namespace

Triplet make_triplet(std::array<double, 2> p, std::array<double, 2> q, double prob) {
    Triplet t;
    if (lex_less(q, p)) std::swap(p, q);
    t.a = p;
    t.b = q;
    t.prob = prob;
    return t;
}

std::vector<Triplet> extract_triplets(const std::vector<std::array<double, 2>>& coords_px,
                                      const std::vector<double>& probs_row_major, int n,
                                      double threshold) {
    GA_CHECK(int(coords_px.size()) >= n && int(probs_row_major.size()) >= n * n,
             "extract_triplets: size mismatch");
    std::vector<Triplet> out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double p = probs_row_major[size_t(i) * n + j];
            if (p >= threshold)
                out.push_back(make_triplet(coords_px[size_t(i)], coords_px[size_t(j)], p));
        }
    return out;
}

std::vector<Triplet> dedup(std::vector<Triplet> triplets, double merge_radius) {
    GA_CHECK(merge_radius > 0, "dedup: merge_radius must be positive");
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& x, const Triplet& y) {
        if (x.prob != y.prob) return x.prob > y.prob;
        if (x.a != y.a) return lex_less(x.a, y.a);
        return lex_less(x.b, y.b);
    });
    std::vector<Triplet> kept;
    for (const auto& t : triplets) {
        bool dup = false;
        for (const auto& k : kept) {
            // edges are unordered: take the better of the two endpoint pairings
            const bool straight = dist(t.a, k.a) <= merge_radius &&
                                  dist(t.b, k.b) <= merge_radius;
            const bool crossed = dist(t.a, k.b) <= merge_radius &&
                                 dist(t.b, k.a) <= merge_radius;
            if (straight || crossed) {
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(t);
    }
    return kept;
}

namespace {

// Kuhn's augmenting-path maximum bipartite matching
struct Matcher {
    const std::vector<std::vector<int>>& adj;  // pred index -> matchable gt indices
    std::vector<int> gt_match;                 // gt index -> pred index or -1
    std::vector<char> used;

    bool try_augment(int p) {
        for (int g : adj[size_t(p)]) {
            if (used[size_t(g)]) continue;
            used[size_t(g)] = 1;
            if (gt_match[size_t(g)] < 0 || try_augment(gt_match[size_t(g)])) {
                gt_match[size_t(g)] = p;
                return true;
            }
        }
        return false;
    }
};

}  // namespace

MatchCounts match(const std::vector<Triplet>& pred, const std::vector<Triplet>& gt,
                  double tol) {
    GA_CHECK(tol > 0, "match: tol must be positive");
    const int np = int(pred.size()), ng = int(gt.size());
    std::vector<std::vector<int>> adj(static_cast<size_t>(np));
    for (int p = 0; p < np; ++p)
        for (int g = 0; g < ng; ++g) {
            const bool straight = dist(pred[size_t(p)].a, gt[size_t(g)].a) <= tol &&
                                  dist(pred[size_t(p)].b, gt[size_t(g)].b) <= tol;
            const bool crossed = dist(pred[size_t(p)].a, gt[size_t(g)].b) <= tol &&
                                 dist(pred[size_t(p)].b, gt[size_t(g)].a) <= tol;
            if (straight || crossed) adj[size_t(p)].push_back(g);
        }
    Matcher m{adj, std::vector<int>(size_t(ng), -1), {}};
    int64_t matched = 0;
    for (int p = 0; p < np; ++p) {
        m.used.assign(size_t(ng), 0);
        if (m.try_augment(p)) ++matched;
    }
    MatchCounts c;
    c.tp = matched;
    c.fp = np - matched;
    c.fn = ng - matched;
    return c;
}

EvalReport finalize_report(const MatchCounts& total, double threshold,
                           double merge_radius, double tol) {
    EvalReport r;
    r.tp = total.tp;
    r.fp = total.fp;
    r.fn = total.fn;
    r.threshold = threshold;
    r.merge_radius = merge_radius;
    r.tol = tol;
    r.precision = total.tp + total.fp > 0 ? double(total.tp) / double(total.tp + total.fp) : 0.0;
    r.recall = total.tp + total.fn > 0 ? double(total.tp) / double(total.tp + total.fn) : 0.0;
    r.f1 = r.precision + r.recall > 0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

}  // namespace graphae
