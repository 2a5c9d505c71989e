#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace graphae {

// one predicted or ground-truth edge: two pixel-space endpoints, canonicalized
// so that a <= b lexicographically, plus the edge confidence
struct Triplet {
    std::array<double, 2> a{}, b{};
    double prob = 1.0;
};

Triplet make_triplet(std::array<double, 2> p, std::array<double, 2> q, double prob);

// unordered pairs with probability >= threshold become triplets
std::vector<Triplet> extract_triplets(const std::vector<std::array<double, 2>>& coords_px,
                                      const std::vector<double>& probs_row_major, int n,
                                      double threshold);

// greedy duplicate removal in a deterministic order (descending probability,
// then lexicographic coordinates); a triplet is absorbed when both of its
// endpoints lie within merge_radius of an already-kept triplet's endpoints,
// under the better of the two endpoint pairings (edges are unordered)
std::vector<Triplet> dedup(std::vector<Triplet> triplets, double merge_radius);

struct MatchCounts {
    int64_t tp = 0, fp = 0, fn = 0;
    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

// maximum bipartite matching; a pred-gt pair is matchable when both endpoint
// distances are within tol under the better of the two endpoint pairings
MatchCounts match(const std::vector<Triplet>& pred, const std::vector<Triplet>& gt,
                  double tol);

struct EvalReport {
    double precision = 0, recall = 0, f1 = 0;
    int64_t tp = 0, fp = 0, fn = 0;
    double threshold = 0.5, merge_radius = 8.0, tol = 8.0;
};

// micro-average: counts are summed over samples before the ratios
EvalReport finalize_report(const MatchCounts& total, double threshold,
                           double merge_radius, double tol);

}  // namespace graphae
