#pragma once

#include <array>
#include <vector>

#include "dataset/dataset.hpp"
#include "eval/metrics.hpp"
#include "harness/config.hpp"
#include "model/decoder.hpp"
#include "model/encoder.hpp"

namespace graphae {

// normalized [-1,1] coordinate -> pixel coordinate (pixel centers at integers)
inline double coord_to_px(double x, int canvas) {
    return (x + 1.0) * 0.5 * canvas - 0.5;
}
inline double px_to_coord(double px, int canvas) {
    return (px + 0.5) * 2.0 / canvas - 1.0;
}

// ground-truth edges of a record as unit-confidence triplets
std::vector<Triplet> gt_triplets_px(const DatasetRecord& rec);

// prediction of one sample: extract -> dedup, ready for matching
std::vector<Triplet> predicted_triplets(const std::vector<std::array<double, 2>>& coords_px,
                                        const std::vector<double>& probs, int n_max,
                                        const EvalConfig& eval);

// triplet-matching micro-averaged precision/recall/F1 over a whole split
template <typename S>
EvalReport evaluate_encoder(Encoder<S>& enc, const Dataset& ds, const EvalConfig& eval);

// mean reconstruction similarity (per the loss config) of the decoded target
// against the input over up to max_samples held-out images
template <typename S>
double mean_similarity(Encoder<S>& enc, Decoder<S>& dec, const Dataset& ds,
                       const LossConfig& loss, int max_samples, int batch_size);

}  // namespace graphae
