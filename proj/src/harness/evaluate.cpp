#include "harness/evaluate.hpp"

#include <algorithm>
#include <numeric>

#include "core/check.hpp"

namespace graphae {

std::vector<Triplet> gt_triplets_px(const DatasetRecord& rec) {
    std::vector<Triplet> out;
    const int n = int(rec.node_coords.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rec.adjacency[size_t(i)][size_t(j)])
                out.push_back(make_triplet(
                    {double(rec.node_coords[size_t(i)][0]), double(rec.node_coords[size_t(i)][1])},
                    {double(rec.node_coords[size_t(j)][0]), double(rec.node_coords[size_t(j)][1])},
                    1.0));
    return out;
}

std::vector<Triplet> predicted_triplets(const std::vector<std::array<double, 2>>& coords_px,
                                        const std::vector<double>& probs, int n_max,
                                        const EvalConfig& eval) {
    auto raw = extract_triplets(coords_px, probs, n_max, eval.threshold);
    return dedup(std::move(raw), eval.merge_radius);
}

template <typename S>
EvalReport evaluate_encoder(Encoder<S>& enc, const Dataset& ds, const EvalConfig& eval) {
    GA_CHECK(ds.size() > 0, "evaluate_encoder: empty dataset");
    const int n = enc.config().n_max;
    const int canvas = ds.canvas();
    MatchCounts total;
    NoGrad ng;
    for (int64_t start = 0; start < ds.size(); start += eval.batch_size) {
        const int64_t stop = std::min(ds.size(), start + int64_t(eval.batch_size));
        std::vector<int64_t> idx(size_t(stop - start));
        std::iota(idx.begin(), idx.end(), start);
        auto batch = make_batch<S>(ds, idx, n);
        auto g = enc.encode(batch.images, false);
        const S* coords = g.coords.data();
        const S* probs = g.probs.data();
        for (int64_t b = 0; b < stop - start; ++b) {
            std::vector<std::array<double, 2>> px(static_cast<size_t>(n));
            for (int k = 0; k < n; ++k)
                px[size_t(k)] = {coord_to_px(double(coords[(b * n + k) * 2 + 0]), canvas),
                                 coord_to_px(double(coords[(b * n + k) * 2 + 1]), canvas)};
            std::vector<double> pr(size_t(n) * n);
            for (int64_t q = 0; q < int64_t(n) * n; ++q)
                pr[size_t(q)] = double(probs[b * n * n + q]);
            total += match(predicted_triplets(px, pr, n, eval),
                           gt_triplets_px(ds.record(idx[size_t(b)])), eval.tol);
        }
    }
    return finalize_report(total, eval.threshold, eval.merge_radius, eval.tol);
}

template <typename S>
double mean_similarity(Encoder<S>& enc, Decoder<S>& dec, const Dataset& ds,
                       const LossConfig& loss, int max_samples, int batch_size) {
    GA_CHECK(ds.size() > 0, "mean_similarity: empty dataset");
    const int64_t limit = std::min<int64_t>(ds.size(), max_samples);
    double sum = 0;
    NoGrad ng;
    for (int64_t start = 0; start < limit; start += batch_size) {
        const int64_t stop = std::min(limit, start + int64_t(batch_size));
        std::vector<int64_t> idx(size_t(stop - start));
        std::iota(idx.begin(), idx.end(), start);
        auto batch = make_batch<S>(ds, idx, enc.config().n_max);
        auto g = enc.encode(batch.images, false);
        auto out = dec.decode(g.coords, g.probs);
        auto target = loss.target == LossTarget::coarse ? out.coarse : out.refined;
        auto sim = loss.similarity == SimilarityKind::ms_ssim
                       ? ms_ssim_per_sample(target, batch.images, loss.ms_ssim_scales,
                                            loss.window)
                       : ssim_per_sample(target, batch.images, loss.window);
        for (int64_t b = 0; b < sim.numel(); ++b) sum += double(sim.data()[b]);
    }
    return sum / double(limit);
}

template EvalReport evaluate_encoder<float>(Encoder<float>&, const Dataset&,
                                            const EvalConfig&);
template EvalReport evaluate_encoder<double>(Encoder<double>&, const Dataset&,
                                             const EvalConfig&);
template double mean_similarity<float>(Encoder<float>&, Decoder<float>&, const Dataset&,
                                       const LossConfig&, int, int);
template double mean_similarity<double>(Encoder<double>&, Decoder<double>&,
                                        const Dataset&, const LossConfig&, int, int);

}  // namespace graphae
