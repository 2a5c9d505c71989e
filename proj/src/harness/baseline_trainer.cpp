#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "core/check.hpp"
#include "core/optim.hpp"
#include "harness/checkpoint.hpp"
#include "harness/evaluate.hpp"
#include "harness/trainer.hpp"
#include "model/baseline.hpp"

namespace graphae {

namespace {

uint64_t derive_stream(uint64_t seed, uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag));
}

template <typename S>
std::vector<std::vector<S>> snapshot_values(const nn::ParamStore<S>& ps) {
    std::vector<std::vector<S>> snap;
    snap.reserve(ps.params.size() + ps.buffers.size());
    for (const auto& [name, t] : ps.params) snap.push_back(t.values());
    for (const auto& [name, b] : ps.buffers) snap.push_back(*b);
    return snap;
}

template <typename S>
void restore_values(nn::ParamStore<S>& ps, const std::vector<std::vector<S>>& snap) {
    size_t k = 0;
    for (auto& [name, t] : ps.params) t.values() = snap[k++];
    for (auto& [name, b] : ps.buffers) *b = snap[k++];
}

// ground-truth heatmaps for one batch at the attention resolution
template <typename S>
Tensor<S> batch_gt_maps(const Dataset& ds, const std::vector<int64_t>& idx, int canvas,
                        int map_size) {
    const int B = int(idx.size());
    auto t = Tensor<S>::zeros({B, 1, map_size, map_size}, false);
    for (int b = 0; b < B; ++b) {
        const auto m =
            gt_heatmap(ds.record(idx[size_t(b)]).node_coords, canvas, map_size, 1.5);
        for (size_t q = 0; q < m.size(); ++q)
            t.data()[size_t(b) * m.size() + q] = S(m[q]);
    }
    return t;
}

// per-sample optimal gt-to-slot alignment flattened across the batch
template <typename S>
void batch_edge_targets(const Dataset& ds, const std::vector<int64_t>& idx,
                        const Tensor<S>& coords, int n_max, int canvas,
                        std::vector<S>* targets, std::vector<S>* masks) {
    const int B = int(idx.size());
    targets->assign(size_t(B) * n_max * n_max, S(0));
    masks->assign(size_t(B) * n_max * n_max, S(0));
    for (int b = 0; b < B; ++b) {
        std::vector<std::array<double, 2>> pred(static_cast<size_t>(n_max));
        for (int k = 0; k < n_max; ++k)
            pred[size_t(k)] = {double(coords.data()[(b * n_max + k) * 2 + 0]),
                               double(coords.data()[(b * n_max + k) * 2 + 1])};
        const auto& rec = ds.record(idx[size_t(b)]);
        std::vector<std::array<double, 2>> gt(rec.node_coords.size());
        for (size_t k = 0; k < gt.size(); ++k)
            gt[k] = {px_to_coord(double(rec.node_coords[k][0]), canvas),
                     px_to_coord(double(rec.node_coords[k][1]), canvas)};
        const auto aligned = align_adjacency(pred, gt, rec.adjacency, n_max);
        for (size_t q = 0; q < aligned.adjacency.size(); ++q) {
            (*targets)[size_t(b) * n_max * n_max + q] = S(aligned.adjacency[q]);
            (*masks)[size_t(b) * n_max * n_max + q] = S(aligned.pair_mask[q]);
        }
    }
}

}  // namespace

TrainResult train_baseline(const ExperimentConfig& cfg, uint64_t seed,
                           const Dataset& train, const Dataset& val,
                           const Dataset& test, const std::string& out_dir) {
    GA_CHECK(train.size() > 0, "train_baseline: empty training split");
    using S = float;
    auto model = AutoEncoder<S>::make(cfg, seed, /*with_decoder=*/false);
    auto& enc = *model.encoder;
    const int canvas = cfg.data.gen.canvas;
    const int n_max = cfg.n_max;

    std::vector<Tensor<S>> edge_params;
    for (const auto& [name, t] : model.params.params)
        if (t.requires_grad() && name.rfind("enc.edge.", 0) == 0)
            edge_params.push_back(t);
    GA_CHECK(!edge_params.empty(), "train_baseline: no edge-classifier parameters");

    auto make_opt = [&](const std::vector<Tensor<S>>& params) {
        return Adam<S>(params, S(cfg.schedule.initial_lr), S(cfg.optimizer.beta1),
                       S(cfg.optimizer.beta2), S(cfg.optimizer.eps),
                       S(cfg.optimizer.weight_decay));
    };
    Adam<S> opt_stage1 = make_opt(model.params.trainable());
    // the freeze point starts a fresh optimizer over the edge branch only
    Adam<S> opt_stage2 = make_opt(edge_params);

    Rng shuffle_rng(derive_stream(seed, 0x5151));
    TrainResult res;
    auto last_good = snapshot_values(model.params);
    const int micro = std::min(cfg.optimizer.micro_batch, cfg.optimizer.batch_size);

    std::vector<int64_t> order(size_t(train.size()));
    std::iota(order.begin(), order.end(), int64_t(0));

    for (int epoch = 1; epoch <= cfg.schedule.epochs && !res.aborted; ++epoch) {
        const bool node_stage = epoch <= cfg.baseline_stage1_epochs;
        Adam<S>& opt = node_stage ? opt_stage1 : opt_stage2;
        const double lr = lr_at_epoch(cfg.schedule, epoch);
        opt.set_lr(S(lr));
        shuffle_rng.shuffle(order);

        double sum_loss = 0;
        int64_t n_seen = 0;
        for (int64_t start = 0; start < train.size() && !res.aborted;
             start += cfg.optimizer.batch_size) {
            const int64_t macro_n =
                std::min<int64_t>(cfg.optimizer.batch_size, train.size() - start);
            opt.zero_grad();
            for (int64_t off = 0; off < macro_n; off += micro) {
                const int64_t micro_n = std::min<int64_t>(micro, macro_n - off);
                std::vector<int64_t> idx(order.begin() + start + off,
                                         order.begin() + start + off + micro_n);
                auto batch = make_batch<S>(train, idx, n_max);

                Tensor<S> loss;
                if (node_stage) {
                    auto att = enc.predict_attention(
                        enc.extract_features(batch.images, true), true);
                    auto gt = batch_gt_maps<S>(train, idx, canvas, att.dim(2));
                    loss = node_loss(att, gt);
                } else {
                    // frozen attention path: values only, running stats fixed
                    Tensor<S> coords, patches;
                    {
                        NoGrad ng;
                        auto att = enc.predict_attention(
                            enc.extract_features(batch.images, false), false);
                        coords = Encoder<S>::coords_from_attention(att);
                        patches = enc.build_edge_rois(coords, batch.images);
                    }
                    auto logits = ops::reshape(enc.classify_edge_logits(patches, true),
                                               {int(micro_n), n_max, n_max});
                    auto probs = ops::sym_zero_diag(ops::sigmoid(logits));
                    std::vector<S> targets, masks;
                    batch_edge_targets(train, idx, coords, n_max, canvas, &targets,
                                       &masks);
                    loss = edge_loss(probs, targets, masks);
                }

                const double v = double(loss.item());
                if (!std::isfinite(v)) {
                    res.aborted = true;
                    break;
                }
                sum_loss += v * double(micro_n);
                n_seen += micro_n;
                if (loss.requires_grad())
                    backward(ops::mul_scalar(loss, S(double(micro_n) / double(macro_n))));
            }
            if (!res.aborted) opt.step();
        }
        if (res.aborted) break;

        EpochStats st;
        st.epoch = epoch;
        st.lr = lr;
        st.total = sum_loss / double(n_seen);
        st.main = st.total;
        if (val.size() > 0) st.val_f1 = evaluate_encoder(enc, val, cfg.eval).f1;
        res.curve.push_back(st);
        res.completed_epochs = epoch;
        last_good = snapshot_values(model.params);
    }

    if (res.aborted) restore_values(model.params, last_good);
    if (test.size() > 0) res.test_report = evaluate_encoder(enc, test, cfg.eval);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        ExperimentConfig echo = cfg;
        echo.seed = seed;
        res.checkpoint_path = out_dir + "/model.ckpt";
        save_checkpoint(model.params, config_to_json(echo), res.checkpoint_path);
    }
    return res;
}

}  // namespace graphae
