#include "harness/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "core/check.hpp"
#include "core/optim.hpp"
#include "harness/checkpoint.hpp"
#include "harness/evaluate.hpp"
#include "model/losses.hpp"

namespace graphae {

namespace {

// independent deterministic streams derived from one experiment seed
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

std::string checkpoint_meta(const ExperimentConfig& cfg, uint64_t seed) {
    ExperimentConfig echo = cfg;
    echo.seed = seed;
    return config_to_json(echo);
}

}  // namespace

template <typename S>
AutoEncoder<S> AutoEncoder<S>::make(const ExperimentConfig& cfg, uint64_t init_seed,
                                    bool with_decoder) {
    AutoEncoder<S> m;
    Rng rng(derive_stream(init_seed, 0x1717));
    EncoderConfig ec;
    ec.n_max = cfg.n_max;
    ec.canvas = cfg.data.gen.canvas;
    m.encoder = std::make_unique<Encoder<S>>(ec, rng);
    m.encoder->register_params(m.params);
    if (with_decoder) {
        DecoderConfig dc;
        dc.canvas = cfg.data.gen.canvas;
        dc.stroke_width = cfg.data.gen.stroke_width;
        m.decoder = std::make_unique<Decoder<S>>(dc, rng);
        m.decoder->register_params(m.params);
    }
    return m;
}

template struct AutoEncoder<float>;
template struct AutoEncoder<double>;

TrainResult train_self_supervised(const ExperimentConfig& cfg, uint64_t seed,
                                  const Dataset& train, const Dataset& val,
                                  const Dataset& test, const std::string& out_dir) {
    GA_CHECK(train.size() > 0, "train_self_supervised: empty training split");
    using S = float;
    auto model = AutoEncoder<S>::make(cfg, seed, /*with_decoder=*/true);
    auto& enc = *model.encoder;
    auto& dec = *model.decoder;

    Adam<S> opt(model.params.trainable(), S(cfg.schedule.initial_lr),
                S(cfg.optimizer.beta1), S(cfg.optimizer.beta2), S(cfg.optimizer.eps),
                S(cfg.optimizer.weight_decay));
    Rng shuffle_rng(derive_stream(seed, 0x5151));

    TrainResult res;
    auto last_good = snapshot_values(model.params);
    const int micro = std::min(cfg.optimizer.micro_batch, cfg.optimizer.batch_size);

    std::vector<int64_t> order(size_t(train.size()));
    std::iota(order.begin(), order.end(), int64_t(0));

    for (int epoch = 1; epoch <= cfg.schedule.epochs && !res.aborted; ++epoch) {
        const double lr = lr_at_epoch(cfg.schedule, epoch);
        opt.set_lr(S(lr));
        shuffle_rng.shuffle(order);

        double sum_total = 0, sum_main = 0, sum_aux = 0;
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
                auto batch = make_batch<S>(train, idx, cfg.n_max);
                auto g = enc.encode(batch.images, true);
                auto out = dec.decode(g.coords, g.probs);
                auto lb = compute_losses(out.coarse, out.refined, g.attention,
                                         batch.images, cfg.loss);
                const double t = double(lb.total.item());
                const double m = double(lb.main.item());
                const double a = double(lb.aux.item());
                if (!std::isfinite(t)) {
                    res.aborted = true;
                    break;
                }
                sum_total += t * double(micro_n);
                sum_main += m * double(micro_n);
                sum_aux += a * double(micro_n);
                n_seen += micro_n;
                // averaged across accumulation chunks as one full batch
                backward(ops::mul_scalar(lb.total, S(double(micro_n) / double(macro_n))));
            }
            if (!res.aborted) opt.step();
        }
        if (res.aborted) break;

        EpochStats st;
        st.epoch = epoch;
        st.lr = lr;
        st.total = sum_total / double(n_seen);
        st.main = sum_main / double(n_seen);
        st.aux = sum_aux / double(n_seen);
        if (val.size() > 0) st.val_f1 = evaluate_encoder(enc, val, cfg.eval).f1;
        res.curve.push_back(st);
        res.completed_epochs = epoch;
        last_good = snapshot_values(model.params);
    }

    if (res.aborted) restore_values(model.params, last_good);
    if (test.size() > 0) res.test_report = evaluate_encoder(enc, test, cfg.eval);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        res.checkpoint_path = out_dir + "/model.ckpt";
        save_checkpoint(model.params, checkpoint_meta(cfg, seed), res.checkpoint_path);
    }
    return res;
}

TrainResult train_one_seed(const ExperimentConfig& cfg, uint64_t seed,
                           const Dataset& train, const Dataset& val,
                           const Dataset& test, const std::string& out_dir) {
    return cfg.mode == TrainMode::baseline
               ? train_baseline(cfg, seed, train, val, test, out_dir)
               : train_self_supervised(cfg, seed, train, val, test, out_dir);
}

}  // namespace graphae
