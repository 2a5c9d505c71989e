#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "doctest.h"
#include "harness/checkpoint.hpp"
#include "harness/config.hpp"
#include "harness/evaluate.hpp"
#include "harness/experiments.hpp"
#include "harness/report.hpp"
#include "harness/trainer.hpp"
#include "json.hpp"

using namespace graphae;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// a configuration small enough to train in seconds
ExperimentConfig micro_config(TrainMode mode) {
    auto cfg = default_config(mode);
    cfg.n_seeds = 1;
    cfg.data.n_samples = 24;
    cfg.data.seed = 5;
    cfg.optimizer.batch_size = 8;
    cfg.optimizer.micro_batch = 4;
    cfg.schedule.epochs = 2;
    cfg.schedule.decay_epoch = 2;
    cfg.eval.batch_size = 8;
    cfg.baseline_stage1_epochs = 1;
    return cfg;
}

SplitDatasets micro_data(const ExperimentConfig& cfg) {
    SplitDatasets d;
    d.train = Dataset::synth(cfg.data.n_samples, cfg.data.seed, cfg.data.gen, -1);
    d.val = Dataset::synth(8, cfg.data.seed + 1, cfg.data.gen, -1);
    d.test = Dataset::synth(8, cfg.data.seed + 2, cfg.data.gen, -1);
    return d;
}

}  // namespace

TEST_CASE("the learning rate drops exactly once, at the configured epoch") {
    ScheduleConfig s;  // 5e-4, 30 epochs, drop at 21, x0.1
    int drops = 0;
    double prev = lr_at_epoch(s, 1);
    CHECK(prev == doctest::Approx(5e-4));
    for (int e = 2; e <= s.epochs; ++e) {
        const double lr = lr_at_epoch(s, e);
        if (lr != prev) {
            ++drops;
            CHECK(e == s.decay_epoch);
            CHECK(lr == doctest::Approx(prev * s.decay_factor));
        }
        prev = lr;
    }
    CHECK(drops == 1);
    CHECK(lr_at_epoch(s, 25) == doctest::Approx(5e-5));

    const auto base = default_config(TrainMode::baseline).schedule;
    CHECK(lr_at_epoch(base, 1) == doctest::Approx(3e-4));
    CHECK(lr_at_epoch(base, base.decay_epoch) == doctest::Approx(3e-5));
    CHECK(lr_at_epoch(base, base.epochs) == doctest::Approx(3e-5));
}

TEST_CASE("experiment configs survive the JSON round trip") {
    auto cfg = default_config(TrainMode::baseline);
    cfg.seed = 42;
    cfg.n_seeds = 3;
    cfg.n_max = 6;
    cfg.data.dir = "/data/somewhere";
    cfg.data.n_samples = 1234;
    cfg.data.seed = 99;
    cfg.data.gen.stroke_width = 3.0;
    cfg.optimizer.batch_size = 64;
    cfg.optimizer.micro_batch = 16;
    cfg.optimizer.beta1 = 0.5;
    cfg.optimizer.weight_decay = 0.01;
    cfg.schedule.initial_lr = 1e-3;
    cfg.schedule.epochs = 7;
    cfg.schedule.decay_epoch = 5;
    cfg.schedule.decay_factor = 0.5;
    cfg.loss.lambda_aux = 0.25;
    cfg.loss.similarity = SimilarityKind::ssim;
    cfg.loss.target = LossTarget::coarse;
    cfg.eval.threshold = 0.4;
    cfg.eval.merge_radius = 6.0;
    cfg.eval.tol = 10.0;
    cfg.baseline_stage1_epochs = 3;

    auto back = config_from_json(config_to_json(cfg));
    CHECK(back.seed == cfg.seed);
    CHECK(back.n_seeds == cfg.n_seeds);
    CHECK(back.n_max == cfg.n_max);
    CHECK(back.mode == cfg.mode);
    CHECK(back.data.dir == cfg.data.dir);
    CHECK(back.data.n_samples == cfg.data.n_samples);
    CHECK(back.data.seed == cfg.data.seed);
    CHECK(back.data.gen.stroke_width == cfg.data.gen.stroke_width);
    CHECK(back.optimizer.batch_size == cfg.optimizer.batch_size);
    CHECK(back.optimizer.micro_batch == cfg.optimizer.micro_batch);
    CHECK(back.optimizer.beta1 == cfg.optimizer.beta1);
    CHECK(back.optimizer.weight_decay == cfg.optimizer.weight_decay);
    CHECK(back.schedule.initial_lr == cfg.schedule.initial_lr);
    CHECK(back.schedule.epochs == cfg.schedule.epochs);
    CHECK(back.schedule.decay_epoch == cfg.schedule.decay_epoch);
    CHECK(back.schedule.decay_factor == cfg.schedule.decay_factor);
    CHECK(back.loss.lambda_aux == cfg.loss.lambda_aux);
    CHECK(back.loss.similarity == cfg.loss.similarity);
    CHECK(back.loss.target == cfg.loss.target);
    CHECK(back.eval.threshold == cfg.eval.threshold);
    CHECK(back.eval.merge_radius == cfg.eval.merge_radius);
    CHECK(back.eval.tol == cfg.eval.tol);
    CHECK(back.baseline_stage1_epochs == cfg.baseline_stage1_epochs);

    TempDir tmp("graphae_test_cfg");
    save_config(cfg, (tmp.path / "cfg.json").string());
    auto loaded = load_config((tmp.path / "cfg.json").string());
    CHECK(loaded.schedule.initial_lr == cfg.schedule.initial_lr);
    CHECK(loaded.mode == TrainMode::baseline);
}

TEST_CASE("seed statistics use the population spread") {
    auto s = aggregate({60.0, 70.0, 80.0});
    CHECK(s.mean == doctest::Approx(70.0));
    CHECK(s.stddev == doctest::Approx(std::sqrt(200.0 / 3.0)));  // 8.1649658...
    CHECK(s.n == 3);

    auto one = aggregate({42.0});
    CHECK(one.mean == doctest::Approx(42.0));
    CHECK(one.stddev == 0.0);
    CHECK(one.n == 1);
}

TEST_CASE("ground-truth graphs pass the triplet pipeline losslessly") {
    GenConfig gc;
    auto ds = Dataset::synth(200, 31, gc, -1);
    EvalConfig eval;  // threshold .5, merge 8, tol 8
    MatchCounts total;
    for (int64_t i = 0; i < ds.size(); ++i) {
        const auto& rec = ds.record(i);
        const int n = int(rec.node_coords.size());
        std::vector<std::array<double, 2>> coords(static_cast<size_t>(n));
        std::vector<double> probs(static_cast<size_t>(n) * n, 0.0);
        for (int k = 0; k < n; ++k)
            coords[size_t(k)] = {double(rec.node_coords[size_t(k)][0]),
                                 double(rec.node_coords[size_t(k)][1])};
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                probs[size_t(a * n + b)] = double(rec.adjacency[size_t(a)][size_t(b)]);

        auto pred = predicted_triplets(coords, probs, n, eval);
        auto gt = gt_triplets_px(rec);
        auto mc = match(pred, gt, eval.tol);
        CHECK(mc.fp == 0);
        CHECK(mc.fn == 0);
        CHECK(mc.tp == int64_t(gt.size()));
        total += mc;
    }
    auto rep = finalize_report(total, eval.threshold, eval.merge_radius, eval.tol);
    CHECK(rep.f1 == 1.0);  // exact, not approximate
    CHECK(rep.precision == 1.0);
    CHECK(rep.recall == 1.0);
}

TEST_CASE("checkpoints restore parameters, buffers, and behavior exactly") {
    auto cfg = micro_config(TrainMode::self_supervised);
    auto model = AutoEncoder<float>::make(cfg, 9, true);

    GenConfig gc;
    auto ds = Dataset::synth(4, 77, gc, -1);
    auto batch = make_batch<float>(ds, {0, 1}, cfg.n_max);

    // a training-mode pass gives the batch-norm buffers non-default content
    (void)model.encoder->encode(batch.images, true);
    auto before = model.encoder->encode(batch.images, false);

    TempDir tmp("graphae_test_ckpt");
    const auto path = (tmp.path / "model.ckpt").string();
    save_checkpoint(model.params, "{\"note\":\"test\"}", path);

    auto fresh = AutoEncoder<float>::make(cfg, 1234, true);
    auto meta = load_checkpoint(fresh.params, path);
    CHECK(nlohmann::json::parse(meta)["note"] == "test");

    REQUIRE(fresh.params.params.size() == model.params.params.size());
    for (size_t k = 0; k < model.params.params.size(); ++k) {
        const auto& [name_a, ta] = model.params.params[k];
        const auto& [name_b, tb] = fresh.params.params[k];
        CHECK(name_a == name_b);
        REQUIRE(ta.numel() == tb.numel());
        for (int64_t q = 0; q < ta.numel(); ++q)
            CHECK(ta.data()[q] == tb.data()[q]);
    }
    for (size_t k = 0; k < model.params.buffers.size(); ++k)
        CHECK(*model.params.buffers[k].second == *fresh.params.buffers[k].second);

    auto after = fresh.encoder->encode(batch.images, false);
    for (int64_t q = 0; q < before.probs.numel(); ++q)
        CHECK(before.probs.data()[q] == after.probs.data()[q]);
    for (int64_t q = 0; q < before.coords.numel(); ++q)
        CHECK(before.coords.data()[q] == after.coords.data()[q]);
}

TEST_CASE("miniature self-supervised training is deterministic and well-formed") {
    auto cfg = micro_config(TrainMode::self_supervised);
    auto data = micro_data(cfg);

    auto r1 = train_self_supervised(cfg, 3, data.train, data.val, data.test, "");
    auto r2 = train_self_supervised(cfg, 3, data.train, data.val, data.test, "");

    REQUIRE(r1.curve.size() == 2);
    CHECK(r1.completed_epochs == 2);
    CHECK(!r1.aborted);
    CHECK(r1.checkpoint_path.empty());
    CHECK(r1.curve[0].epoch == 1);
    CHECK(r1.curve[1].epoch == 2);
    CHECK(r1.curve[0].lr == doctest::Approx(cfg.schedule.initial_lr));
    CHECK(r1.curve[1].lr == doctest::Approx(cfg.schedule.initial_lr *
                                            cfg.schedule.decay_factor));
    for (const auto& e : r1.curve) {
        CHECK(std::isfinite(e.total));
        CHECK(std::isfinite(e.main));
        CHECK(std::isfinite(e.aux));
        CHECK(e.val_f1 >= 0.0);
        CHECK(e.val_f1 <= 100.0);
        // the composition holds in the epoch means as well
        CHECK(e.total ==
              doctest::Approx(e.main + cfg.loss.lambda_aux * e.aux).epsilon(1e-5));
    }

    // bit-for-bit reproducibility of the whole run
    REQUIRE(r2.curve.size() == r1.curve.size());
    for (size_t k = 0; k < r1.curve.size(); ++k) {
        CHECK(r1.curve[k].total == r2.curve[k].total);
        CHECK(r1.curve[k].main == r2.curve[k].main);
        CHECK(r1.curve[k].aux == r2.curve[k].aux);
        CHECK(r1.curve[k].val_f1 == r2.curve[k].val_f1);
    }
    CHECK(r1.test_report.tp == r2.test_report.tp);
    CHECK(r1.test_report.fp == r2.test_report.fp);
    CHECK(r1.test_report.fn == r2.test_report.fn);
    CHECK(r1.test_report.f1 == r2.test_report.f1);

    // a different seed takes a different path
    auto r3 = train_self_supervised(cfg, 4, data.train, data.val, data.test, "");
    bool differs = false;
    for (size_t k = 0; k < r1.curve.size(); ++k)
        differs = differs || r1.curve[k].total != r3.curve[k].total;
    CHECK(differs);
}

TEST_CASE("miniature baseline training runs both stages") {
    auto cfg = micro_config(TrainMode::baseline);
    auto data = micro_data(cfg);

    TempDir tmp("graphae_test_baseline_run");
    auto r = train_baseline(cfg, 3, data.train, data.val, data.test, tmp.path.string());
    REQUIRE(r.curve.size() == 2);  // stage 1: epoch 1; stage 2: epoch 2
    CHECK(!r.aborted);
    for (const auto& e : r.curve) CHECK(std::isfinite(e.total));
    CHECK(fs::exists(r.checkpoint_path));

    // the checkpoint must load back into a fresh baseline model
    auto fresh = AutoEncoder<float>::make(cfg, 1, false);
    CHECK(!fresh.decoder);
    (void)load_checkpoint(fresh.params, r.checkpoint_path);
}

TEST_CASE("multi-seed runs aggregate and their artifacts parse back") {
    auto cfg = micro_config(TrainMode::self_supervised);
    cfg.n_seeds = 2;
    cfg.schedule.epochs = 1;
    cfg.schedule.decay_epoch = 1;
    auto data = micro_data(cfg);

    TempDir tmp("graphae_test_runseeds");
    auto rr = run_seeds(cfg, data, tmp.path.string());
    REQUIRE(rr.runs.size() == 2);
    CHECK(rr.runs[0].seed == cfg.seed);
    CHECK(rr.runs[1].seed == cfg.seed + 1);
    CHECK(rr.f1_all.n == 2);
    CHECK(rr.n_failed == 0);
    CHECK(!rr.single_seed_caveat);
    CHECK(fs::exists(tmp.path / "seed_1" / "model.ckpt"));
    CHECK(fs::exists(tmp.path / "seed_2" / "model.ckpt"));

    write_run_json(rr, (tmp.path / "runs.json").string());
    std::ifstream in(tmp.path / "runs.json");
    auto j = nlohmann::json::parse(in);
    CHECK(j["aggregate"]["n_seeds"] == 2);
    CHECK(j["aggregate"]["std_kind"] == "population");
    CHECK(j["aggregate"].contains("f1_mean"));
    CHECK(j["aggregate"].contains("f1_std"));
    CHECK(j["seeds"].size() == 2);
    CHECK(j["config"]["n_seeds"] == 2);
    CHECK(double(j["aggregate"]["f1_mean"]) == doctest::Approx(rr.f1_ok.mean));

    // the single-seed caveat is surfaced
    cfg.n_seeds = 1;
    auto rr1 = run_seeds(cfg, data, "");
    CHECK(rr1.single_seed_caveat);
    CHECK(rr1.runs.size() == 1);

    // ablation tables: well-formed CSV with one line per row
    std::vector<AblationRow> rows;
    rows.push_back({"variant_a", rr});
    rows.push_back({"variant_b", rr1});
    write_ablation_csv(rows, (tmp.path / "table.csv").string());
    std::ifstream csv(tmp.path / "table.csv");
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(csv, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].rfind("label,", 0) == 0);
    CHECK(lines[1].rfind("variant_a,", 0) == 0);
    CHECK(lines[2].rfind("variant_b,", 0) == 0);
    for (const auto& l : lines)
        CHECK(std::count(l.begin(), l.end(), ',') ==
              std::count(lines[0].begin(), lines[0].end(), ','));
}

TEST_CASE("the sample grid renders every panel column") {
    auto cfg = micro_config(TrainMode::self_supervised);
    auto model = AutoEncoder<float>::make(cfg, 21, true);
    GenConfig gc;
    auto ds = Dataset::synth(6, 55, gc, -1);

    TempDir tmp("graphae_test_grid");
    const auto png = (tmp.path / "grid.png").string();
    render_sample_grid<float>(ds, {0, 2, 4}, *model.encoder, *model.decoder, nullptr,
                              cfg.eval, png);

    int w = 0, h = 0;
    auto img = read_png_gray(png, w, h);
    CHECK(w == kReportColumns * 128);
    CHECK(h == 3 * 128);
    REQUIRE(img.size() == size_t(w) * size_t(h));
    // the input panel of the first row contains the drawing's ink
    double ink = 0;
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) ink += img[size_t(y) * size_t(w) + x];
    CHECK(ink > 0.0);
}
