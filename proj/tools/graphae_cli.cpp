// command-line front end: dataset generation, training, evaluation,
// ablations, and report rendering
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "core/check.hpp"
#include "harness/checkpoint.hpp"
#include "harness/config.hpp"
#include "harness/evaluate.hpp"
#include "harness/experiments.hpp"
#include "harness/report.hpp"
#include "harness/trainer.hpp"

namespace ga = graphae;

namespace {

int split_from_name(const std::string& s) {
    if (s == "train") return 0;
    if (s == "val") return 1;
    if (s == "test") return 2;
    GA_CHECK(false, "unknown split: " + s);
    return -1;
}

// rebuild the model a checkpoint was trained with and restore its weights
ga::AutoEncoder<float> load_model(const std::string& ckpt,
                                  ga::ExperimentConfig* cfg_out) {
    ga::ArrayFile af = ga::ArrayFile::load(ckpt);
    ga::ExperimentConfig cfg = ga::config_from_json(af.meta);
    auto model = ga::AutoEncoder<float>::make(
        cfg, cfg.seed, cfg.mode == ga::TrainMode::self_supervised);
    ga::params_from_arrays(model.params, af);
    if (cfg_out) *cfg_out = cfg;
    return model;
}

ga::Dataset load_split(const ga::DataConfig& data, const std::string& dir_override,
                       int split) {
    const std::string dir = dir_override.empty() ? data.dir : dir_override;
    if (!dir.empty()) return ga::Dataset::load(dir, split);
    return ga::Dataset::synth(data.n_samples, data.seed, data.gen, split);
}

void print_report(const ga::EvalReport& r) {
    std::printf("precision %.4f  recall %.4f  f1 %.4f  (tp %lld fp %lld fn %lld)\n",
                r.precision, r.recall, r.f1, (long long)r.tp, (long long)r.fp,
                (long long)r.fn);
}

int run_training(const std::string& config_path, const std::string& out_dir,
                 int n_seeds_override, ga::TrainMode mode) {
    ga::ExperimentConfig cfg = ga::load_config(config_path);
    cfg.mode = mode;
    if (n_seeds_override > 0) cfg.n_seeds = n_seeds_override;
    std::filesystem::create_directories(out_dir);
    ga::save_config(cfg, out_dir + "/config.json");
    auto data = ga::load_datasets(cfg.data);
    std::printf("data: train %lld / val %lld / test %lld\n", (long long)data.train.size(),
                (long long)data.val.size(), (long long)data.test.size());
    auto rr = ga::run_seeds(cfg, data, out_dir);
    ga::write_run_json(rr, out_dir + "/runs.json");
    std::printf("f1 %.2f +/- %.2f over %d seeds (%d failed)\n", 100.0 * rr.f1_ok.mean,
                100.0 * rr.f1_ok.stddev, int(rr.runs.size()), rr.n_failed);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph auto-encoder experiments"};
    app.require_subcommand(1);

    // ---- gen-data ----
    int gd_n = 50000;
    uint64_t gd_seed = 7;
    std::string gd_out;
    ga::GenConfig gd_gen;
    auto* gen = app.add_subcommand("gen-data", "synthesize a dataset to disk");
    gen->add_option("--n", gd_n, "sample count");
    gen->add_option("--seed", gd_seed, "generation seed");
    gen->add_option("--out", gd_out, "output directory")->required();
    gen->add_option("--canvas", gd_gen.canvas, "canvas size in pixels");
    gen->add_option("--stroke", gd_gen.stroke_width, "stroke width in pixels");

    // ---- train / train-baseline ----
    std::string tr_config, tr_out;
    int tr_seeds = 0;
    auto* train = app.add_subcommand("train", "train the self-supervised model");
    train->add_option("--config", tr_config, "experiment config JSON")->required();
    train->add_option("--out", tr_out, "output directory")->required();
    train->add_option("--seeds", tr_seeds, "override n_seeds");

    std::string tb_config, tb_out;
    int tb_seeds = 0;
    auto* trainb = app.add_subcommand("train-baseline", "train the supervised baseline");
    trainb->add_option("--config", tb_config, "experiment config JSON")->required();
    trainb->add_option("--out", tb_out, "output directory")->required();
    trainb->add_option("--seeds", tb_seeds, "override n_seeds");

    // ---- eval ----
    std::string ev_ckpt, ev_data, ev_split = "test", ev_out;
    double ev_tol = 8.0, ev_merge = 8.0, ev_threshold = 0.5;
    auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint");
    evalc->add_option("--ckpt", ev_ckpt, "checkpoint path")->required();
    evalc->add_option("--data-dir", ev_data, "dataset directory override");
    evalc->add_option("--split", ev_split, "train|val|test");
    evalc->add_option("--tol", ev_tol, "matching tolerance in pixels");
    evalc->add_option("--merge", ev_merge, "dedup merge radius in pixels");
    evalc->add_option("--threshold", ev_threshold, "edge probability threshold");
    evalc->add_option("--out", ev_out, "write the report JSON here");

    // ---- ablate ----
    std::string ab_which, ab_config, ab_out;
    auto* ablate = app.add_subcommand("ablate", "run an ablation study");
    ablate->add_option("--which", ab_which, "nodes|losses")->required();
    ablate->add_option("--config", ab_config, "experiment config JSON")->required();
    ablate->add_option("--out", ab_out, "output directory")->required();

    // ---- render-report ----
    std::string rp_ckpt, rp_baseline, rp_data, rp_out;
    int rp_samples = 8;
    auto* report = app.add_subcommand("render-report", "render image grids + metrics");
    report->add_option("--ckpt", rp_ckpt, "self-supervised checkpoint")->required();
    report->add_option("--baseline-ckpt", rp_baseline, "baseline checkpoint");
    report->add_option("--data-dir", rp_data, "dataset directory override");
    report->add_option("--out", rp_out, "output directory")->required();
    report->add_option("--samples", rp_samples, "grid rows");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto manifest = ga::generate_dataset(gd_n, gd_seed, gd_out, gd_gen);
            int counts[3] = {0, 0, 0};
            for (const auto& r : manifest.records) ++counts[r.split];
            std::printf("wrote %zu samples (train %d / val %d / test %d) to %s\n",
                        manifest.records.size(), counts[0], counts[1], counts[2],
                        gd_out.c_str());
        } else if (train->parsed()) {
            return run_training(tr_config, tr_out, tr_seeds,
                                ga::TrainMode::self_supervised);
        } else if (trainb->parsed()) {
            return run_training(tb_config, tb_out, tb_seeds, ga::TrainMode::baseline);
        } else if (evalc->parsed()) {
            ga::ExperimentConfig cfg;
            auto model = load_model(ev_ckpt, &cfg);
            cfg.eval.tol = ev_tol;
            cfg.eval.merge_radius = ev_merge;
            cfg.eval.threshold = ev_threshold;
            auto ds = load_split(cfg.data, ev_data, split_from_name(ev_split));
            auto rep = ga::evaluate_encoder(*model.encoder, ds, cfg.eval);
            print_report(rep);
            // tolerance sweep for transparency about the matching radius
            for (double tol : {4.0, 8.0, 16.0}) {
                ga::EvalConfig sweep = cfg.eval;
                sweep.tol = tol;
                std::printf("  tol %4.1f px: f1 %.4f\n", tol,
                            ga::evaluate_encoder(*model.encoder, ds, sweep).f1);
            }
            if (!ev_out.empty()) {
                ga::RunResult rr;
                rr.config = cfg;
                ga::SeedRun run;
                run.seed = cfg.seed;
                run.result.test_report = rep;
                run.result.completed_epochs = cfg.schedule.epochs;
                rr.runs.push_back(std::move(run));
                rr.f1_all = rr.f1_ok = ga::aggregate({rep.f1});
                rr.single_seed_caveat = true;
                ga::write_run_json(rr, ev_out);
            }
        } else if (ablate->parsed()) {
            ga::ExperimentConfig cfg = ga::load_config(ab_config);
            std::filesystem::create_directories(ab_out);
            auto data = ga::load_datasets(cfg.data);
            std::vector<ga::AblationRow> rows;
            if (ab_which == "nodes")
                rows = ga::run_ablation_nodes(cfg, data, ab_out);
            else if (ab_which == "losses")
                rows = ga::run_ablation_losses(cfg, data, ab_out);
            else
                GA_CHECK(false, "ablate --which must be nodes or losses");
            ga::write_ablation_csv(rows, ab_out + "/table.csv");
            for (const auto& r : rows)
                std::printf("%-18s f1 %.2f +/- %.2f\n", r.label.c_str(),
                            100.0 * r.result.f1_ok.mean, 100.0 * r.result.f1_ok.stddev);
        } else if (report->parsed()) {
            ga::ExperimentConfig cfg;
            auto model = load_model(rp_ckpt, &cfg);
            GA_CHECK(model.decoder != nullptr,
                     "render-report needs a self-supervised checkpoint");
            ga::AutoEncoder<float> baseline;
            if (!rp_baseline.empty()) baseline = load_model(rp_baseline, nullptr);
            auto ds = load_split(cfg.data, rp_data, 2);
            std::filesystem::create_directories(rp_out);
            std::vector<int64_t> idx(size_t(std::min<int64_t>(rp_samples, ds.size())));
            std::iota(idx.begin(), idx.end(), int64_t(0));
            ga::render_sample_grid(ds, idx, *model.encoder, *model.decoder,
                                   baseline.encoder ? baseline.encoder.get() : nullptr,
                                   cfg.eval, rp_out + "/grid.png");
            auto rep = ga::evaluate_encoder(*model.encoder, ds, cfg.eval);
            print_report(rep);
            std::printf("wrote %s/grid.png\n", rp_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
