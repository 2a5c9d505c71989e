#include "harness/experiments.hpp"

#include <cmath>

#include "core/check.hpp"

namespace graphae {

SeedStats aggregate(const std::vector<double>& values) {
    SeedStats s;
    s.n = int(values.size());
    if (s.n == 0) return s;
    for (double v : values) s.mean += v;
    s.mean /= s.n;
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / s.n);
    return s;
}

SplitDatasets load_datasets(const DataConfig& d) {
    if (!d.dir.empty())
        return {Dataset::load(d.dir, 0), Dataset::load(d.dir, 1),
                Dataset::load(d.dir, 2)};
    return {Dataset::synth(d.n_samples, d.seed, d.gen, 0),
            Dataset::synth(d.n_samples, d.seed, d.gen, 1),
            Dataset::synth(d.n_samples, d.seed, d.gen, 2)};
}

RunResult run_seeds(const ExperimentConfig& cfg, const SplitDatasets& data,
                    const std::string& out_dir) {
    GA_CHECK(cfg.n_seeds >= 1, "run_seeds: n_seeds must be positive");
    RunResult rr;
    rr.config = cfg;
    rr.single_seed_caveat = cfg.n_seeds == 1;
    std::vector<double> f1_all, f1_ok;
    for (int i = 0; i < cfg.n_seeds; ++i) {
        const uint64_t seed = cfg.seed + uint64_t(i);
        const std::string seed_dir =
            out_dir.empty() ? "" : out_dir + "/seed_" + std::to_string(seed);
        SeedRun run;
        run.seed = seed;
        run.result = train_one_seed(cfg, seed, data.train, data.val, data.test, seed_dir);
        f1_all.push_back(run.result.test_report.f1);
        if (run.result.aborted)
            ++rr.n_failed;
        else
            f1_ok.push_back(run.result.test_report.f1);
        rr.runs.push_back(std::move(run));
    }
    rr.f1_all = aggregate(f1_all);
    rr.f1_ok = aggregate(f1_ok);
    return rr;
}

std::vector<AblationRow> run_ablation_nodes(const ExperimentConfig& base,
                                            const SplitDatasets& data,
                                            const std::string& out_dir) {
    std::vector<AblationRow> rows;
    for (int n_max : {4, 5, 6, 8}) {
        ExperimentConfig cfg = base;
        cfg.n_max = n_max;
        const std::string label = "nmax_" + std::to_string(n_max);
        rows.push_back(
            {label, run_seeds(cfg, data, out_dir.empty() ? "" : out_dir + "/" + label)});
    }
    return rows;
}

std::vector<AblationRow> run_ablation_losses(const ExperimentConfig& base,
                                             const SplitDatasets& data,
                                             const std::string& out_dir) {
    struct Row {
        const char* label;
        double lambda;
        SimilarityKind sim;
        LossTarget target;
    };
    const Row grid[] = {
        {"aux_ms_refined", 1.0, SimilarityKind::ms_ssim, LossTarget::refined},
        {"noaux_ms_refined", 0.0, SimilarityKind::ms_ssim, LossTarget::refined},
        {"aux_ssim_refined", 1.0, SimilarityKind::ssim, LossTarget::refined},
        {"aux_ms_coarse", 1.0, SimilarityKind::ms_ssim, LossTarget::coarse},
        {"aux_ssim_coarse", 1.0, SimilarityKind::ssim, LossTarget::coarse},
    };
    std::vector<AblationRow> rows;
    for (const Row& r : grid) {
        ExperimentConfig cfg = base;
        cfg.loss.lambda_aux = r.lambda;
        cfg.loss.similarity = r.sim;
        cfg.loss.target = r.target;
        rows.push_back({r.label, run_seeds(cfg, data,
                                           out_dir.empty() ? "" : out_dir + "/" + r.label)});
    }
    return rows;
}

}  // namespace graphae
