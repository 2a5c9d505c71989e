#pragma once

#include <string>
#include <vector>

#include "harness/trainer.hpp"

namespace graphae {

struct SeedStats {
    double mean = 0;
    double stddev = 0;  // population std (divide by n)
    int n = 0;
};

SeedStats aggregate(const std::vector<double>& values);

struct SeedRun {
    uint64_t seed = 0;
    TrainResult result;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<SeedRun> runs;
    // every seed counted; aborted runs enter with the F1 of their restored
    // last-good parameters
    SeedStats f1_all;
    // aborted seeds excluded
    SeedStats f1_ok;
    int n_failed = 0;
    bool single_seed_caveat = false;  // std over one run is vacuous
};

struct SplitDatasets {
    Dataset train, val, test;
};

// disk-backed when cfg.dir is set, synthesized in memory otherwise
SplitDatasets load_datasets(const DataConfig& d);

// seeds {cfg.seed .. cfg.seed + n_seeds - 1} trained independently on the
// same data; per-seed artifacts land in <out_dir>/seed_<s> when out_dir set
RunResult run_seeds(const ExperimentConfig& cfg, const SplitDatasets& data,
                    const std::string& out_dir);

struct AblationRow {
    std::string label;
    RunResult result;
};

// channel-budget sweep: n_max in {4, 5, 6, 8}
std::vector<AblationRow> run_ablation_nodes(const ExperimentConfig& base,
                                            const SplitDatasets& data,
                                            const std::string& out_dir);
// loss matrix: {aux on/off} x {ms_ssim, ssim} x {refined, coarse}, the five
// informative rows (aux-off only for the default similarity/target)
std::vector<AblationRow> run_ablation_losses(const ExperimentConfig& base,
                                             const SplitDatasets& data,
                                             const std::string& out_dir);

}  // namespace graphae
