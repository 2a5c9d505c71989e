#pragma once

#include <cstdint>
#include <string>

#include "dataset/dataset.hpp"
#include "model/losses.hpp"

namespace graphae {

enum class TrainMode { self_supervised, baseline };

const char* train_mode_name(TrainMode m);
TrainMode train_mode_from_name(const std::string& s);

struct OptimizerConfig {
    std::string kind = "adam";
    int batch_size = 128;
    // gradient-accumulation chunk; the optimizer steps once per full batch
    // and losses are averaged as if the full batch were a single forward
    int micro_batch = 32;
    double beta1 = 0.6;
    double beta2 = 0.9;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

struct ScheduleConfig {
    double initial_lr = 5e-4;
    int epochs = 30;
    // 1-based epoch at which the single drop by decay_factor lands; epochs
    // decay_epoch..epochs run at the reduced rate
    int decay_epoch = 21;
    double decay_factor = 0.1;
};

// learning rate for a 1-based epoch index: exactly one drop at decay_epoch
double lr_at_epoch(const ScheduleConfig& s, int epoch);

struct EvalConfig {
    double threshold = 0.5;
    double merge_radius = 8.0;
    double tol = 8.0;
    int batch_size = 64;
};

struct DataConfig {
    std::string dir;        // when set, load a generated dataset from disk
    int n_samples = 50000;  // synthesized in memory when dir is empty
    uint64_t seed = 7;
    GenConfig gen;
};

struct ExperimentConfig {
    uint64_t seed = 1;
    int n_seeds = 10;
    int n_max = 4;
    TrainMode mode = TrainMode::self_supervised;
    DataConfig data;
    OptimizerConfig optimizer;
    ScheduleConfig schedule;
    LossConfig loss;
    EvalConfig eval;
    int baseline_stage1_epochs = 2;  // node-attention warmup before the freeze
};

// mode-appropriate defaults: the two modes differ in their schedule
ExperimentConfig default_config(TrainMode mode);

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
void save_config(const ExperimentConfig& cfg, const std::string& path);
ExperimentConfig load_config(const std::string& path);

}  // namespace graphae
