#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dataset/dataset.hpp"
#include "eval/metrics.hpp"
#include "harness/config.hpp"
#include "model/decoder.hpp"
#include "model/encoder.hpp"

namespace graphae {

// encoder (+ optional decoder) assembled from one config, with every
// parameter registered in a single flat store for optimizer/checkpoint use
template <typename S>
struct AutoEncoder {
    std::unique_ptr<Encoder<S>> encoder;
    std::unique_ptr<Decoder<S>> decoder;  // absent in baseline mode
    nn::ParamStore<S> params;

    static AutoEncoder make(const ExperimentConfig& cfg, uint64_t init_seed,
                            bool with_decoder);
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double lr = 0;
    double total = 0;  // epoch means over training samples
    double main = 0;
    double aux = 0;
    double val_f1 = -1;
};

struct TrainResult {
    std::vector<EpochStats> curve;
    bool aborted = false;  // non-finite loss; parameters restored to last-good
    int completed_epochs = 0;
    EvalReport test_report;
    std::string checkpoint_path;  // empty when no out_dir was given
};

// full training of one seed; writes <out_dir>/model.ckpt when out_dir is
// non-empty. Per-epoch F1 is measured on val; the final report on test.
TrainResult train_self_supervised(const ExperimentConfig& cfg, uint64_t seed,
                                  const Dataset& train, const Dataset& val,
                                  const Dataset& test, const std::string& out_dir);

TrainResult train_baseline(const ExperimentConfig& cfg, uint64_t seed,
                           const Dataset& train, const Dataset& val,
                           const Dataset& test, const std::string& out_dir);

// dispatch on cfg.mode
TrainResult train_one_seed(const ExperimentConfig& cfg, uint64_t seed,
                           const Dataset& train, const Dataset& val,
                           const Dataset& test, const std::string& out_dir);

}  // namespace graphae
