#pragma once

#include <string>
#include <vector>

#include "harness/evaluate.hpp"
#include "harness/experiments.hpp"

namespace graphae {

// panel order of a grid row: input | gt graph | coarse | refined |
// predicted graph | predicted adjacency | baseline graph | baseline adjacency
constexpr int kReportColumns = 8;

// one grid row per requested sample; baseline panels stay black when no
// baseline encoder is supplied
template <typename S>
void render_sample_grid(const Dataset& ds, const std::vector<int64_t>& indices,
                        Encoder<S>& enc, Decoder<S>& dec, Encoder<S>* baseline_enc,
                        const EvalConfig& eval, const std::string& out_png);

void write_run_json(const RunResult& rr, const std::string& path);
void write_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path);

// full bundle under out_dir: metrics.json + grid.png
template <typename S>
void render_report(const RunResult& rr, const Dataset& ds,
                   const std::vector<int64_t>& indices, Encoder<S>& enc, Decoder<S>& dec,
                   Encoder<S>* baseline_enc, const std::string& out_dir);

}  // namespace graphae
