#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace graphae {

enum class SimilarityKind { ms_ssim, ssim };
enum class LossTarget { refined, coarse };

const char* similarity_name(SimilarityKind k);
const char* loss_target_name(LossTarget t);
SimilarityKind similarity_from_name(const std::string& s);
LossTarget loss_target_from_name(const std::string& s);

struct LossConfig {
    double lambda_aux = 1.0;
    SimilarityKind similarity = SimilarityKind::ms_ssim;
    LossTarget target = LossTarget::refined;
    int ms_ssim_scales = 4;
    int window = 11;
};

// single-scale SSIM, mean per sample -> [B]; Gaussian window 11, sigma 1.5,
// C1=(0.01)^2, C2=(0.03)^2 on unit dynamic range
template <typename S>
Tensor<S> ssim_per_sample(const Tensor<S>& a, const Tensor<S>& b, int window = 11);

// multi-scale SSIM over dyadic scales (contrast-structure term at the finer
// scales, full SSIM only at the coarsest), standard weights renormalized
template <typename S>
Tensor<S> ms_ssim_per_sample(const Tensor<S>& a, const Tensor<S>& b, int scales = 4,
                             int window = 11);

// channel-overlap penalty on attention maps: each channel normalized by its
// own max, channels summed per cell, ReLU(sum-1)^2 averaged over cells -> [B]
template <typename S>
Tensor<S> aux_per_sample(const Tensor<S>& attention);

// 1 for samples whose value is strictly below the vector mean, else 0
template <typename S>
std::vector<S> below_mean_mask(const Tensor<S>& per_sample);

template <typename S>
struct LossBundle {
    Tensor<S> total;       // scalar: main + lambda * aux
    Tensor<S> main;        // scalar: 1 - mean similarity
    Tensor<S> aux;         // scalar: batch mean of the gated per-sample aux
    Tensor<S> similarity;  // [B] per-sample similarity of the configured target
};

template <typename S>
LossBundle<S> compute_losses(const Tensor<S>& coarse, const Tensor<S>& refined,
                             const Tensor<S>& attention, const Tensor<S>& input,
                             const LossConfig& cfg);

}  // namespace graphae
