#pragma once

#include <array>
#include <vector>

#include "core/tensor.hpp"

namespace graphae {
namespace ops {

// ---- elementwise -----------------------------------------------------------

template <typename S> Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> add_scalar(const Tensor<S>& a, S c);
template <typename S> Tensor<S> mul_scalar(const Tensor<S>& a, S c);
// a^p for a > 0
template <typename S> Tensor<S> pow_scalar(const Tensor<S>& a, S p);
template <typename S> Tensor<S> log(const Tensor<S>& a);
template <typename S> Tensor<S> relu(const Tensor<S>& a);
// single learnable slope, alpha has shape {1}
template <typename S> Tensor<S> prelu(const Tensor<S>& a, const Tensor<S>& alpha);
template <typename S> Tensor<S> sigmoid(const Tensor<S>& a);
template <typename S> Tensor<S> clamp01(const Tensor<S>& a);
// max(a, lo); gradient passes where a > lo
template <typename S> Tensor<S> clamp_min(const Tensor<S>& a, S lo);
// elementwise product with a constant (no gradient to c)
template <typename S> Tensor<S> mul_const(const Tensor<S>& a, const std::vector<S>& c);

// ---- shape -----------------------------------------------------------------

template <typename S> Tensor<S> reshape(const Tensor<S>& a, const std::vector<int>& shape);
// (A + A^T)/2 per sample with zero diagonal, a is [B,N,N]
template <typename S> Tensor<S> sym_zero_diag(const Tensor<S>& a);

// ---- reductions ------------------------------------------------------------

template <typename S> Tensor<S> mean_all(const Tensor<S>& a);
// [B, ...] -> [B], mean over trailing dims
template <typename S> Tensor<S> mean_per_sample(const Tensor<S>& a);
// sum_i a[i] * w[i] -> scalar (w constant)
template <typename S> Tensor<S> dot_const(const Tensor<S>& a, const std::vector<S>& w);
// [B,C,H,W] -> [B,C] spatial max (gradient routed to first argmax)
template <typename S> Tensor<S> chan_max(const Tensor<S>& a);
// x[B,C,H,W] / m[B,C] broadcast over space
template <typename S> Tensor<S> div_by_chan(const Tensor<S>& x, const Tensor<S>& m);
// [B,C,H,W] -> [B,1,H,W] sum over channels
template <typename S> Tensor<S> sum_channels(const Tensor<S>& a);

// ---- neural layers ---------------------------------------------------------

template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                 int stride, int pad);

template <typename S> Tensor<S> maxpool2(const Tensor<S>& x);
template <typename S> Tensor<S> avgpool2(const Tensor<S>& x);

template <typename S>
Tensor<S> batchnorm2d(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta,
                      std::vector<S>& running_mean, std::vector<S>& running_var,
                      bool training, S momentum, S eps);

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b);

// per-channel softmax over the spatial grid; logits divided by temperature
template <typename S> Tensor<S> softmax2d(const Tensor<S>& x, S temperature);

// probability maps [B,C,h,w] -> coordinates [B,C,2] as (x, y) in [-1,1],
// templates span pixel centers: X[j] = (2j+1)/w - 1
template <typename S> Tensor<S> dsnt(const Tensor<S>& p);

// ---- bespoke spatial ops ---------------------------------------------------

// For every ordered node pair (i,j) of every sample: axis-aligned box with the
// two node positions as corners, each side expanded to at least min_side_px,
// bilinearly resampled from the image to roi x roi. Output [B*N*N, 1, roi, roi].
// Differentiable w.r.t. coords (normalized [-1,1]); the image is treated as data.
template <typename S>
Tensor<S> roi_pairs(const Tensor<S>& image, const Tensor<S>& coords, int roi,
                    S min_side_px);

struct EdgeTemplateGeom {
    int width = 64, height = 8;
    double ax0 = 4, ay0 = 4;   // anchor of the first endpoint
    double ax1 = 60, ay1 = 4;  // anchor of the second endpoint
};

/// Differentiable drawing: for each unordered pair (i<j), warp the template so
// its anchors land on the two node positions (unit scale across the stroke),
// scale intensity by probs[i][j] and sum onto the canvas. No clamping here.
// Pairs closer than min_len_px are skipped. Output [B,1,canvas,canvas].
template <typename S>
Tensor<S> draw_edges(const Tensor<S>& coords, const Tensor<S>& probs,
                     const std::vector<S>& tmpl, const EdgeTemplateGeom& geom,
                     int canvas, S min_len_px);

// valid-mode 1-D convolution along W (horizontal=true) or H with a fixed kernel
template <typename S>
Tensor<S> blur1d(const Tensor<S>& x, const std::vector<S>& kernel, bool horizontal);

}  // namespace ops
}  // namespace graphae
