#pragma once

#include <string>

#include "core/nn.hpp"
#include "core/tensor.hpp"

namespace graphae {

struct EncoderConfig {
    int n_max = 4;
    int canvas = 128;
    int roi_size = 16;
    double roi_min_side_px = 8.0;
    double softmax_temperature = 1.0;
};

template <typename S>
struct PredictedGraph {
    Tensor<S> attention;  // [B, n_max, 32, 32], channels sum to 1
    Tensor<S> coords;     // [B, n_max, 2], normalized [-1,1]
    Tensor<S> logits;     // [B, n_max, n_max], raw pair scores
    Tensor<S> probs;      // [B, n_max, n_max], symmetric, zero diagonal
};

// 1x1 -> 3x3 -> 1x1 bottleneck with projection shortcut when widths change
template <typename S>
class Bottleneck {
  public:
    Bottleneck() = default;
    Bottleneck(int in_ch, int mid_ch, int out_ch, Rng& rng);
    Tensor<S> forward(const Tensor<S>& x, bool training);
    void register_params(const std::string& prefix, nn::ParamStore<S>& store);

  private:
    nn::Conv2d<S> c1_, c2_, c3_, proj_;
    nn::BatchNorm2d<S> b1_, b2_, b3_, bproj_;
    bool has_proj_ = false;
};

// image -> attention maps -> coordinates -> pairwise edge probabilities
template <typename S>
class Encoder {
  public:
    Encoder(const EncoderConfig& cfg, Rng& rng);

    Tensor<S> extract_features(const Tensor<S>& image, bool training);
    Tensor<S> predict_attention(const Tensor<S>& features, bool training);
    // probability maps -> normalized coordinates (fixed templates, no params)
    static Tensor<S> coords_from_attention(const Tensor<S>& attention);
    Tensor<S> build_edge_rois(const Tensor<S>& coords, const Tensor<S>& image) const;
    // returns raw [B*n*n,1] pair scores before sigmoid
    Tensor<S> classify_edge_logits(const Tensor<S>& patches, bool training);

    PredictedGraph<S> encode(const Tensor<S>& image, bool training);
    void register_params(nn::ParamStore<S>& store);
    const EncoderConfig& config() const { return cfg_; }

  private:
    EncoderConfig cfg_;
    nn::Conv2d<S> stem_;
    nn::BatchNorm2d<S> stem_bn_;
    Bottleneck<S> block1_, block2_;
    nn::Conv2d<S> att1_, att2_;
    nn::Conv2d<S> ec1_, ec2_;
    nn::BatchNorm2d<S> eb1_, eb2_;
    nn::Linear<S> fc1_, fc2_;
};

}  // namespace graphae
