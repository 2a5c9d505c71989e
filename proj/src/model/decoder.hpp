#pragma once

#include <vector>

#include "core/nn.hpp"
#include "core/ops.hpp"
#include "core/tensor.hpp"

namespace graphae {

// canonical edge primitive: one anti-aliased horizontal segment rasterized
// once at construction; warped copies of it form the coarse image
template <typename S>
struct TemplateBank {
    ops::EdgeTemplateGeom geom;
    std::vector<S> raster;  // geom.height x geom.width, values in [0,1]
};

template <typename S>
TemplateBank<S> make_line_template(double stroke_width);

struct DecoderConfig {
    int canvas = 128;
    double stroke_width = 2.0;
    // segments shorter than this draw nothing (sub-stroke length): protects
    // the warp against near-coincident endpoints
    double min_edge_len_px = 2.0;
};

template <typename S>
class Decoder {
  public:
    Decoder(const DecoderConfig& cfg, Rng& rng);

    // sum-composite all pairwise strokes weighted by probability, clamped
    Tensor<S> draw_coarse(const Tensor<S>& coords, const Tensor<S>& probs) const;
    // residual 3-conv stack; identity at initialization (last conv zero-init)
    Tensor<S> refine(const Tensor<S>& coarse);

    struct Decoded {
        Tensor<S> coarse;
        Tensor<S> refined;
    };
    Decoded decode(const Tensor<S>& coords, const Tensor<S>& probs);

    void register_params(nn::ParamStore<S>& store);
    const DecoderConfig& config() const { return cfg_; }
    const TemplateBank<S>& bank() const { return bank_; }

  private:
    DecoderConfig cfg_;
    TemplateBank<S> bank_;
    nn::Conv2d<S> r1_, r2_, r3_;
    nn::PReLU<S> p1_, p2_;
};

}  // namespace graphae
