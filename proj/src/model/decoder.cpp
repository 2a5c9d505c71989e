#include "model/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "core/check.hpp"

namespace graphae {

template <typename S>
TemplateBank<S> make_line_template(double stroke_width) {
    TemplateBank<S> bank;
    const auto& g = bank.geom;
    bank.raster.assign(size_t(g.width * g.height), S(0));
    // same anti-aliasing ramp as the dataset rasterizer, so a unit-scale warp
    // reproduces the dataset's stroke profile exactly
    const double reach = stroke_width * 0.5 + 0.5;
    for (int i = 0; i < g.height; ++i)
        for (int j = 0; j < g.width; ++j) {
            const double t = std::clamp((j - g.ax0) / (g.ax1 - g.ax0), 0.0, 1.0);
            const double cx = g.ax0 + t * (g.ax1 - g.ax0);
            const double dist = std::hypot(j - cx, i - g.ay0);
            bank.raster[size_t(i * g.width + j)] =
                S(std::clamp(reach - dist, 0.0, 1.0));
        }
    return bank;
}

template <typename S>
Decoder<S>::Decoder(const DecoderConfig& cfg, Rng& rng)
    : cfg_(cfg),
      bank_(make_line_template<S>(cfg.stroke_width)),
      r1_(1, 16, 3, 1, 1, rng),
      r2_(16, 16, 3, 1, 1, rng),
      r3_(16, 1, 3, 1, 1, rng) {
    // start as the identity: the refined image equals the coarse image until
    // the refinement stack learns a correction
    auto& w = r3_.weight();
    std::fill(w.data(), w.data() + w.numel(), S(0));
}

template <typename S>
Tensor<S> Decoder<S>::draw_coarse(const Tensor<S>& coords,
                                  const Tensor<S>& probs) const {
    auto canvas = ops::draw_edges(coords, probs, bank_.raster, bank_.geom, cfg_.canvas,
                                  S(cfg_.min_edge_len_px));
    return ops::clamp01(canvas);
}

template <typename S>
Tensor<S> Decoder<S>::refine(const Tensor<S>& coarse) {
    auto h = p1_.forward(r1_.forward(coarse));
    h = p2_.forward(r2_.forward(h));
    h = r3_.forward(h);
    return ops::clamp01(ops::add(coarse, h));
}

template <typename S>
typename Decoder<S>::Decoded Decoder<S>::decode(const Tensor<S>& coords,
                                                const Tensor<S>& probs) {
    Decoded d;
    d.coarse = draw_coarse(coords, probs);
    d.refined = refine(d.coarse);
    return d;
}

template <typename S>
void Decoder<S>::register_params(nn::ParamStore<S>& s) {
    r1_.register_params("dec.r1", s);
    p1_.register_params("dec.p1", s);
    r2_.register_params("dec.r2", s);
    p2_.register_params("dec.p2", s);
    r3_.register_params("dec.r3", s);
}

template struct TemplateBank<float>;
template struct TemplateBank<double>;
template TemplateBank<float> make_line_template<float>(double);
template TemplateBank<double> make_line_template<double>(double);
template class Decoder<float>;
template class Decoder<double>;

}  // namespace graphae
