#include "model/encoder.hpp"

#include "core/check.hpp"
#include "core/ops.hpp"

namespace graphae {

template <typename S>
Bottleneck<S>::Bottleneck(int in_ch, int mid_ch, int out_ch, Rng& rng)
    : c1_(in_ch, mid_ch, 1, 1, 0, rng, false),
      c2_(mid_ch, mid_ch, 3, 1, 1, rng, false),
      c3_(mid_ch, out_ch, 1, 1, 0, rng, false),
      b1_(mid_ch),
      b2_(mid_ch),
      b3_(out_ch),
      has_proj_(in_ch != out_ch) {
    if (has_proj_) {
        proj_ = nn::Conv2d<S>(in_ch, out_ch, 1, 1, 0, rng, false);
        bproj_ = nn::BatchNorm2d<S>(out_ch);
    }
}

template <typename S>
Tensor<S> Bottleneck<S>::forward(const Tensor<S>& x, bool training) {
    auto h = ops::relu(b1_.forward(c1_.forward(x), training));
    h = ops::relu(b2_.forward(c2_.forward(h), training));
    h = b3_.forward(c3_.forward(h), training);
    auto sc = has_proj_ ? bproj_.forward(proj_.forward(x), training) : x;
    return ops::relu(ops::add(h, sc));
}

template <typename S>
void Bottleneck<S>::register_params(const std::string& p, nn::ParamStore<S>& s) {
    c1_.register_params(p + ".c1", s);
    b1_.register_params(p + ".b1", s);
    c2_.register_params(p + ".c2", s);
    b2_.register_params(p + ".b2", s);
    c3_.register_params(p + ".c3", s);
    b3_.register_params(p + ".b3", s);
    if (has_proj_) {
        proj_.register_params(p + ".proj", s);
        bproj_.register_params(p + ".bproj", s);
    }
}

template <typename S>
Encoder<S>::Encoder(const EncoderConfig& cfg, Rng& rng)
    : cfg_(cfg),
      stem_(1, 64, 7, 1, 3, rng, false),
      stem_bn_(64),
      block1_(64, 32, 128, rng),
      block2_(128, 16, 64, rng),
      att1_(64, 64, 3, 1, 1, rng),
      att2_(64, cfg.n_max, 3, 1, 1, rng),
      ec1_(1, 32, 3, 1, 1, rng, false),
      ec2_(32, 16, 3, 1, 1, rng, false),
      eb1_(32),
      eb2_(16),
      fc1_(16 * (cfg.roi_size / 4) * (cfg.roi_size / 4), 64, rng),
      fc2_(64, 1, rng) {}

template <typename S>
Tensor<S> Encoder<S>::extract_features(const Tensor<S>& image, bool training) {
    GA_CHECK(image.ndim() == 4 && image.dim(1) == 1 && image.dim(2) == cfg_.canvas &&
                 image.dim(3) == cfg_.canvas,
             "extract_features: want [B,1,canvas,canvas]");
    auto h = ops::relu(stem_bn_.forward(stem_.forward(image), training));
    h = ops::maxpool2(h);
    h = block1_.forward(h, training);
    h = ops::maxpool2(h);
    return block2_.forward(h, training);
}

template <typename S>
Tensor<S> Encoder<S>::predict_attention(const Tensor<S>& features, bool training) {
    (void)training;
    auto h = ops::relu(att1_.forward(features));
    h = att2_.forward(h);
    return ops::softmax2d(h, S(cfg_.softmax_temperature));
}

template <typename S>
Tensor<S> Encoder<S>::coords_from_attention(const Tensor<S>& attention) {
    return ops::dsnt(attention);
}

template <typename S>
Tensor<S> Encoder<S>::build_edge_rois(const Tensor<S>& coords,
                                      const Tensor<S>& image) const {
    return ops::roi_pairs(image, coords, cfg_.roi_size, S(cfg_.roi_min_side_px));
}

template <typename S>
Tensor<S> Encoder<S>::classify_edge_logits(const Tensor<S>& patches, bool training) {
    auto h = ops::maxpool2(ops::relu(eb1_.forward(ec1_.forward(patches), training)));
    h = ops::maxpool2(ops::relu(eb2_.forward(ec2_.forward(h), training)));
    const int flat = 16 * (cfg_.roi_size / 4) * (cfg_.roi_size / 4);
    h = ops::reshape(h, {h.dim(0), flat});
    h = ops::relu(fc1_.forward(h));
    return fc2_.forward(h);
}

template <typename S>
PredictedGraph<S> Encoder<S>::encode(const Tensor<S>& image, bool training) {
    PredictedGraph<S> g;
    auto feats = extract_features(image, training);
    g.attention = predict_attention(feats, training);
    g.coords = coords_from_attention(g.attention);
    auto patches = build_edge_rois(g.coords, image);
    auto scores = classify_edge_logits(patches, training);
    g.logits = ops::reshape(scores, {image.dim(0), cfg_.n_max, cfg_.n_max});
    g.probs = ops::sym_zero_diag(ops::sigmoid(g.logits));
    return g;
}

template <typename S>
void Encoder<S>::register_params(nn::ParamStore<S>& s) {
    stem_.register_params("enc.stem", s);
    stem_bn_.register_params("enc.stem_bn", s);
    block1_.register_params("enc.block1", s);
    block2_.register_params("enc.block2", s);
    att1_.register_params("enc.att1", s);
    att2_.register_params("enc.att2", s);
    ec1_.register_params("enc.edge.c1", s);
    eb1_.register_params("enc.edge.b1", s);
    ec2_.register_params("enc.edge.c2", s);
    eb2_.register_params("enc.edge.b2", s);
    fc1_.register_params("enc.edge.fc1", s);
    fc2_.register_params("enc.edge.fc2", s);
}

template class Bottleneck<float>;
template class Bottleneck<double>;
template class Encoder<float>;
template class Encoder<double>;

}  // namespace graphae
