#include "model/losses.hpp"

#include <cmath>

#include "core/check.hpp"
#include "core/ops.hpp"

namespace graphae {

const char* similarity_name(SimilarityKind k) {
    return k == SimilarityKind::ms_ssim ? "ms_ssim" : "ssim";
}
const char* loss_target_name(LossTarget t) {
    return t == LossTarget::refined ? "refined" : "coarse";
}
SimilarityKind similarity_from_name(const std::string& s) {
    if (s == "ms_ssim") return SimilarityKind::ms_ssim;
    if (s == "ssim") return SimilarityKind::ssim;
    GA_CHECK(false, "unknown similarity: " + s);
    return SimilarityKind::ms_ssim;
}
LossTarget loss_target_from_name(const std::string& s) {
    if (s == "refined") return LossTarget::refined;
    if (s == "coarse") return LossTarget::coarse;
    GA_CHECK(false, "unknown loss target: " + s);
    return LossTarget::refined;
}

namespace {

template <typename S>
std::vector<S> gaussian_kernel(int size, double sigma) {
    std::vector<S> k(static_cast<size_t>(size));
    const double c = (size - 1) / 2.0;
    double sum = 0;
    for (int i = 0; i < size; ++i) {
        const double v = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        k[size_t(i)] = S(v);
        sum += v;
    }
    for (auto& v : k) v = S(double(v) / sum);
    return k;
}

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kPowFloor = 1e-6;  // keeps x^w defined when cs dips negative

// per-sample means of the full SSIM map and of the contrast-structure term
template <typename S>
std::pair<Tensor<S>, Tensor<S>> ssim_parts(const Tensor<S>& a, const Tensor<S>& b,
                                           int window) {
    GA_CHECK(a.shape() == b.shape(), "ssim: shape mismatch");
    GA_CHECK(a.dim(2) >= window && a.dim(3) >= window, "ssim: image smaller than window");
    const auto g = gaussian_kernel<S>(window, 1.5);
    auto blur = [&](const Tensor<S>& x) {
        return ops::blur1d(ops::blur1d(x, g, true), g, false);
    };
    auto mua = blur(a), mub = blur(b);
    auto mua2 = ops::mul(mua, mua);
    auto mub2 = ops::mul(mub, mub);
    auto muab = ops::mul(mua, mub);
    auto saa = ops::sub(blur(ops::mul(a, a)), mua2);
    auto sbb = ops::sub(blur(ops::mul(b, b)), mub2);
    auto sab = ops::sub(blur(ops::mul(a, b)), muab);

    auto l = ops::div(ops::add_scalar(ops::mul_scalar(muab, S(2)), S(kC1)),
                      ops::add_scalar(ops::add(mua2, mub2), S(kC1)));
    auto cs = ops::div(ops::add_scalar(ops::mul_scalar(sab, S(2)), S(kC2)),
                       ops::add_scalar(ops::add(saa, sbb), S(kC2)));
    return {ops::mean_per_sample(ops::mul(l, cs)), ops::mean_per_sample(cs)};
}

}  // namespace

template <typename S>
Tensor<S> ssim_per_sample(const Tensor<S>& a, const Tensor<S>& b, int window) {
    return ssim_parts(a, b, window).first;
}

template <typename S>
Tensor<S> ms_ssim_per_sample(const Tensor<S>& a, const Tensor<S>& b, int scales,
                             int window) {
    GA_CHECK(scales >= 1 && scales <= 5, "ms_ssim: scales out of range");
    GA_CHECK(a.dim(2) >> (scales - 1) >= window && a.dim(3) >> (scales - 1) >= window,
             "ms_ssim: coarsest scale smaller than window");
    static const double kStdWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    double wsum = 0;
    for (int i = 0; i < scales; ++i) wsum += kStdWeights[i];

    Tensor<S> prod;
    Tensor<S> xa = a, xb = b;
    for (int m = 0; m < scales; ++m) {
        const S w = S(kStdWeights[m] / wsum);
        auto [full, cs] = ssim_parts(xa, xb, window);
        auto base = (m == scales - 1) ? full : cs;
        auto term = ops::pow_scalar(ops::clamp_min(base, S(kPowFloor)), w);
        prod = prod.defined() ? ops::mul(prod, term) : term;
        if (m != scales - 1) {
            xa = ops::avgpool2(xa);
            xb = ops::avgpool2(xb);
        }
    }
    return prod;
}

template <typename S>
Tensor<S> aux_per_sample(const Tensor<S>& attention) {
    auto peak = ops::chan_max(attention);
    auto normed = ops::div_by_chan(attention, peak);
    auto summed = ops::sum_channels(normed);
    auto over = ops::relu(ops::add_scalar(summed, S(-1)));
    return ops::mean_per_sample(ops::mul(over, over));
}

template <typename S>
std::vector<S> below_mean_mask(const Tensor<S>& per_sample) {
    const int64_t n = per_sample.numel();
    double mean = 0;
    for (int64_t i = 0; i < n; ++i) mean += double(per_sample.data()[i]);
    mean /= double(n);
    std::vector<S> mask(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
        mask[size_t(i)] = double(per_sample.data()[i]) < mean ? S(1) : S(0);
    return mask;
}

template <typename S>
LossBundle<S> compute_losses(const Tensor<S>& coarse, const Tensor<S>& refined,
                             const Tensor<S>& attention, const Tensor<S>& input,
                             const LossConfig& cfg) {
    GA_CHECK(cfg.lambda_aux >= 0, "compute_losses: lambda_aux must be >= 0");
    LossBundle<S> out;
    const Tensor<S>& target =
        cfg.target == LossTarget::refined ? refined : coarse;
    out.similarity = cfg.similarity == SimilarityKind::ms_ssim
                         ? ms_ssim_per_sample(target, input, cfg.ms_ssim_scales,
                                              cfg.window)
                         : ssim_per_sample(target, input, cfg.window);
    out.main = ops::add_scalar(ops::mul_scalar(ops::mean_all(out.similarity), S(-1)),
                               S(1));
    if (cfg.lambda_aux > 0) {
        auto gated = ops::mul_const(aux_per_sample(attention),
                                    below_mean_mask(out.similarity));
        out.aux = ops::mean_all(gated);
        out.total = ops::add(out.main, ops::mul_scalar(out.aux, S(cfg.lambda_aux)));
    } else {
        out.aux = Tensor<S>::zeros({1}, false);
        out.total = out.main;
    }
    return out;
}

#define GA_INSTANTIATE(S)                                                             \
    template Tensor<S> ssim_per_sample<S>(const Tensor<S>&, const Tensor<S>&, int);   \
    template Tensor<S> ms_ssim_per_sample<S>(const Tensor<S>&, const Tensor<S>&, int, \
                                             int);                                    \
    template Tensor<S> aux_per_sample<S>(const Tensor<S>&);                           \
    template std::vector<S> below_mean_mask<S>(const Tensor<S>&);                     \
    template LossBundle<S> compute_losses<S>(const Tensor<S>&, const Tensor<S>&,      \
                                             const Tensor<S>&, const Tensor<S>&,      \
                                             const LossConfig&);

GA_INSTANTIATE(float)
GA_INSTANTIATE(double)
#undef GA_INSTANTIATE

}  // namespace graphae
