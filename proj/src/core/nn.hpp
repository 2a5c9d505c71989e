#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "core/ops.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace graphae {
namespace nn {

// flat registry of named parameters and persistent (non-trainable) buffers;
// modules append themselves under a dotted prefix
template <typename S>
struct ParamStore {
    std::vector<std::pair<std::string, Tensor<S>>> params;
    std::vector<std::pair<std::string, std::vector<S>*>> buffers;

    void add(std::string name, const Tensor<S>& t) {
        params.emplace_back(std::move(name), t);
    }
    void add_buffer(std::string name, std::vector<S>* v) {
        buffers.emplace_back(std::move(name), v);
    }
    std::vector<Tensor<S>> trainable() const {
        std::vector<Tensor<S>> out;
        for (const auto& [name, t] : params)
            if (t.requires_grad()) out.push_back(t);
        return out;
    }
    int64_t param_count() const {
        int64_t n = 0;
        for (const auto& [name, t] : params) n += t.numel();
        return n;
    }
};

template <typename S>
Tensor<S> kaiming_conv_weight(int out_ch, int in_ch, int k, Rng& rng) {
    auto w = Tensor<S>::zeros({out_ch, in_ch, k, k}, true);
    const double std = std::sqrt(2.0 / (double(in_ch) * k * k));
    for (int64_t i = 0; i < w.numel(); ++i) w.data()[i] = S(rng.normal() * std);
    return w;
}

template <typename S>
class Conv2d {
  public:
    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng, bool bias = true)
        : stride_(stride), pad_(pad) {
        w_ = kaiming_conv_weight<S>(out_ch, in_ch, k, rng);
        if (bias) b_ = Tensor<S>::zeros({out_ch}, true);
    }
    Tensor<S> forward(const Tensor<S>& x) const {
        return ops::conv2d(x, w_, b_, stride_, pad_);
    }
    void register_params(const std::string& p, ParamStore<S>& s) {
        s.add(p + ".weight", w_);
        if (b_.defined()) s.add(p + ".bias", b_);
    }
    Tensor<S>& weight() { return w_; }
    Tensor<S>& bias() { return b_; }

  private:
    Tensor<S> w_, b_;
    int stride_ = 1, pad_ = 0;
};

template <typename S>
class BatchNorm2d {
  public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int ch) : mean_(size_t(ch), S(0)), var_(size_t(ch), S(1)) {
        gamma_ = Tensor<S>::full({ch}, S(1), true);
        beta_ = Tensor<S>::zeros({ch}, true);
    }
    Tensor<S> forward(const Tensor<S>& x, bool training) {
        return ops::batchnorm2d(x, gamma_, beta_, mean_, var_, training, S(0.1),
                                S(1e-5));
    }
    void register_params(const std::string& p, ParamStore<S>& s) {
        s.add(p + ".gamma", gamma_);
        s.add(p + ".beta", beta_);
        s.add_buffer(p + ".running_mean", &mean_);
        s.add_buffer(p + ".running_var", &var_);
    }

  private:
    Tensor<S> gamma_, beta_;
    std::vector<S> mean_, var_;
};

template <typename S>
class Linear {
  public:
    Linear() = default;
    Linear(int in_f, int out_f, Rng& rng) {
        w_ = Tensor<S>::zeros({out_f, in_f}, true);
        const double std = std::sqrt(2.0 / double(in_f));
        for (int64_t i = 0; i < w_.numel(); ++i) w_.data()[i] = S(rng.normal() * std);
        b_ = Tensor<S>::zeros({out_f}, true);
    }
    Tensor<S> forward(const Tensor<S>& x) const { return ops::linear(x, w_, b_); }
    void register_params(const std::string& p, ParamStore<S>& s) {
        s.add(p + ".weight", w_);
        s.add(p + ".bias", b_);
    }

  private:
    Tensor<S> w_, b_;
};

// single learnable slope shared across channels
template <typename S>
class PReLU {
  public:
    PReLU() { a_ = Tensor<S>::full({1}, S(0.25), true); }
    Tensor<S> forward(const Tensor<S>& x) const { return ops::prelu(x, a_); }
    void register_params(const std::string& p, ParamStore<S>& s) {
        s.add(p + ".slope", a_);
    }

  private:
    Tensor<S> a_;
};

}  // namespace nn
}  // namespace graphae
