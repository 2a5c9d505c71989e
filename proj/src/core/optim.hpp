#pragma once

#include <cmath>
#include <vector>

#include "core/tensor.hpp"

namespace graphae {

// Adam with bias correction; decoupled from any module structure — operates
// on a flat parameter list
template <typename S>
class Adam {
  public:
    Adam(std::vector<Tensor<S>> params, S lr, S beta1 = S(0.9), S beta2 = S(0.999),
         S eps = S(1e-8), S weight_decay = S(0))
        : params_(std::move(params)),
          lr_(lr),
          beta1_(beta1),
          beta2_(beta2),
          eps_(eps),
          wd_(weight_decay) {
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(size_t(params_[i].numel()), S(0));
            v_[i].assign(size_t(params_[i].numel()), S(0));
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    void step() {
        ++t_;
        const S bc1 = S(1) - S(std::pow(double(beta1_), double(t_)));
        const S bc2 = S(1) - S(std::pow(double(beta2_), double(t_)));
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            if (!p.node()->grad.size()) continue;
            S* w = p.data();
            const S* g = p.grad_data();
            S* m = m_[i].data();
            S* v = v_[i].data();
            for (int64_t k = 0; k < p.numel(); ++k) {
                S gk = g[k];
                if (wd_ != S(0)) gk += wd_ * w[k];
                m[k] = beta1_ * m[k] + (S(1) - beta1_) * gk;
                v[k] = beta2_ * v[k] + (S(1) - beta2_) * gk * gk;
                const S mh = m[k] / bc1;
                const S vh = v[k] / bc2;
                w[k] -= lr_ * mh / (S(std::sqrt(double(vh))) + eps_);
            }
        }
    }

    void set_lr(S lr) { lr_ = lr; }
    S lr() const { return lr_; }

  private:
    std::vector<Tensor<S>> params_;
    S lr_, beta1_, beta2_, eps_, wd_;
    std::vector<std::vector<S>> m_, v_;
    int64_t t_ = 0;
};

}  // namespace graphae
