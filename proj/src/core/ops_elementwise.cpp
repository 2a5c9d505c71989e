#include <cmath>

#include "core/ops.hpp"
#include "core/ops_common.hpp"

namespace graphae {
namespace ops {

using detail::new_node;
using detail::want_grad;

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
    GA_CHECK(a.shape() == b.shape(), "add: shape mismatch");
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    const S* pb = b.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    if (want_grad({&a, &b})) {
        out->requires_grad = true;
        out->parents = {a.node(), b.node()};
        auto an = a.node(), bn = b.node();
        out->backward_fn = [an, bn](Node<S>& self) {
            const int64_t m = self.numel();
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t i = 0; i < m; ++i) bn->grad[i] += self.grad[i];
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
    GA_CHECK(a.shape() == b.shape(), "sub: shape mismatch");
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    const S* pb = b.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
    if (want_grad({&a, &b})) {
        out->requires_grad = true;
        out->parents = {a.node(), b.node()};
        auto an = a.node(), bn = b.node();
        out->backward_fn = [an, bn](Node<S>& self) {
            const int64_t m = self.numel();
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t i = 0; i < m; ++i) bn->grad[i] -= self.grad[i];
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
    GA_CHECK(a.shape() == b.shape(), "mul: shape mismatch");
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    const S* pb = b.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
    if (want_grad({&a, &b})) {
        out->requires_grad = true;
        out->parents = {a.node(), b.node()};
        auto an = a.node(), bn = b.node();
        out->backward_fn = [an, bn](Node<S>& self) {
            const int64_t m = self.numel();
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i] * bn->value[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t i = 0; i < m; ++i) bn->grad[i] += self.grad[i] * an->value[i];
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b) {
    GA_CHECK(a.shape() == b.shape(), "div: shape mismatch");
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    const S* pb = b.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] / pb[i];
    if (want_grad({&a, &b})) {
        out->requires_grad = true;
        out->parents = {a.node(), b.node()};
        auto an = a.node(), bn = b.node();
        out->backward_fn = [an, bn](Node<S>& self) {
            const int64_t m = self.numel();
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i] / bn->value[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int64_t i = 0; i < m; ++i) {
                    const S bv = bn->value[i];
                    bn->grad[i] -= self.grad[i] * an->value[i] / (bv * bv);
                }
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> add_scalar(const Tensor<S>& a, S c) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + c;
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> mul_scalar(const Tensor<S>& a, S c) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] * c;
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, c](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i] * c;
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> pow_scalar(const Tensor<S>& a, S p) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = std::pow(pa[i], p);
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, p](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i)
                an->grad[i] += self.grad[i] * p * std::pow(an->value[i], p - S(1));
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> log(const Tensor<S>& a) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = std::log(pa[i]);
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i] / an->value[i];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] > S(0) ? pa[i] : S(0);
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i)
                if (an->value[i] > S(0)) an->grad[i] += self.grad[i];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> prelu(const Tensor<S>& a, const Tensor<S>& alpha) {
    GA_CHECK(alpha.numel() == 1, "prelu: alpha must be a single slope");
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    const S al = alpha.data()[0];
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] > S(0) ? pa[i] : al * pa[i];
    if (want_grad({&a, &alpha})) {
        out->requires_grad = true;
        out->parents = {a.node(), alpha.node()};
        auto an = a.node(), gn = alpha.node();
        out->backward_fn = [an, gn](Node<S>& self) {
            const int64_t m = self.numel();
            const S al = gn->value[0];
            if (an->requires_grad) {
                an->ensure_grad();
                for (int64_t i = 0; i < m; ++i)
                    an->grad[i] += self.grad[i] * (an->value[i] > S(0) ? S(1) : al);
            }
            if (gn->requires_grad) {
                gn->ensure_grad();
                S acc = 0;
                for (int64_t i = 0; i < m; ++i)
                    if (an->value[i] <= S(0)) acc += self.grad[i] * an->value[i];
                gn->grad[0] += acc;
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = S(1) / (S(1) + std::exp(-pa[i]));
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i) {
                const S y = self.value[i];
                an->grad[i] += self.grad[i] * y * (S(1) - y);
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> clamp01(const Tensor<S>& a) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = std::min(S(1), std::max(S(0), pa[i]));
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i) {
                const S x = an->value[i];
                if (x > S(0) && x < S(1)) an->grad[i] += self.grad[i];
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> clamp_min(const Tensor<S>& a, S lo) {
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = std::max(lo, pa[i]);
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, lo](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i)
                if (an->value[i] > lo) an->grad[i] += self.grad[i];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> mul_const(const Tensor<S>& a, const std::vector<S>& c) {
    GA_CHECK(int64_t(c.size()) == a.numel(), "mul_const: size mismatch");
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    const int64_t n = out->numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] * c[size_t(i)];
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, c](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i] * c[size_t(i)];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> reshape(const Tensor<S>& a, const std::vector<int>& shape) {
    auto out = new_node<S>(shape);
    GA_CHECK(out->numel() == a.numel(), "reshape: numel mismatch");
    std::copy(a.data(), a.data() + a.numel(), out->value.data());
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an](Node<S>& self) {
            an->ensure_grad();
            const int64_t m = self.numel();
            for (int64_t i = 0; i < m; ++i) an->grad[i] += self.grad[i];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> sym_zero_diag(const Tensor<S>& a) {
    GA_CHECK(a.ndim() == 3 && a.dim(1) == a.dim(2), "sym_zero_diag: want [B,N,N]");
    const int B = a.dim(0), N = a.dim(1);
    auto out = new_node<S>(a.shape());
    const S* pa = a.data();
    S* po = out->value.data();
    for (int b = 0; b < B; ++b)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const int64_t o = (int64_t(b) * N + i) * N + j;
                const int64_t t = (int64_t(b) * N + j) * N + i;
                po[o] = (i == j) ? S(0) : (pa[o] + pa[t]) / S(2);
            }
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, B, N](Node<S>& self) {
            an->ensure_grad();
            for (int b = 0; b < B; ++b)
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) {
                        if (i == j) continue;
                        const int64_t o = (int64_t(b) * N + i) * N + j;
                        const int64_t t = (int64_t(b) * N + j) * N + i;
                        an->grad[o] += (self.grad[o] + self.grad[t]) / S(2);
                    }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> mean_all(const Tensor<S>& a) {
    auto out = new_node<S>({1});
    const S* pa = a.data();
    const int64_t n = a.numel();
    S acc = 0;
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    out->value[0] = acc / S(n);
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, n](Node<S>& self) {
            an->ensure_grad();
            const S g = self.grad[0] / S(n);
            for (int64_t i = 0; i < n; ++i) an->grad[i] += g;
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> mean_per_sample(const Tensor<S>& a) {
    GA_CHECK(a.ndim() >= 1, "mean_per_sample: want batch dim");
    const int B = a.dim(0);
    const int64_t rest = a.numel() / B;
    auto out = new_node<S>({B});
    const S* pa = a.data();
    for (int b = 0; b < B; ++b) {
        S acc = 0;
        for (int64_t i = 0; i < rest; ++i) acc += pa[b * rest + i];
        out->value[size_t(b)] = acc / S(rest);
    }
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, B, rest](Node<S>& self) {
            an->ensure_grad();
            for (int b = 0; b < B; ++b) {
                const S g = self.grad[size_t(b)] / S(rest);
                for (int64_t i = 0; i < rest; ++i) an->grad[b * rest + i] += g;
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> dot_const(const Tensor<S>& a, const std::vector<S>& w) {
    GA_CHECK(int64_t(w.size()) == a.numel(), "dot_const: size mismatch");
    auto out = new_node<S>({1});
    const S* pa = a.data();
    const int64_t n = a.numel();
    S acc = 0;
    for (int64_t i = 0; i < n; ++i) acc += pa[i] * w[size_t(i)];
    out->value[0] = acc;
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, w](Node<S>& self) {
            an->ensure_grad();
            const S g = self.grad[0];
            for (size_t i = 0; i < w.size(); ++i) an->grad[i] += g * w[i];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> chan_max(const Tensor<S>& a) {
    GA_CHECK(a.ndim() == 4, "chan_max: want [B,C,H,W]");
    const int B = a.dim(0), C = a.dim(1);
    const int64_t hw = int64_t(a.dim(2)) * a.dim(3);
    auto out = new_node<S>({B, C});
    auto argmax = std::make_shared<std::vector<int64_t>>(size_t(B) * C);
    const S* pa = a.data();
    for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
        const S* row = pa + bc * hw;
        int64_t best = 0;
        for (int64_t i = 1; i < hw; ++i)
            if (row[i] > row[best]) best = i;
        out->value[size_t(bc)] = row[best];
        (*argmax)[size_t(bc)] = bc * hw + best;
    }
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, argmax](Node<S>& self) {
            an->ensure_grad();
            for (size_t bc = 0; bc < argmax->size(); ++bc)
                an->grad[size_t((*argmax)[bc])] += self.grad[bc];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> div_by_chan(const Tensor<S>& x, const Tensor<S>& m) {
    GA_CHECK(x.ndim() == 4 && m.ndim() == 2 && x.dim(0) == m.dim(0) && x.dim(1) == m.dim(1),
             "div_by_chan: shape mismatch");
    const int B = x.dim(0), C = x.dim(1);
    const int64_t hw = int64_t(x.dim(2)) * x.dim(3);
    auto out = new_node<S>(x.shape());
    const S* px = x.data();
    const S* pm = m.data();
    S* po = out->value.data();
    for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
        const S inv = S(1) / pm[size_t(bc)];
        for (int64_t i = 0; i < hw; ++i) po[bc * hw + i] = px[bc * hw + i] * inv;
    }
    if (want_grad({&x, &m})) {
        out->requires_grad = true;
        out->parents = {x.node(), m.node()};
        auto xn = x.node(), mn = m.node();
        out->backward_fn = [xn, mn, B, C, hw](Node<S>& self) {
            if (xn->requires_grad) xn->ensure_grad();
            if (mn->requires_grad) mn->ensure_grad();
            for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
                const S mv = mn->value[size_t(bc)];
                const S inv = S(1) / mv;
                S acc = 0;
                for (int64_t i = 0; i < hw; ++i) {
                    const S g = self.grad[size_t(bc * hw + i)];
                    if (xn->requires_grad) xn->grad[size_t(bc * hw + i)] += g * inv;
                    acc += g * self.value[size_t(bc * hw + i)];
                }
                if (mn->requires_grad) mn->grad[size_t(bc)] -= acc * inv;
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> sum_channels(const Tensor<S>& a) {
    GA_CHECK(a.ndim() == 4, "sum_channels: want [B,C,H,W]");
    const int B = a.dim(0), C = a.dim(1), H = a.dim(2), W = a.dim(3);
    const int64_t hw = int64_t(H) * W;
    auto out = new_node<S>({B, 1, H, W});
    const S* pa = a.data();
    S* po = out->value.data();
    std::fill(out->value.begin(), out->value.end(), S(0));
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int64_t i = 0; i < hw; ++i)
                po[b * hw + i] += pa[(int64_t(b) * C + c) * hw + i];
    if (want_grad({&a})) {
        out->requires_grad = true;
        out->parents = {a.node()};
        auto an = a.node();
        out->backward_fn = [an, B, C, hw](Node<S>& self) {
            an->ensure_grad();
            for (int b = 0; b < B; ++b)
                for (int c = 0; c < C; ++c)
                    for (int64_t i = 0; i < hw; ++i)
                        an->grad[size_t((int64_t(b) * C + c) * hw + i)] +=
                            self.grad[size_t(b * hw + i)];
        };
    }
    return Tensor<S>(out);
}

#define GA_INSTANTIATE(S)                                                       \
    template Tensor<S> add<S>(const Tensor<S>&, const Tensor<S>&);              \
    template Tensor<S> sub<S>(const Tensor<S>&, const Tensor<S>&);              \
    template Tensor<S> mul<S>(const Tensor<S>&, const Tensor<S>&);              \
    template Tensor<S> div<S>(const Tensor<S>&, const Tensor<S>&);              \
    template Tensor<S> add_scalar<S>(const Tensor<S>&, S);                      \
    template Tensor<S> mul_scalar<S>(const Tensor<S>&, S);                      \
    template Tensor<S> pow_scalar<S>(const Tensor<S>&, S);                      \
    template Tensor<S> log<S>(const Tensor<S>&);                                \
    template Tensor<S> relu<S>(const Tensor<S>&);                               \
    template Tensor<S> prelu<S>(const Tensor<S>&, const Tensor<S>&);            \
    template Tensor<S> sigmoid<S>(const Tensor<S>&);                            \
    template Tensor<S> clamp01<S>(const Tensor<S>&);                            \
    template Tensor<S> clamp_min<S>(const Tensor<S>&, S);                       \
    template Tensor<S> mul_const<S>(const Tensor<S>&, const std::vector<S>&);   \
    template Tensor<S> reshape<S>(const Tensor<S>&, const std::vector<int>&);   \
    template Tensor<S> sym_zero_diag<S>(const Tensor<S>&);                      \
    template Tensor<S> mean_all<S>(const Tensor<S>&);                           \
    template Tensor<S> mean_per_sample<S>(const Tensor<S>&);                    \
    template Tensor<S> dot_const<S>(const Tensor<S>&, const std::vector<S>&);   \
    template Tensor<S> chan_max<S>(const Tensor<S>&);                           \
    template Tensor<S> div_by_chan<S>(const Tensor<S>&, const Tensor<S>&);      \
    template Tensor<S> sum_channels<S>(const Tensor<S>&);

GA_INSTANTIATE(float)
GA_INSTANTIATE(double)
#undef GA_INSTANTIATE

}  // namespace ops
}  // namespace graphae
