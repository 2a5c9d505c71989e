#include <algorithm>
#include <cmath>
#include <cstring>

#include "core/blas.hpp"
#include "core/ops.hpp"
#include "core/ops_common.hpp"

namespace graphae {
namespace ops {

using detail::new_node;
using detail::want_grad;

namespace {

// col[(c*kh+r)*kw+q][oh*OW+ow] = x[c][oh*s-p+r][ow*s-p+q], zero outside
template <typename S>
void im2col(const S* x, int C, int H, int W, int kh, int kw, int stride, int pad,
            int OH, int OW, S* col) {
    for (int c = 0; c < C; ++c)
        for (int r = 0; r < kh; ++r)
            for (int q = 0; q < kw; ++q) {
                S* dst = col + (int64_t((c * kh + r) * kw + q)) * OH * OW;
                for (int oh = 0; oh < OH; ++oh) {
                    const int ih = oh * stride - pad + r;
                    S* drow = dst + int64_t(oh) * OW;
                    if (ih < 0 || ih >= H) {
                        std::fill(drow, drow + OW, S(0));
                        continue;
                    }
                    const S* srow = x + (int64_t(c) * H + ih) * W;
                    if (stride == 1) {
                        const int iw0 = -pad + q;
                        for (int ow = 0; ow < OW; ++ow) {
                            const int iw = iw0 + ow;
                            drow[ow] = (iw >= 0 && iw < W) ? srow[iw] : S(0);
                        }
                    } else {
                        for (int ow = 0; ow < OW; ++ow) {
                            const int iw = ow * stride - pad + q;
                            drow[ow] = (iw >= 0 && iw < W) ? srow[iw] : S(0);
                        }
                    }
                }
            }
}

template <typename S>
void col2im_add(const S* col, int C, int H, int W, int kh, int kw, int stride, int pad,
                int OH, int OW, S* dx) {
    for (int c = 0; c < C; ++c)
        for (int r = 0; r < kh; ++r)
            for (int q = 0; q < kw; ++q) {
                const S* src = col + (int64_t((c * kh + r) * kw + q)) * OH * OW;
                for (int oh = 0; oh < OH; ++oh) {
                    const int ih = oh * stride - pad + r;
                    if (ih < 0 || ih >= H) continue;
                    S* drow = dx + (int64_t(c) * H + ih) * W;
                    const S* srow = src + int64_t(oh) * OW;
                    for (int ow = 0; ow < OW; ++ow) {
                        const int iw = ow * stride - pad + q;
                        if (iw >= 0 && iw < W) drow[iw] += srow[ow];
                    }
                }
            }
}

}  // namespace

template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                 int stride, int pad) {
    GA_CHECK(x.ndim() == 4 && w.ndim() == 4, "conv2d: want [B,C,H,W], [K,C,kh,kw]");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int K = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    GA_CHECK(w.dim(1) == C, "conv2d: channel mismatch");
    const int OH = (H + 2 * pad - kh) / stride + 1;
    const int OW = (W + 2 * pad - kw) / stride + 1;
    const int ckk = C * kh * kw;
    const int64_t ohw = int64_t(OH) * OW;

    auto out = new_node<S>({B, K, OH, OW});
    static thread_local std::vector<S> col;
    col.resize(size_t(ckk) * ohw);

    for (int bi = 0; bi < B; ++bi) {
        im2col(x.data() + int64_t(bi) * C * H * W, C, H, W, kh, kw, stride, pad, OH, OW,
               col.data());
        S* y = out->value.data() + int64_t(bi) * K * ohw;
        gemm(false, false, K, int(ohw), ckk, S(1), w.data(), ckk, col.data(), int(ohw),
             S(0), y, int(ohw));
        if (b.defined())
            for (int k = 0; k < K; ++k) {
                const S bv = b.data()[k];
                S* row = y + int64_t(k) * ohw;
                for (int64_t i = 0; i < ohw; ++i) row[i] += bv;
            }
    }

    if (want_grad<S>({&x, &w, &b})) {
        out->requires_grad = true;
        out->parents = {x.node(), w.node()};
        if (b.defined()) out->parents.push_back(b.node());
        auto xn = x.node(), wn = w.node();
        auto bn = b.defined() ? b.node() : nullptr;
        out->backward_fn = [xn, wn, bn, B, C, H, W, K, kh, kw, stride, pad, OH, OW, ckk,
                            ohw](Node<S>& self) {
            static thread_local std::vector<S> colb, dcol;
            colb.resize(size_t(ckk) * ohw);
            if (xn->requires_grad) {
                dcol.resize(size_t(ckk) * ohw);
                xn->ensure_grad();
            }
            if (wn->requires_grad) wn->ensure_grad();
            if (bn && bn->requires_grad) bn->ensure_grad();
            for (int bi = 0; bi < B; ++bi) {
                const S* gy = self.grad.data() + int64_t(bi) * K * ohw;
                if (wn->requires_grad) {
                    im2col(xn->value.data() + int64_t(bi) * C * H * W, C, H, W, kh, kw,
                           stride, pad, OH, OW, colb.data());
                    gemm(false, true, K, ckk, int(ohw), S(1), gy, int(ohw), colb.data(),
                         int(ohw), S(1), wn->grad.data(), ckk);
                }
                if (xn->requires_grad) {
                    gemm(true, false, ckk, int(ohw), K, S(1), wn->value.data(), ckk, gy,
                         int(ohw), S(0), dcol.data(), int(ohw));
                    col2im_add(dcol.data(), C, H, W, kh, kw, stride, pad, OH, OW,
                               xn->grad.data() + int64_t(bi) * C * H * W);
                }
                if (bn && bn->requires_grad)
                    for (int k = 0; k < K; ++k) {
                        S acc = 0;
                        const S* row = gy + int64_t(k) * ohw;
                        for (int64_t i = 0; i < ohw; ++i) acc += row[i];
                        bn->grad[size_t(k)] += acc;
                    }
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> maxpool2(const Tensor<S>& x) {
    GA_CHECK(x.ndim() == 4 && x.dim(2) % 2 == 0 && x.dim(3) % 2 == 0,
             "maxpool2: want even spatial dims");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int OH = H / 2, OW = W / 2;
    auto out = new_node<S>({B, C, OH, OW});
    auto idx = std::make_shared<std::vector<int64_t>>(out->numel());
    const S* px = x.data();
    S* po = out->value.data();
    int64_t o = 0;
    for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
        const S* plane = px + bc * H * W;
        for (int oh = 0; oh < OH; ++oh)
            for (int ow = 0; ow < OW; ++ow, ++o) {
                const int64_t i00 = int64_t(oh * 2) * W + ow * 2;
                int64_t best = i00;
                if (plane[i00 + 1] > plane[best]) best = i00 + 1;
                if (plane[i00 + W] > plane[best]) best = i00 + W;
                if (plane[i00 + W + 1] > plane[best]) best = i00 + W + 1;
                po[o] = plane[best];
                (*idx)[size_t(o)] = bc * H * W + best;
            }
    }
    if (want_grad({&x})) {
        out->requires_grad = true;
        out->parents = {x.node()};
        auto xn = x.node();
        out->backward_fn = [xn, idx](Node<S>& self) {
            xn->ensure_grad();
            for (size_t i = 0; i < idx->size(); ++i)
                xn->grad[size_t((*idx)[i])] += self.grad[i];
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> avgpool2(const Tensor<S>& x) {
    GA_CHECK(x.ndim() == 4 && x.dim(2) % 2 == 0 && x.dim(3) % 2 == 0,
             "avgpool2: want even spatial dims");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int OH = H / 2, OW = W / 2;
    auto out = new_node<S>({B, C, OH, OW});
    const S* px = x.data();
    S* po = out->value.data();
    int64_t o = 0;
    for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
        const S* plane = px + bc * H * W;
        for (int oh = 0; oh < OH; ++oh)
            for (int ow = 0; ow < OW; ++ow, ++o) {
                const int64_t i00 = int64_t(oh * 2) * W + ow * 2;
                po[o] = (plane[i00] + plane[i00 + 1] + plane[i00 + W] + plane[i00 + W + 1]) /
                        S(4);
            }
    }
    if (want_grad({&x})) {
        out->requires_grad = true;
        out->parents = {x.node()};
        auto xn = x.node();
        out->backward_fn = [xn, B, C, H, W, OH, OW](Node<S>& self) {
            xn->ensure_grad();
            int64_t o = 0;
            for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
                S* plane = xn->grad.data() + bc * H * W;
                for (int oh = 0; oh < OH; ++oh)
                    for (int ow = 0; ow < OW; ++ow, ++o) {
                        const S g = self.grad[size_t(o)] / S(4);
                        const int64_t i00 = int64_t(oh * 2) * W + ow * 2;
                        plane[i00] += g;
                        plane[i00 + 1] += g;
                        plane[i00 + W] += g;
                        plane[i00 + W + 1] += g;
                    }
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> batchnorm2d(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta,
                      std::vector<S>& running_mean, std::vector<S>& running_var,
                      bool training, S momentum, S eps) {
    GA_CHECK(x.ndim() == 4, "batchnorm2d: want [B,C,H,W]");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    GA_CHECK(int(running_mean.size()) == C && int(running_var.size()) == C,
             "batchnorm2d: running stat size");
    const int64_t hw = int64_t(H) * W;
    const int64_t m = int64_t(B) * hw;
    auto out = new_node<S>(x.shape());

    auto mean = std::make_shared<std::vector<S>>(size_t(C));
    auto inv = std::make_shared<std::vector<S>>(size_t(C));
    const S* px = x.data();
    if (training) {
        for (int c = 0; c < C; ++c) {
            S acc = 0;
            for (int b = 0; b < B; ++b) {
                const S* p = px + (int64_t(b) * C + c) * hw;
                for (int64_t i = 0; i < hw; ++i) acc += p[i];
            }
            const S mu = acc / S(m);
            S vacc = 0;
            for (int b = 0; b < B; ++b) {
                const S* p = px + (int64_t(b) * C + c) * hw;
                for (int64_t i = 0; i < hw; ++i) {
                    const S d = p[i] - mu;
                    vacc += d * d;
                }
            }
            const S var = vacc / S(m);
            (*mean)[size_t(c)] = mu;
            (*inv)[size_t(c)] = S(1) / std::sqrt(var + eps);
            running_mean[size_t(c)] = (S(1) - momentum) * running_mean[size_t(c)] + momentum * mu;
            const S unbiased = m > 1 ? var * S(m) / S(m - 1) : var;
            running_var[size_t(c)] = (S(1) - momentum) * running_var[size_t(c)] + momentum * unbiased;
        }
    } else {
        for (int c = 0; c < C; ++c) {
            (*mean)[size_t(c)] = running_mean[size_t(c)];
            (*inv)[size_t(c)] = S(1) / std::sqrt(running_var[size_t(c)] + eps);
        }
    }

    S* po = out->value.data();
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const S mu = (*mean)[size_t(c)], iv = (*inv)[size_t(c)];
            const S ga = gamma.data()[c], be = beta.data()[c];
            const S* p = px + (int64_t(b) * C + c) * hw;
            S* q = po + (int64_t(b) * C + c) * hw;
            for (int64_t i = 0; i < hw; ++i) q[i] = ga * (p[i] - mu) * iv + be;
        }

    if (want_grad({&x, &gamma, &beta})) {
        out->requires_grad = true;
        out->parents = {x.node(), gamma.node(), beta.node()};
        auto xn = x.node(), gn = gamma.node(), bn = beta.node();
        out->backward_fn = [xn, gn, bn, mean, inv, training, B, C, hw, m](Node<S>& self) {
            if (xn->requires_grad) xn->ensure_grad();
            if (gn->requires_grad) gn->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            for (int c = 0; c < C; ++c) {
                const S mu = (*mean)[size_t(c)], iv = (*inv)[size_t(c)];
                const S ga = gn->value[size_t(c)];
                S sg = 0, sgx = 0;
                for (int b = 0; b < B; ++b) {
                    const int64_t off = (int64_t(b) * C + c) * hw;
                    const S* g = self.grad.data() + off;
                    const S* xv = xn->value.data() + off;
                    for (int64_t i = 0; i < hw; ++i) {
                        sg += g[i];
                        sgx += g[i] * (xv[i] - mu) * iv;
                    }
                }
                if (gn->requires_grad) gn->grad[size_t(c)] += sgx;
                if (bn->requires_grad) bn->grad[size_t(c)] += sg;
                if (xn->requires_grad) {
                    if (training) {
                        const S k1 = sg / S(m), k2 = sgx / S(m);
                        for (int b = 0; b < B; ++b) {
                            const int64_t off = (int64_t(b) * C + c) * hw;
                            const S* g = self.grad.data() + off;
                            const S* xv = xn->value.data() + off;
                            S* dx = xn->grad.data() + off;
                            for (int64_t i = 0; i < hw; ++i) {
                                const S xh = (xv[i] - mu) * iv;
                                dx[i] += ga * iv * (g[i] - k1 - xh * k2);
                            }
                        }
                    } else {
                        const S scale = ga * iv;
                        for (int b = 0; b < B; ++b) {
                            const int64_t off = (int64_t(b) * C + c) * hw;
                            const S* g = self.grad.data() + off;
                            S* dx = xn->grad.data() + off;
                            for (int64_t i = 0; i < hw; ++i) dx[i] += scale * g[i];
                        }
                    }
                }
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
    GA_CHECK(x.ndim() == 2 && w.ndim() == 2 && x.dim(1) == w.dim(1),
             "linear: want [B,F], [O,F]");
    const int B = x.dim(0), F = x.dim(1), O = w.dim(0);
    auto out = new_node<S>({B, O});
    gemm(false, true, B, O, F, S(1), x.data(), F, w.data(), F, S(0),
         out->value.data(), O);
    if (b.defined())
        for (int bi = 0; bi < B; ++bi)
            for (int o = 0; o < O; ++o) out->value[size_t(bi) * O + o] += b.data()[o];
    if (want_grad<S>({&x, &w, &b})) {
        out->requires_grad = true;
        out->parents = {x.node(), w.node()};
        if (b.defined()) out->parents.push_back(b.node());
        auto xn = x.node(), wn = w.node();
        auto bn = b.defined() ? b.node() : nullptr;
        out->backward_fn = [xn, wn, bn, B, F, O](Node<S>& self) {
            const S* gy = self.grad.data();
            if (xn->requires_grad) {
                xn->ensure_grad();
                gemm(false, false, B, F, O, S(1), gy, O, wn->value.data(), F, S(1),
                     xn->grad.data(), F);
            }
            if (wn->requires_grad) {
                wn->ensure_grad();
                gemm(true, false, O, F, B, S(1), gy, O, xn->value.data(), F, S(1),
                     wn->grad.data(), F);
            }
            if (bn && bn->requires_grad) {
                bn->ensure_grad();
                for (int bi = 0; bi < B; ++bi)
                    for (int o = 0; o < O; ++o) bn->grad[size_t(o)] += gy[size_t(bi) * O + o];
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> softmax2d(const Tensor<S>& x, S temperature) {
    GA_CHECK(x.ndim() == 4, "softmax2d: want [B,C,H,W]");
    GA_CHECK(temperature > S(0), "softmax2d: temperature must be positive");
    const int B = x.dim(0), C = x.dim(1);
    const int64_t hw = int64_t(x.dim(2)) * x.dim(3);
    auto out = new_node<S>(x.shape());
    const S* px = x.data();
    S* po = out->value.data();
    for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
        const S* row = px + bc * hw;
        S* orow = po + bc * hw;
        S mx = row[0];
        for (int64_t i = 1; i < hw; ++i) mx = std::max(mx, row[i]);
        S acc = 0;
        for (int64_t i = 0; i < hw; ++i) {
            orow[i] = std::exp((row[i] - mx) / temperature);
            acc += orow[i];
        }
        const S inv = S(1) / acc;
        for (int64_t i = 0; i < hw; ++i) orow[i] *= inv;
    }
    if (want_grad({&x})) {
        out->requires_grad = true;
        out->parents = {x.node()};
        auto xn = x.node();
        out->backward_fn = [xn, B, C, hw, temperature](Node<S>& self) {
            xn->ensure_grad();
            for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
                const S* y = self.value.data() + bc * hw;
                const S* g = self.grad.data() + bc * hw;
                S* dx = xn->grad.data() + bc * hw;
                S dot = 0;
                for (int64_t i = 0; i < hw; ++i) dot += g[i] * y[i];
                for (int64_t i = 0; i < hw; ++i)
                    dx[i] += y[i] * (g[i] - dot) / temperature;
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> dsnt(const Tensor<S>& p) {
    GA_CHECK(p.ndim() == 4, "dsnt: want [B,C,h,w]");
    const int B = p.dim(0), C = p.dim(1), h = p.dim(2), w = p.dim(3);
    auto out = new_node<S>({B, C, 2});
    const S* pp = p.data();
    for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
        const S* map = pp + bc * h * w;
        S sx = 0, sy = 0;
        for (int i = 0; i < h; ++i) {
            const S yc = S(2 * i + 1) / S(h) - S(1);
            const S* row = map + int64_t(i) * w;
            for (int j = 0; j < w; ++j) {
                const S xc = S(2 * j + 1) / S(w) - S(1);
                sx += row[j] * xc;
                sy += row[j] * yc;
            }
        }
        out->value[size_t(bc) * 2] = sx;
        out->value[size_t(bc) * 2 + 1] = sy;
    }
    if (want_grad({&p})) {
        out->requires_grad = true;
        out->parents = {p.node()};
        auto pn = p.node();
        out->backward_fn = [pn, B, C, h, w](Node<S>& self) {
            pn->ensure_grad();
            for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
                const S gx = self.grad[size_t(bc) * 2];
                const S gy = self.grad[size_t(bc) * 2 + 1];
                S* dmap = pn->grad.data() + bc * h * w;
                for (int i = 0; i < h; ++i) {
                    const S yc = S(2 * i + 1) / S(h) - S(1);
                    S* row = dmap + int64_t(i) * w;
                    for (int j = 0; j < w; ++j) {
                        const S xc = S(2 * j + 1) / S(w) - S(1);
                        row[j] += gx * xc + gy * yc;
                    }
                }
            }
        };
    }
    return Tensor<S>(out);
}

#define GA_INSTANTIATE(S)                                                              \
    template Tensor<S> conv2d<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, \
                                 int, int);                                            \
    template Tensor<S> maxpool2<S>(const Tensor<S>&);                                  \
    template Tensor<S> avgpool2<S>(const Tensor<S>&);                                  \
    template Tensor<S> batchnorm2d<S>(const Tensor<S>&, const Tensor<S>&,              \
                                      const Tensor<S>&, std::vector<S>&,               \
                                      std::vector<S>&, bool, S, S);                    \
    template Tensor<S> linear<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);\
    template Tensor<S> softmax2d<S>(const Tensor<S>&, S);                              \
    template Tensor<S> dsnt<S>(const Tensor<S>&);

GA_INSTANTIATE(float)
GA_INSTANTIATE(double)
#undef GA_INSTANTIATE

}  // namespace ops
}  // namespace graphae
