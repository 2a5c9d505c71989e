#include <algorithm>
#include <cmath>

#include "core/ops.hpp"
#include "core/ops_common.hpp"

namespace graphae {
namespace ops {

using detail::new_node;
using detail::want_grad;

namespace {

// normalized [-1,1] pixel-center coordinate -> pixel index space
template <typename S>
inline S to_px(S c, int size) {
    return (c + S(1)) * S(0.5) * S(size) - S(0.5);
}

// bilinear sample of a row-major raster with pixel centers at integer
// positions and zero padding; also returns the spatial derivatives
template <typename S>
inline S bilerp(const S* img, int H, int W, S u, S v, S& du, S& dv) {
    const int j0 = int(std::floor(u)), i0 = int(std::floor(v));
    const S fu = u - S(j0), fv = v - S(i0);
    auto at = [&](int i, int j) -> S {
        return (i >= 0 && i < H && j >= 0 && j < W) ? img[int64_t(i) * W + j] : S(0);
    };
    const S t00 = at(i0, j0), t01 = at(i0, j0 + 1);
    const S t10 = at(i0 + 1, j0), t11 = at(i0 + 1, j0 + 1);
    du = (S(1) - fv) * (t01 - t00) + fv * (t11 - t10);
    dv = (S(1) - fu) * (t10 - t00) + fu * (t11 - t01);
    return (S(1) - fv) * ((S(1) - fu) * t00 + fu * t01) +
           fv * ((S(1) - fu) * t10 + fu * t11);
}

// axis-aligned box of one ordered node pair, expanded to the minimum side
template <typename S>
struct PairBox {
    S lo[2], hi[2];      // pixel-space box corners, [x, y]
    S w_lo[2], w_hi[2];  // d lo/hi / d first-node coordinate (second is 1-w)
};

template <typename S>
PairBox<S> pair_box(S xi, S yi, S xj, S yj, S min_side) {
    PairBox<S> bx;
    const S p0[2] = {xi, yi}, p1[2] = {xj, yj};
    for (int a = 0; a < 2; ++a) {
        const bool i_lo = p0[a] <= p1[a];
        S lo = i_lo ? p0[a] : p1[a];
        S hi = i_lo ? p1[a] : p0[a];
        if (hi - lo < min_side) {
            const S c = (lo + hi) * S(0.5);
            bx.lo[a] = c - min_side * S(0.5);
            bx.hi[a] = c + min_side * S(0.5);
            bx.w_lo[a] = S(0.5);  // both corners move with the box centre
            bx.w_hi[a] = S(0.5);
        } else {
            bx.lo[a] = lo;
            bx.hi[a] = hi;
            bx.w_lo[a] = i_lo ? S(1) : S(0);
            bx.w_hi[a] = i_lo ? S(0) : S(1);
        }
    }
    return bx;
}

}  // namespace

template <typename S>
Tensor<S> roi_pairs(const Tensor<S>& image, const Tensor<S>& coords, int roi,
                    S min_side_px) {
    GA_CHECK(image.ndim() == 4 && image.dim(1) == 1, "roi_pairs: want [B,1,H,W] image");
    GA_CHECK(coords.ndim() == 3 && coords.dim(2) == 2, "roi_pairs: want [B,N,2] coords");
    GA_CHECK(image.dim(0) == coords.dim(0), "roi_pairs: batch mismatch");
    GA_CHECK(!image.requires_grad(), "roi_pairs: image is treated as data");
    const int B = image.dim(0), H = image.dim(2), W = image.dim(3);
    const int N = coords.dim(1);
    auto out = new_node<S>({B * N * N, 1, roi, roi});

    const S* cd = coords.data();
    S* po = out->value.data();
    for (int b = 0; b < B; ++b) {
        const S* img = image.data() + int64_t(b) * H * W;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const S xi = to_px(cd[(int64_t(b) * N + i) * 2], W);
                const S yi = to_px(cd[(int64_t(b) * N + i) * 2 + 1], H);
                const S xj = to_px(cd[(int64_t(b) * N + j) * 2], W);
                const S yj = to_px(cd[(int64_t(b) * N + j) * 2 + 1], H);
                const auto bx = pair_box(xi, yi, xj, yj, min_side_px);
                S* patch = po + ((int64_t(b) * N + i) * N + j) * roi * roi;
                for (int r = 0; r < roi; ++r) {
                    const S fy = (S(r) + S(0.5)) / S(roi);
                    const S v = bx.lo[1] + fy * (bx.hi[1] - bx.lo[1]);
                    for (int c = 0; c < roi; ++c) {
                        const S fx = (S(c) + S(0.5)) / S(roi);
                        const S u = bx.lo[0] + fx * (bx.hi[0] - bx.lo[0]);
                        S du, dv;
                        patch[int64_t(r) * roi + c] = bilerp(img, H, W, u, v, du, dv);
                    }
                }
            }
    }

    if (want_grad({&coords})) {
        out->requires_grad = true;
        out->parents = {coords.node()};
        auto cn = coords.node();
        auto imn = image.node();  // leaf: value stays alive through backward
        out->backward_fn = [cn, imn, B, N, H, W, roi, min_side_px](Node<S>& self) {
            cn->ensure_grad();
            for (int b = 0; b < B; ++b) {
                const S* img = imn->value.data() + int64_t(b) * H * W;
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) {
                        const S* c0 = cn->value.data() + (int64_t(b) * N + i) * 2;
                        const S* c1 = cn->value.data() + (int64_t(b) * N + j) * 2;
                        const S xi = to_px(c0[0], W), yi = to_px(c0[1], H);
                        const S xj = to_px(c1[0], W), yj = to_px(c1[1], H);
                        const auto bx = pair_box(xi, yi, xj, yj, min_side_px);
                        const S* g =
                            self.grad.data() + ((int64_t(b) * N + i) * N + j) * roi * roi;
                        S dlo[2] = {0, 0}, dhi[2] = {0, 0};
                        for (int r = 0; r < roi; ++r) {
                            const S fy = (S(r) + S(0.5)) / S(roi);
                            const S v = bx.lo[1] + fy * (bx.hi[1] - bx.lo[1]);
                            for (int c = 0; c < roi; ++c) {
                                const S gp = g[int64_t(r) * roi + c];
                                if (gp == S(0)) continue;
                                const S fx = (S(c) + S(0.5)) / S(roi);
                                const S u = bx.lo[0] + fx * (bx.hi[0] - bx.lo[0]);
                                S du, dv;
                                bilerp(img, H, W, u, v, du, dv);
                                dlo[0] += gp * du * (S(1) - fx);
                                dhi[0] += gp * du * fx;
                                dlo[1] += gp * dv * (S(1) - fy);
                                dhi[1] += gp * dv * fy;
                            }
                        }
                        S* gi = cn->grad.data() + (int64_t(b) * N + i) * 2;
                        S* gj = cn->grad.data() + (int64_t(b) * N + j) * 2;
                        const S sx = S(W) * S(0.5), sy = S(H) * S(0.5);
                        gi[0] += sx * (dlo[0] * bx.w_lo[0] + dhi[0] * bx.w_hi[0]);
                        gj[0] += sx * (dlo[0] * (S(1) - bx.w_lo[0]) +
                                       dhi[0] * (S(1) - bx.w_hi[0]));
                        gi[1] += sy * (dlo[1] * bx.w_lo[1] + dhi[1] * bx.w_hi[1]);
                        gj[1] += sy * (dlo[1] * (S(1) - bx.w_lo[1]) +
                                       dhi[1] * (S(1) - bx.w_hi[1]));
                    }
            }
        };
    }
    return Tensor<S>(out);
}

namespace {

// everything the pixel loop needs about one warped edge
template <typename S>
struct EdgeFrame {
    S ax, ay, dx, dy, L, L2;  // first endpoint, direction, length (pixels)
    int x0, x1, y0, y1;       // clamped canvas bounding rectangle
    bool ok;
};

template <typename S>
EdgeFrame<S> edge_frame(const S* ca, const S* cb, const EdgeTemplateGeom& geom,
                        int canvas, S min_len_px) {
    EdgeFrame<S> f;
    f.ax = to_px(ca[0], canvas);
    f.ay = to_px(ca[1], canvas);
    f.dx = to_px(cb[0], canvas) - f.ax;
    f.dy = to_px(cb[1], canvas) - f.ay;
    f.L2 = f.dx * f.dx + f.dy * f.dy;
    f.L = std::sqrt(f.L2);
    f.ok = f.L >= min_len_px;
    if (!f.ok) return f;
    // forward-map the template's nonzero sampling region (1 px beyond the
    // raster on every side) and take its canvas-space bounding rectangle
    const S lt = S(geom.ax1 - geom.ax0);
    const S nx = -f.dy / f.L, ny = f.dx / f.L;
    S xmin = S(canvas), xmax = S(-1), ymin = S(canvas), ymax = S(-1);
    const S cs[4][2] = {{S(-1), S(-1)},
                        {S(geom.width), S(-1)},
                        {S(geom.width), S(geom.height)},
                        {S(-1), S(geom.height)}};
    for (auto& t : cs) {
        const S px = f.ax + (t[0] - S(geom.ax0)) / lt * f.dx + (t[1] - S(geom.ay0)) * nx;
        const S py = f.ay + (t[0] - S(geom.ax0)) / lt * f.dy + (t[1] - S(geom.ay0)) * ny;
        xmin = std::min(xmin, px);
        xmax = std::max(xmax, px);
        ymin = std::min(ymin, py);
        ymax = std::max(ymax, py);
    }
    f.x0 = std::max(0, int(std::floor(xmin)) - 1);
    f.x1 = std::min(canvas - 1, int(std::ceil(xmax)) + 1);
    f.y0 = std::max(0, int(std::floor(ymin)) - 1);
    f.y1 = std::min(canvas - 1, int(std::ceil(ymax)) + 1);
    return f;
}

}  // namespace

template <typename S>
Tensor<S> draw_edges(const Tensor<S>& coords, const Tensor<S>& probs,
                     const std::vector<S>& tmpl, const EdgeTemplateGeom& geom,
                     int canvas, S min_len_px) {
    GA_CHECK(coords.ndim() == 3 && coords.dim(2) == 2, "draw_edges: want [B,N,2] coords");
    GA_CHECK(probs.ndim() == 3 && probs.dim(1) == probs.dim(2) &&
                 probs.dim(0) == coords.dim(0) && probs.dim(1) == coords.dim(1),
             "draw_edges: want [B,N,N] probs");
    GA_CHECK(int(tmpl.size()) == geom.width * geom.height, "draw_edges: template size");
    const int B = coords.dim(0), N = coords.dim(1);
    const int TH = geom.height, TW = geom.width;
    const S lt = S(geom.ax1 - geom.ax0);
    auto out = new_node<S>({B, 1, canvas, canvas});
    std::fill(out->value.begin(), out->value.end(), S(0));

    const S* cd = coords.data();
    const S* pr = probs.data();
    for (int b = 0; b < B; ++b) {
        S* img = out->value.data() + int64_t(b) * canvas * canvas;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) {
                const S p = pr[(int64_t(b) * N + i) * N + j];
                const auto f = edge_frame(cd + (int64_t(b) * N + i) * 2,
                                          cd + (int64_t(b) * N + j) * 2, geom, canvas,
                                          min_len_px);
                if (!f.ok) continue;
                for (int py = f.y0; py <= f.y1; ++py)
                    for (int px = f.x0; px <= f.x1; ++px) {
                        const S rx = S(px) - f.ax, ry = S(py) - f.ay;
                        const S u = S(geom.ax0) + lt * (f.dx * rx + f.dy * ry) / f.L2;
                        const S v = S(geom.ay0) + (f.dx * ry - f.dy * rx) / f.L;
                        S du, dv;
                        const S val = bilerp(tmpl.data(), TH, TW, u, v, du, dv);
                        if (val != S(0)) img[int64_t(py) * canvas + px] += p * val;
                    }
            }
    }

    if (want_grad({&coords, &probs})) {
        out->requires_grad = true;
        out->parents = {coords.node(), probs.node()};
        auto cn = coords.node();
        auto pn = probs.node();
        out->backward_fn = [cn, pn, tmpl, geom, canvas, min_len_px, B, N, TH, TW,
                            lt](Node<S>& self) {
            const bool gc = cn->requires_grad, gp = pn->requires_grad;
            if (gc) cn->ensure_grad();
            if (gp) pn->ensure_grad();
            for (int b = 0; b < B; ++b) {
                const S* g = self.grad.data() + int64_t(b) * canvas * canvas;
                for (int i = 0; i < N; ++i)
                    for (int j = i + 1; j < N; ++j) {
                        const S p = pn->value[(int64_t(b) * N + i) * N + j];
                        const auto f = edge_frame(cn->value.data() + (int64_t(b) * N + i) * 2,
                                                  cn->value.data() + (int64_t(b) * N + j) * 2,
                                                  geom, canvas, min_len_px);
                        if (!f.ok) continue;
                        S dprob = 0, dax = 0, day = 0, dbx = 0, dby = 0;
                        for (int py = f.y0; py <= f.y1; ++py)
                            for (int px = f.x0; px <= f.x1; ++px) {
                                const S go = g[int64_t(py) * canvas + px];
                                if (go == S(0)) continue;
                                const S rx = S(px) - f.ax, ry = S(py) - f.ay;
                                const S s = (f.dx * rx + f.dy * ry) / f.L2;
                                const S u = S(geom.ax0) + lt * s;
                                const S w = (f.dx * ry - f.dy * rx) / f.L;
                                const S v = S(geom.ay0) + w;
                                S du, dv;
                                const S val = bilerp(tmpl.data(), TH, TW, u, v, du, dv);
                                dprob += go * val;
                                if (!gc) continue;
                                const S gu = go * p * du, gv = go * p * dv;
                                // d s / d endpoints, then d v / d endpoints
                                dbx += gu * lt * (rx - S(2) * s * f.dx) / f.L2;
                                dby += gu * lt * (ry - S(2) * s * f.dy) / f.L2;
                                dax += gu * lt * (S(2) * s * f.dx - rx - f.dx) / f.L2;
                                day += gu * lt * (S(2) * s * f.dy - ry - f.dy) / f.L2;
                                dbx += gv * (ry / f.L - w * f.dx / f.L2);
                                dby += gv * (-rx / f.L - w * f.dy / f.L2);
                                dax += gv * ((f.dy - ry) / f.L + w * f.dx / f.L2);
                                day += gv * ((rx - f.dx) / f.L + w * f.dy / f.L2);
                            }
                        if (gp) pn->grad[(int64_t(b) * N + i) * N + j] += dprob;
                        if (gc) {
                            const S sc = S(canvas) * S(0.5);
                            S* gi = cn->grad.data() + (int64_t(b) * N + i) * 2;
                            S* gj = cn->grad.data() + (int64_t(b) * N + j) * 2;
                            gi[0] += sc * dax;
                            gi[1] += sc * day;
                            gj[0] += sc * dbx;
                            gj[1] += sc * dby;
                        }
                    }
            }
        };
    }
    return Tensor<S>(out);
}

template <typename S>
Tensor<S> blur1d(const Tensor<S>& x, const std::vector<S>& kernel, bool horizontal) {
    GA_CHECK(x.ndim() == 4, "blur1d: want [B,C,H,W]");
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int K = int(kernel.size());
    const int OH = horizontal ? H : H - K + 1;
    const int OW = horizontal ? W - K + 1 : W;
    GA_CHECK(OH > 0 && OW > 0, "blur1d: kernel larger than image");
    auto out = new_node<S>({B, C, OH, OW});
    const S* px = x.data();
    S* po = out->value.data();
    for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
        const S* in = px + bc * H * W;
        S* o = po + bc * OH * OW;
        for (int i = 0; i < OH; ++i)
            for (int j = 0; j < OW; ++j) {
                S acc = 0;
                if (horizontal)
                    for (int t = 0; t < K; ++t) acc += kernel[size_t(t)] * in[int64_t(i) * W + j + t];
                else
                    for (int t = 0; t < K; ++t) acc += kernel[size_t(t)] * in[int64_t(i + t) * W + j];
                o[int64_t(i) * OW + j] = acc;
            }
    }
    if (want_grad({&x})) {
        out->requires_grad = true;
        out->parents = {x.node()};
        auto xn = x.node();
        out->backward_fn = [xn, kernel, horizontal, B, C, H, W, K, OH, OW](Node<S>& self) {
            xn->ensure_grad();
            for (int64_t bc = 0; bc < int64_t(B) * C; ++bc) {
                S* dx = xn->grad.data() + bc * H * W;
                const S* g = self.grad.data() + bc * OH * OW;
                for (int i = 0; i < OH; ++i)
                    for (int j = 0; j < OW; ++j) {
                        const S gv = g[int64_t(i) * OW + j];
                        if (gv == S(0)) continue;
                        if (horizontal)
                            for (int t = 0; t < K; ++t) dx[int64_t(i) * W + j + t] += kernel[size_t(t)] * gv;
                        else
                            for (int t = 0; t < K; ++t) dx[int64_t(i + t) * W + j] += kernel[size_t(t)] * gv;
                    }
            }
        };
    }
    return Tensor<S>(out);
}

#define GA_INSTANTIATE(S)                                                            \
    template Tensor<S> roi_pairs<S>(const Tensor<S>&, const Tensor<S>&, int, S);     \
    template Tensor<S> draw_edges<S>(const Tensor<S>&, const Tensor<S>&,             \
                                     const std::vector<S>&, const EdgeTemplateGeom&, \
                                     int, S);                                        \
    template Tensor<S> blur1d<S>(const Tensor<S>&, const std::vector<S>&, bool);

GA_INSTANTIATE(float)
GA_INSTANTIATE(double)
#undef GA_INSTANTIATE

}  // namespace ops
}  // namespace graphae
