#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "core/nn.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "dataset/dataset.hpp"
#include "doctest.h"
#include "model/encoder.hpp"

using namespace graphae;

namespace {

// a 2-sample batch of real rendered shapes
Tensor<float> sample_images(uint64_t seed) {
    GenConfig gc;
    auto ds = Dataset::synth(2, seed, gc, -1);
    return make_batch<float>(ds, {0, 1}, 4).images;
}

// normalized per-channel probability maps, arbitrary content
template <typename S>
Tensor<S> random_attention(int b, int c, int h, int w, Rng& rng) {
    auto t = Tensor<S>::zeros({b, c, h, w}, false);
    for (int bi = 0; bi < b; ++bi)
        for (int ci = 0; ci < c; ++ci) {
            S* p = t.data() + (int64_t(bi) * c + ci) * h * w;
            S sum = 0;
            for (int k = 0; k < h * w; ++k) {
                p[k] = S(0.05 + rng.uniform());
                sum += p[k];
            }
            for (int k = 0; k < h * w; ++k) p[k] /= sum;
        }
    return t;
}

}  // namespace

TEST_CASE("encode produces well-formed tensors") {
    EncoderConfig cfg;  // n_max 4, canvas 128, roi 16
    Rng rng(5);
    Encoder<float> enc(cfg, rng);
    auto img = sample_images(11);

    auto feats = enc.extract_features(img, false);
    CHECK(feats.shape() == std::vector<int>{2, 64, 32, 32});

    auto g = enc.encode(img, false);
    CHECK(g.attention.shape() == std::vector<int>{2, 4, 32, 32});
    CHECK(g.coords.shape() == std::vector<int>{2, 4, 2});
    CHECK(g.logits.shape() == std::vector<int>{2, 4, 4});
    CHECK(g.probs.shape() == std::vector<int>{2, 4, 4});

    auto patches = enc.build_edge_rois(g.coords.detach(), img);
    CHECK(patches.shape() == std::vector<int>{2 * 16, 1, 16, 16});
    auto scores = enc.classify_edge_logits(patches, false);
    CHECK(scores.shape() == std::vector<int>{2 * 16, 1});

    for (int64_t k = 0; k < g.coords.numel(); ++k) {
        CHECK(g.coords.data()[k] >= -1.0f);
        CHECK(g.coords.data()[k] <= 1.0f);
    }
}

TEST_CASE("attention channels are probability maps") {
    EncoderConfig cfg;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        Rng rng(seed);
        Encoder<float> enc(cfg, rng);
        auto img = sample_images(seed + 100);
        auto att = enc.predict_attention(enc.extract_features(img, false), false);
        const float* p = att.data();
        for (int b = 0; b < att.dim(0); ++b)
            for (int c = 0; c < att.dim(1); ++c) {
                double sum = 0;
                for (int k = 0; k < 32 * 32; ++k) {
                    const float v = p[(int64_t(b) * att.dim(1) + c) * 32 * 32 + k];
                    CHECK(v >= 0.0f);
                    sum += v;
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
            }
    }
}

TEST_CASE("coordinates are attention-weighted template means") {
    const int W = 32;

    SUBCASE("uniform map sits at the origin") {
        auto p = Tensor<double>::full({1, 1, W, W}, 1.0 / (W * W), false);
        auto c = Encoder<double>::coords_from_attention(p);
        CHECK(c.data()[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(c.data()[1] == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("a delta at cell (15,15) reads the template there") {
        auto p = Tensor<double>::zeros({1, 1, W, W}, false);
        p.data()[15 * W + 15] = 1.0;
        auto c = Encoder<double>::coords_from_attention(p);
        // template value at cell 15 of 32: (2*15+1)/32 - 1 = -1/32
        CHECK(c.data()[0] == doctest::Approx(-0.03125));
        CHECK(c.data()[1] == doctest::Approx(-0.03125));
    }

    SUBCASE("mass split across mirrored cells cancels") {
        auto p = Tensor<double>::zeros({1, 1, W, W}, false);
        p.data()[7 * W + 10] = 0.5;   // x cells 10 and 21 mirror about the centre
        p.data()[7 * W + 21] = 0.5;
        auto c = Encoder<double>::coords_from_attention(p);
        CHECK(c.data()[0] == doctest::Approx(0.0).epsilon(1e-12));
        // y stays at row 7's template value
        CHECK(c.data()[1] == doctest::Approx((2.0 * 7 + 1) / W - 1.0));
    }

    SUBCASE("random maps match a scalar-loop reference") {
        Rng rng(17);
        auto p = random_attention<double>(3, 4, W, W, rng);
        auto c = Encoder<double>::coords_from_attention(p);
        for (int b = 0; b < 3; ++b)
            for (int ch = 0; ch < 4; ++ch) {
                double ex = 0, ey = 0;
                const double* m = p.data() + (int64_t(b) * 4 + ch) * W * W;
                for (int y = 0; y < W; ++y)
                    for (int x = 0; x < W; ++x) {
                        ex += m[y * W + x] * ((2.0 * x + 1) / W - 1.0);
                        ey += m[y * W + x] * ((2.0 * y + 1) / W - 1.0);
                    }
                CHECK(c.data()[(int64_t(b) * 4 + ch) * 2 + 0] ==
                      doctest::Approx(ex).epsilon(1e-6));
                CHECK(c.data()[(int64_t(b) * 4 + ch) * 2 + 1] ==
                      doctest::Approx(ey).epsilon(1e-6));
            }
    }

    SUBCASE("permuting channels permutes coordinate rows") {
        Rng rng(23);
        auto p = random_attention<double>(1, 4, W, W, rng);
        const int perm[4] = {2, 0, 3, 1};
        auto q = Tensor<double>::zeros({1, 4, W, W}, false);
        for (int ch = 0; ch < 4; ++ch)
            std::copy(p.data() + int64_t(perm[ch]) * W * W,
                      p.data() + int64_t(perm[ch] + 1) * W * W,
                      q.data() + int64_t(ch) * W * W);
        auto cp = Encoder<double>::coords_from_attention(p);
        auto cq = Encoder<double>::coords_from_attention(q);
        for (int ch = 0; ch < 4; ++ch) {
            CHECK(cq.data()[ch * 2 + 0] == cp.data()[perm[ch] * 2 + 0]);
            CHECK(cq.data()[ch * 2 + 1] == cp.data()[perm[ch] * 2 + 1]);
        }
    }
}

TEST_CASE("pair patches ignore endpoint order, making probabilities symmetric") {
    EncoderConfig cfg;
    Rng rng(31);
    Encoder<float> enc(cfg, rng);
    auto img = sample_images(42);

    auto coords = Tensor<float>::zeros({2, 4, 2}, false);
    Rng crng(9);
    for (int64_t k = 0; k < coords.numel(); ++k)
        coords.data()[k] = float(crng.uniform(-0.8, 0.8));

    auto patches = enc.build_edge_rois(coords, img);
    const int roi2 = 16 * 16;
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                const float* pij = patches.data() + ((int64_t(b) * 4 + i) * 4 + j) * roi2;
                const float* pji = patches.data() + ((int64_t(b) * 4 + j) * 4 + i) * roi2;
                for (int k = 0; k < roi2; ++k) CHECK(pij[k] == pji[k]);
            }

    auto g = enc.encode(img, false);
    const float* lg = g.logits.data();
    const float* pr = g.probs.data();
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const float pij = pr[(int64_t(b) * 4 + i) * 4 + j];
                const float pji = pr[(int64_t(b) * 4 + j) * 4 + i];
                CHECK(pij == pji);
                if (i == j) {
                    CHECK(pij == 0.0f);
                } else {
                    CHECK(pij > 0.0f);
                    CHECK(pij < 1.0f);
                    // probs are the symmetrized sigmoid of the raw scores
                    const double sij = 1.0 / (1.0 + std::exp(-double(
                                                 lg[(int64_t(b) * 4 + i) * 4 + j])));
                    const double sji = 1.0 / (1.0 + std::exp(-double(
                                                 lg[(int64_t(b) * 4 + j) * 4 + i])));
                    CHECK(pij == doctest::Approx(0.5 * (sij + sji)).epsilon(1e-5));
                }
            }
}

TEST_CASE("evaluation mode is pure, training mode advances batch statistics") {
    EncoderConfig cfg;
    Rng rng(41);
    Encoder<float> enc(cfg, rng);
    nn::ParamStore<float> store;
    enc.register_params(store);
    auto img = sample_images(77);

    auto a = enc.encode(img, false);
    auto b = enc.encode(img, false);
    for (int64_t k = 0; k < a.probs.numel(); ++k)
        CHECK(a.probs.data()[k] == b.probs.data()[k]);
    for (int64_t k = 0; k < a.coords.numel(); ++k)
        CHECK(a.coords.data()[k] == b.coords.data()[k]);

    std::vector<std::vector<float>> before;
    for (auto& [name, buf] : store.buffers) before.push_back(*buf);
    (void)enc.encode(img, true);
    bool any_changed = false;
    for (size_t q = 0; q < store.buffers.size(); ++q)
        if (*store.buffers[q].second != before[q]) any_changed = true;
    CHECK(any_changed);  // running statistics moved
}

TEST_CASE("degenerate images still give finite predictions") {
    EncoderConfig cfg;
    Rng rng(51);
    Encoder<float> enc(cfg, rng);
    for (float fill : {0.0f, 1.0f}) {
        auto img = Tensor<float>::full({1, 1, 128, 128}, fill, false);
        auto g = enc.encode(img, false);
        for (int64_t k = 0; k < g.coords.numel(); ++k)
            CHECK(std::isfinite(g.coords.data()[k]));
        for (int64_t k = 0; k < g.probs.numel(); ++k)
            CHECK(std::isfinite(g.probs.data()[k]));
        for (int64_t k = 0; k < g.attention.numel(); ++k)
            CHECK(std::isfinite(g.attention.data()[k]));
    }
}

TEST_CASE("construction is deterministic in the init stream") {
    EncoderConfig cfg;
    Rng r1(123), r2(123), r3(124);
    Encoder<float> e1(cfg, r1), e2(cfg, r2), e3(cfg, r3);
    auto img = sample_images(8);
    auto g1 = e1.encode(img, false);
    auto g2 = e2.encode(img, false);
    auto g3 = e3.encode(img, false);
    bool all_eq = true, any_diff = false;
    for (int64_t k = 0; k < g1.probs.numel(); ++k) {
        all_eq = all_eq && g1.probs.data()[k] == g2.probs.data()[k];
        any_diff = any_diff || g1.probs.data()[k] != g3.probs.data()[k];
    }
    CHECK(all_eq);
    CHECK(any_diff);
}
