#include "harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "core/check.hpp"
#include "core/image.hpp"
#include "json.hpp"

namespace graphae {

namespace {

using nlohmann::json;

// same anti-aliased coverage ramp the dataset rasterizer uses
void draw_segment(std::vector<float>& img, int canvas, std::array<double, 2> a,
                  std::array<double, 2> b, double stroke) {
    const double reach = stroke * 0.5 + 0.5;
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = std::max(dx * dx + dy * dy, 1e-12);
    const int x0 = std::max(0, int(std::floor(std::min(a[0], b[0]) - reach)));
    const int x1 = std::min(canvas - 1, int(std::ceil(std::max(a[0], b[0]) + reach)));
    const int y0 = std::max(0, int(std::floor(std::min(a[1], b[1]) - reach)));
    const int y1 = std::min(canvas - 1, int(std::ceil(std::max(a[1], b[1]) + reach)));
    for (int py = y0; py <= y1; ++py)
        for (int px = x0; px <= x1; ++px) {
            const double t =
                std::clamp(((px - a[0]) * dx + (py - a[1]) * dy) / len2, 0.0, 1.0);
            const double dist = std::hypot(px - (a[0] + t * dx), py - (a[1] + t * dy));
            float& pix = img[size_t(py) * canvas + px];
            pix = std::max(pix, float(std::clamp(reach - dist, 0.0, 1.0)));
        }
}

std::vector<float> graph_panel(const std::vector<Triplet>& triplets, int canvas,
                               double stroke) {
    std::vector<float> img(size_t(canvas) * canvas, 0.0f);
    for (const auto& t : triplets) draw_segment(img, canvas, t.a, t.b, stroke);
    return img;
}

template <typename S>
std::vector<float> adjacency_panel(const S* probs, int n, int canvas) {
    std::vector<float> img(size_t(canvas) * canvas, 0.0f);
    for (int py = 0; py < canvas; ++py)
        for (int px = 0; px < canvas; ++px) {
            const int i = std::min(n - 1, py * n / canvas);
            const int j = std::min(n - 1, px * n / canvas);
            img[size_t(py) * canvas + px] = float(probs[i * n + j]);
        }
    return img;
}

template <typename S>
std::vector<float> image_slice(const Tensor<S>& t, int64_t b, int canvas) {
    std::vector<float> img(size_t(canvas) * canvas);
    const S* src = t.data() + b * canvas * canvas;
    for (size_t q = 0; q < img.size(); ++q) img[q] = float(src[q]);
    return img;
}

template <typename S>
std::vector<Triplet> triplets_of(const PredictedGraph<S>& g, int64_t b, int n,
                                 int canvas, const EvalConfig& eval) {
    std::vector<std::array<double, 2>> px(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
        px[size_t(k)] = {coord_to_px(double(g.coords.data()[(b * n + k) * 2 + 0]), canvas),
                         coord_to_px(double(g.coords.data()[(b * n + k) * 2 + 1]), canvas)};
    std::vector<double> pr(size_t(n) * n);
    for (int64_t q = 0; q < int64_t(n) * n; ++q)
        pr[size_t(q)] = double(g.probs.data()[b * n * n + q]);
    return predicted_triplets(px, pr, n, eval);
}

json report_json(const EvalReport& r) {
    return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
            {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn}};
}

}  // namespace

template <typename S>
void render_sample_grid(const Dataset& ds, const std::vector<int64_t>& indices,
                        Encoder<S>& enc, Decoder<S>& dec, Encoder<S>* baseline_enc,
                        const EvalConfig& eval, const std::string& out_png) {
    GA_CHECK(!indices.empty(), "render_sample_grid: no samples requested");
    const int canvas = ds.canvas();
    const int n = enc.config().n_max;
    const double stroke = dec.config().stroke_width;
    const int n_rows = int(indices.size());
    const int W = kReportColumns * canvas, H = n_rows * canvas;
    std::vector<float> sheet(size_t(W) * H, 0.0f);

    NoGrad ng;
    auto batch = make_batch<S>(ds, indices, n);
    auto g = enc.encode(batch.images, false);
    auto out = dec.decode(g.coords, g.probs);
    PredictedGraph<S> bg;
    if (baseline_enc) bg = baseline_enc->encode(batch.images, false);

    for (int row = 0; row < n_rows; ++row) {
        const auto& rec = ds.record(indices[size_t(row)]);
        std::vector<std::vector<float>> panels(kReportColumns);
        panels[0] = image_slice(batch.images, row, canvas);
        panels[1] = graph_panel(gt_triplets_px(rec), canvas, stroke);
        panels[2] = image_slice(out.coarse, row, canvas);
        panels[3] = image_slice(out.refined, row, canvas);
        panels[4] = graph_panel(triplets_of(g, row, n, canvas, eval), canvas, stroke);
        panels[5] = adjacency_panel(g.probs.data() + int64_t(row) * n * n, n, canvas);
        if (baseline_enc) {
            panels[6] =
                graph_panel(triplets_of(bg, row, n, canvas, eval), canvas, stroke);
            panels[7] = adjacency_panel(bg.probs.data() + int64_t(row) * n * n, n, canvas);
        } else {
            panels[6].assign(size_t(canvas) * canvas, 0.0f);
            panels[7].assign(size_t(canvas) * canvas, 0.0f);
        }
        for (int c = 0; c < kReportColumns; ++c)
            paste_tile(sheet, W, H, panels[size_t(c)], canvas, canvas, c * canvas,
                       row * canvas);
    }
    write_png_gray(out_png, sheet, W, H);
}

void write_run_json(const RunResult& rr, const std::string& path) {
    json j;
    j["config"] = json::parse(config_to_json(rr.config));
    j["aggregate"] = {{"f1_mean", rr.f1_ok.mean},
                      {"f1_std", rr.f1_ok.stddev},
                      {"f1_mean_all", rr.f1_all.mean},
                      {"f1_std_all", rr.f1_all.stddev},
                      {"n_seeds", int(rr.runs.size())},
                      {"n_failed", rr.n_failed},
                      {"std_kind", "population"},
                      {"single_seed_caveat", rr.single_seed_caveat}};
    json seeds = json::array();
    for (const auto& run : rr.runs) {
        json s;
        s["seed"] = run.seed;
        s["aborted"] = run.result.aborted;
        s["completed_epochs"] = run.result.completed_epochs;
        s["checkpoint"] = run.result.checkpoint_path;
        s["test"] = report_json(run.result.test_report);
        json curve = json::array();
        for (const auto& e : run.result.curve)
            curve.push_back({{"epoch", e.epoch},
                             {"lr", e.lr},
                             {"total", e.total},
                             {"main", e.main},
                             {"aux", e.aux},
                             {"val_f1", e.val_f1}});
        s["curve"] = std::move(curve);
        seeds.push_back(std::move(s));
    }
    j["seeds"] = std::move(seeds);
    std::ofstream out(path);
    GA_CHECK(out.good(), "write_run_json: cannot open " + path);
    out << j.dump(2) << "\n";
    GA_CHECK(out.good(), "write_run_json: write failed for " + path);
}

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path) {
    GA_CHECK(!rows.empty(), "write_ablation_csv: no rows");
    std::ofstream out(path);
    GA_CHECK(out.good(), "write_ablation_csv: cannot open " + path);
    out << "label,f1_mean,f1_std,f1_mean_all,f1_std_all,n_seeds,n_failed\n";
    for (const auto& r : rows)
        out << r.label << "," << r.result.f1_ok.mean << "," << r.result.f1_ok.stddev
            << "," << r.result.f1_all.mean << "," << r.result.f1_all.stddev << ","
            << r.result.runs.size() << "," << r.result.n_failed << "\n";
    GA_CHECK(out.good(), "write_ablation_csv: write failed for " + path);
}

template <typename S>
void render_report(const RunResult& rr, const Dataset& ds,
                   const std::vector<int64_t>& indices, Encoder<S>& enc, Decoder<S>& dec,
                   Encoder<S>* baseline_enc, const std::string& out_dir) {
    GA_CHECK(!rr.runs.empty(), "render_report: empty results");
    std::filesystem::create_directories(out_dir);
    write_run_json(rr, out_dir + "/metrics.json");
    render_sample_grid(ds, indices, enc, dec, baseline_enc, rr.config.eval,
                       out_dir + "/grid.png");
}

template void render_sample_grid<float>(const Dataset&, const std::vector<int64_t>&,
                                        Encoder<float>&, Decoder<float>&,
                                        Encoder<float>*, const EvalConfig&,
                                        const std::string&);
template void render_report<float>(const RunResult&, const Dataset&,
                                   const std::vector<int64_t>&, Encoder<float>&,
                                   Decoder<float>&, Encoder<float>*,
                                   const std::string&);

}  // namespace graphae
