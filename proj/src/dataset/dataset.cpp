#include "dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/check.hpp"
#include "core/image.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace graphae {

const char* shape_kind_name(ShapeKind k) {
    switch (k) {
        case ShapeKind::line: return "line";
        case ShapeKind::triangle: return "triangle";
        case ShapeKind::rectangle: return "rectangle";
    }
    return "?";
}

ShapeKind shape_kind_from_name(const std::string& s) {
    if (s == "line") return ShapeKind::line;
    if (s == "triangle") return ShapeKind::triangle;
    if (s == "rectangle") return ShapeKind::rectangle;
    GA_CHECK(false, "unknown shape kind: " + s);
    return ShapeKind::line;
}

int shape_kind_nodes(ShapeKind k) { return k == ShapeKind::line ? 2 : k == ShapeKind::triangle ? 3 : 4; }

std::vector<std::pair<int, int>> shape_edges(ShapeKind k) {
    switch (k) {
        case ShapeKind::line: return {{0, 1}};
        case ShapeKind::triangle: return {{0, 1}, {1, 2}, {2, 0}};
        case ShapeKind::rectangle: return {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    }
    return {};
}

namespace {

std::vector<std::array<double, 2>> canonical_vertices(ShapeKind k) {
    switch (k) {
        case ShapeKind::line:
            return {{0.25, 0.5}, {0.75, 0.5}};
        case ShapeKind::triangle:
            return {{0.5, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
        case ShapeKind::rectangle:
            return {{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}};
    }
    return {};
}

uint8_t quantize_u8(float v) {
    return uint8_t(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

ShapeSpec sample_shape(Rng& rng, const GenConfig& cfg) {
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        ShapeSpec spec;
        spec.kind = ShapeKind(rng.uniform_int(3));
        spec.canonical = canonical_vertices(spec.kind);

        const double s = rng.uniform(cfg.scale_lo, cfg.scale_hi) * cfg.canvas;
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        const double shear = rng.uniform(cfg.shear_lo, cfg.shear_hi);
        const double ct = std::cos(theta), st = std::sin(theta);
        // linear part: rotation * shear * isotropic scale
        const double a = s * ct, b = s * (ct * shear - st);
        const double c = s * st, d = s * (st * shear + ct);

        // transform centered canonicals, then pick a translation that keeps
        // the whole shape inside the margin (no rejection needed for it)
        std::vector<std::array<double, 2>> q(spec.canonical.size());
        double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
        for (size_t i = 0; i < q.size(); ++i) {
            const double cx = spec.canonical[i][0] - 0.5;
            const double cy = spec.canonical[i][1] - 0.5;
            q[i] = {a * cx + b * cy, c * cx + d * cy};
            xmin = std::min(xmin, q[i][0]);
            xmax = std::max(xmax, q[i][0]);
            ymin = std::min(ymin, q[i][1]);
            ymax = std::max(ymax, q[i][1]);
        }
        const double lo_x = cfg.margin_px - xmin, hi_x = (cfg.canvas - 1 - cfg.margin_px) - xmax;
        const double lo_y = cfg.margin_px - ymin, hi_y = (cfg.canvas - 1 - cfg.margin_px) - ymax;
        if (lo_x > hi_x || lo_y > hi_y) continue;
        const double tx = rng.uniform(lo_x, hi_x);
        const double ty = rng.uniform(lo_y, hi_y);

        spec.affine = {a, b, tx, c, d, ty};
        spec.vertices.resize(q.size());
        for (size_t i = 0; i < q.size(); ++i)
            spec.vertices[i] = {q[i][0] + tx, q[i][1] + ty};

        bool ok = true;
        for (size_t i = 0; i < spec.vertices.size() && ok; ++i)
            for (size_t j = i + 1; j < spec.vertices.size(); ++j) {
                const double dx = spec.vertices[i][0] - spec.vertices[j][0];
                const double dy = spec.vertices[i][1] - spec.vertices[j][1];
                if (std::hypot(dx, dy) < cfg.min_vertex_dist_px) {
                    ok = false;
                    break;
                }
            }
        if (ok) return spec;
    }
    GA_CHECK(false, "sample_shape: no valid shape after max_attempts");
    return {};
}

GraphSample rasterize(const ShapeSpec& spec, int canvas, double stroke_width) {
    const auto edges = shape_edges(spec.kind);
    GA_CHECK(!spec.vertices.empty(), "rasterize: empty spec");
    for (size_t i = 0; i < spec.vertices.size(); ++i)
        for (size_t j = i + 1; j < spec.vertices.size(); ++j) {
            const double dx = spec.vertices[i][0] - spec.vertices[j][0];
            const double dy = spec.vertices[i][1] - spec.vertices[j][1];
            GA_CHECK(std::hypot(dx, dy) >= stroke_width,
                     "rasterize: vertices closer than the stroke width");
        }

    GraphSample out;
    out.kind = spec.kind;
    out.image.assign(size_t(canvas) * canvas, 0.0f);
    const int n = int(spec.vertices.size());
    out.node_coords.resize(size_t(n));
    for (int i = 0; i < n; ++i)
        out.node_coords[size_t(i)] = {float(spec.vertices[size_t(i)][0]),
                                      float(spec.vertices[size_t(i)][1])};
    out.adjacency.assign(size_t(n), std::vector<uint8_t>(size_t(n), 0));

    // anti-aliased strokes: coverage ramps linearly over one pixel around the
    // stroke boundary; overlapping strokes composite with max
    const double reach = stroke_width * 0.5 + 0.5;
    for (auto [i, j] : edges) {
        out.adjacency[size_t(i)][size_t(j)] = 1;
        out.adjacency[size_t(j)][size_t(i)] = 1;
        const double ax = spec.vertices[size_t(i)][0], ay = spec.vertices[size_t(i)][1];
        const double bx = spec.vertices[size_t(j)][0], by = spec.vertices[size_t(j)][1];
        const double dx = bx - ax, dy = by - ay;
        const double len2 = dx * dx + dy * dy;
        const int x0 = std::max(0, int(std::floor(std::min(ax, bx) - reach)));
        const int x1 = std::min(canvas - 1, int(std::ceil(std::max(ax, bx) + reach)));
        const int y0 = std::max(0, int(std::floor(std::min(ay, by) - reach)));
        const int y1 = std::min(canvas - 1, int(std::ceil(std::max(ay, by) + reach)));
        for (int py = y0; py <= y1; ++py)
            for (int px = x0; px <= x1; ++px) {
                const double t =
                    std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
                const double ddx = px - (ax + t * dx), ddy = py - (ay + t * dy);
                const double dist = std::hypot(ddx, ddy);
                const float cov = float(std::clamp(reach - dist, 0.0, 1.0));
                float& pix = out.image[size_t(py) * canvas + px];
                pix = std::max(pix, cov);
            }
    }
    return out;
}

const char* split_name(int split) {
    return split == 0 ? "train" : split == 1 ? "val" : "test";
}

int split_of_index(uint64_t index) {
    const uint64_t h = splitmix64(index) % 100;
    return h < 90 ? 0 : h < 95 ? 1 : 2;
}

namespace {

uint64_t sample_seed(uint64_t dataset_seed, uint64_t index) {
    return splitmix64(dataset_seed * 0x9e3779b97f4a7c15ULL + index + 1);
}

DatasetRecord make_record(uint64_t seed, uint64_t index, const GraphSample& s,
                          std::string image_path) {
    DatasetRecord r;
    r.image_path = std::move(image_path);
    r.node_coords = s.node_coords;
    r.adjacency = s.adjacency;
    r.kind = s.kind;
    r.seed = seed;
    r.split = split_of_index(index);
    return r;
}

json record_to_json(const DatasetRecord& r) {
    json jc = json::array();
    for (const auto& c : r.node_coords) jc.push_back({double(c[0]), double(c[1])});
    json ja = json::array();
    for (const auto& row : r.adjacency) {
        json jr = json::array();
        for (uint8_t v : row) jr.push_back(int(v));
        ja.push_back(std::move(jr));
    }
    return json{{"image_path", r.image_path}, {"node_coords", std::move(jc)},
                {"adjacency", std::move(ja)}, {"shape_kind", shape_kind_name(r.kind)},
                {"seed", r.seed},             {"split", split_name(r.split)}};
}

DatasetRecord record_from_json(const json& j) {
    DatasetRecord r;
    r.image_path = j.at("image_path").get<std::string>();
    for (const auto& c : j.at("node_coords"))
        r.node_coords.push_back({c.at(0).get<float>(), c.at(1).get<float>()});
    for (const auto& row : j.at("adjacency")) {
        std::vector<uint8_t> rr;
        for (const auto& v : row) rr.push_back(uint8_t(v.get<int>()));
        r.adjacency.push_back(std::move(rr));
    }
    r.kind = shape_kind_from_name(j.at("shape_kind").get<std::string>());
    r.seed = j.at("seed").get<uint64_t>();
    const std::string sp = j.at("split").get<std::string>();
    r.split = sp == "train" ? 0 : sp == "val" ? 1 : 2;
    return r;
}

}  // namespace

DatasetManifest generate_dataset(int n_samples, uint64_t seed,
                                 const std::string& out_dir, const GenConfig& cfg) {
    DatasetManifest man;
    man.canvas = cfg.canvas;
    man.stroke_width = cfg.stroke_width;

    std::vector<fs::path> written;
    try {
        fs::create_directories(fs::path(out_dir) / "images");
        std::ofstream mf(fs::path(out_dir) / "manifest.jsonl");
        GA_CHECK(bool(mf), "generate_dataset: cannot write manifest in " + out_dir);
        written.push_back(fs::path(out_dir) / "manifest.jsonl");
        mf << json{{"canvas_size", cfg.canvas},
                   {"stroke_width", cfg.stroke_width},
                   {"n", n_samples}}
                  .dump()
           << "\n";

        for (int i = 0; i < n_samples; ++i) {
            const uint64_t si = sample_seed(seed, uint64_t(i));
            Rng rng(si);
            const auto sample = rasterize(sample_shape(rng, cfg), cfg.canvas,
                                          cfg.stroke_width);
            char name[64];
            std::snprintf(name, sizeof(name), "images/%06d.png", i);
            const fs::path img_path = fs::path(out_dir) / name;
            write_png_gray(img_path.string(), sample.image, cfg.canvas, cfg.canvas);
            written.push_back(img_path);
            auto rec = make_record(si, uint64_t(i), sample, name);
            mf << record_to_json(rec).dump() << "\n";
            man.records.push_back(std::move(rec));
        }
        GA_CHECK(bool(mf), "generate_dataset: manifest write failed");
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        throw;
    }
    return man;
}

DatasetManifest load_manifest(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.jsonl");
    GA_CHECK(bool(mf), "load_manifest: cannot open manifest in " + dir);
    std::string line;
    GA_CHECK(bool(std::getline(mf, line)), "load_manifest: empty manifest");
    const json header = json::parse(line);
    DatasetManifest man;
    man.canvas = header.at("canvas_size").get<int>();
    man.stroke_width = header.at("stroke_width").get<double>();
    while (std::getline(mf, line)) {
        if (line.empty()) continue;
        man.records.push_back(record_from_json(json::parse(line)));
    }
    return man;
}

Dataset Dataset::load(const std::string& dir, int split) {
    const auto man = load_manifest(dir);
    Dataset ds;
    ds.canvas_ = man.canvas;
    for (const auto& r : man.records) {
        if (split >= 0 && r.split != split) continue;
        int w = 0, h = 0;
        const auto img = read_png_gray((fs::path(dir) / r.image_path).string(), w, h);
        GA_CHECK(w == man.canvas && h == man.canvas, "Dataset::load: image size");
        std::vector<uint8_t> u8(img.size());
        for (size_t i = 0; i < img.size(); ++i) u8[i] = quantize_u8(img[i]);
        ds.records_.push_back(r);
        ds.images_.push_back(std::move(u8));
    }
    return ds;
}

Dataset Dataset::synth(int n_samples, uint64_t seed, const GenConfig& cfg, int split) {
    Dataset ds;
    ds.canvas_ = cfg.canvas;
    for (int i = 0; i < n_samples; ++i) {
        const int sp = split_of_index(uint64_t(i));
        if (split >= 0 && sp != split) continue;
        const uint64_t si = sample_seed(seed, uint64_t(i));
        Rng rng(si);
        const auto sample = rasterize(sample_shape(rng, cfg), cfg.canvas,
                                      cfg.stroke_width);
        std::vector<uint8_t> u8(sample.image.size());
        for (size_t k = 0; k < u8.size(); ++k) u8[k] = quantize_u8(sample.image[k]);
        ds.records_.push_back(make_record(si, uint64_t(i), sample, ""));
        ds.images_.push_back(std::move(u8));
    }
    return ds;
}

template <typename S>
Batch<S> make_batch(const Dataset& ds, const std::vector<int64_t>& indices, int n_max) {
    const int B = int(indices.size());
    const int H = ds.canvas(), W = ds.canvas();
    Batch<S> b;
    b.images = Tensor<S>::zeros({B, 1, H, W}, false);
    b.coords_px = Tensor<S>::zeros({B, n_max, 2}, false);
    b.adjacency = Tensor<S>::zeros({B, n_max, n_max}, false);
    b.mask = Tensor<S>::zeros({B, n_max}, false);
    b.n_nodes.resize(size_t(B));
    for (int k = 0; k < B; ++k) {
        const auto& rec = ds.record(indices[size_t(k)]);
        const auto& img = ds.image_u8(indices[size_t(k)]);
        const int n = int(rec.node_coords.size());
        GA_CHECK(n <= n_max, "make_batch: sample has more nodes than n_max");
        b.n_nodes[size_t(k)] = n;
        S* pi = b.images.data() + int64_t(k) * H * W;
        for (size_t i = 0; i < img.size(); ++i) pi[i] = S(img[i]) / S(255);
        for (int i = 0; i < n; ++i) {
            b.coords_px.data()[(int64_t(k) * n_max + i) * 2] = S(rec.node_coords[size_t(i)][0]);
            b.coords_px.data()[(int64_t(k) * n_max + i) * 2 + 1] = S(rec.node_coords[size_t(i)][1]);
            b.mask.data()[int64_t(k) * n_max + i] = S(1);
            for (int j = 0; j < n; ++j)
                b.adjacency.data()[(int64_t(k) * n_max + i) * n_max + j] =
                    S(rec.adjacency[size_t(i)][size_t(j)]);
        }
    }
    return b;
}

template Batch<float> make_batch<float>(const Dataset&, const std::vector<int64_t>&, int);
template Batch<double> make_batch<double>(const Dataset&, const std::vector<int64_t>&, int);

}  // namespace graphae
