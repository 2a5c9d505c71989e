#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace graphae {

enum class ShapeKind { line = 0, triangle = 1, rectangle = 2 };

const char* shape_kind_name(ShapeKind k);
ShapeKind shape_kind_from_name(const std::string& s);
int shape_kind_nodes(ShapeKind k);

struct GenConfig {
    int canvas = 128;
    double stroke_width = 2.0;
    double margin_px = 6.0;          // transformed vertices keep this distance
                                     // from the canvas border
    double min_vertex_dist_px = 12.0;
    double scale_lo = 0.5, scale_hi = 1.0;  // fraction of canvas size
    double shear_lo = -0.3, shear_hi = 0.3;
    int max_attempts = 100;
};

// a shape after the random affine was applied: canonical vertices, the 2x3
// affine (row-major [a b tx; c d ty], pixel units) and the transformed result
struct ShapeSpec {
    ShapeKind kind = ShapeKind::line;
    std::vector<std::array<double, 2>> canonical;  // normalized [0,1]^2
    std::array<double, 6> affine{};
    std::vector<std::array<double, 2>> vertices;   // pixel coordinates
};

struct GraphSample {
    std::vector<float> image;  // canvas*canvas grayscale in [0,1]
    std::vector<std::array<float, 2>> node_coords;        // pixel coordinates
    std::vector<std::vector<uint8_t>> adjacency;          // NxN, symmetric
    ShapeKind kind = ShapeKind::line;
};

ShapeSpec sample_shape(Rng& rng, const GenConfig& cfg);
GraphSample rasterize(const ShapeSpec& spec, int canvas, double stroke_width);

// edge list of a shape kind over its canonical vertex order
std::vector<std::pair<int, int>> shape_edges(ShapeKind k);

struct DatasetRecord {
    std::string image_path;  // relative to the dataset directory
    std::vector<std::array<float, 2>> node_coords;
    std::vector<std::vector<uint8_t>> adjacency;
    ShapeKind kind = ShapeKind::line;
    uint64_t seed = 0;
    int split = 0;  // 0 train, 1 val, 2 test
};

struct DatasetManifest {
    int canvas = 128;
    double stroke_width = 2.0;
    std::vector<DatasetRecord> records;
};

const char* split_name(int split);
int split_of_index(uint64_t index);  // 90/5/5 by hash of the sample index

// writes images/ + manifest.jsonl under out_dir; cleans up on failure
DatasetManifest generate_dataset(int n_samples, uint64_t seed,
                                 const std::string& out_dir, const GenConfig& cfg);
DatasetManifest load_manifest(const std::string& dir);

// dataset held in memory; images stay 8-bit until a batch is assembled
class Dataset {
  public:
    // read PNGs listed in the manifest (split: 0/1/2, or -1 for everything)
    static Dataset load(const std::string& dir, int split);
    // generate without touching disk (same pipeline, quantized identically)
    static Dataset synth(int n_samples, uint64_t seed, const GenConfig& cfg,
                         int split = -1);

    int64_t size() const { return int64_t(records_.size()); }
    int canvas() const { return canvas_; }
    const DatasetRecord& record(int64_t i) const { return records_[size_t(i)]; }
    const std::vector<uint8_t>& image_u8(int64_t i) const { return images_[size_t(i)]; }

  private:
    int canvas_ = 128;
    std::vector<DatasetRecord> records_;
    std::vector<std::vector<uint8_t>> images_;
};

// one training batch, padded to n_max nodes
template <typename S>
struct Batch {
    Tensor<S> images;     // [B,1,H,W]
    Tensor<S> coords_px;  // [B,n_max,2], zero-padded
    Tensor<S> adjacency;  // [B,n_max,n_max], zero-padded
    Tensor<S> mask;       // [B,n_max], 1 for real nodes
    std::vector<int> n_nodes;
};

template <typename S>
Batch<S> make_batch(const Dataset& ds, const std::vector<int64_t>& indices, int n_max);

}  // namespace graphae
