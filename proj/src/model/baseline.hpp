#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace graphae {

// minimum-cost one-to-one assignment on an n x n cost matrix (row-major);
// returns col_of_row. O(n^3) potentials method.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n);

// sum of unit-peak Gaussians (sigma in cells) at the node locations, on the
// attention grid; pixel coords map to cells through the shared pixel-center
// convention
std::vector<float> gt_heatmap(const std::vector<std::array<float, 2>>& coords_px,
                              int canvas, int map_size, double sigma_cells);

// MSE between the channel-sum of max-normalized attention and the gt maps
template <typename S>
Tensor<S> node_loss(const Tensor<S>& attention, const Tensor<S>& gt_maps);

struct AlignedAdjacency {
    // gt adjacency permuted into predicted-slot order; only pairs where both
    // slots carry a real gt node participate in the loss
    std::vector<float> adjacency;  // n_max x n_max
    std::vector<float> pair_mask;  // n_max x n_max, 1 on valid unordered pairs (i<j)
    std::vector<int> slot_of_gt;   // gt node -> predicted slot
};

// optimal assignment of gt nodes to predicted coordinate slots by total
// Euclidean distance (normalized coordinates)
AlignedAdjacency align_adjacency(const std::vector<std::array<double, 2>>& pred_coords,
                                 const std::vector<std::array<double, 2>>& gt_coords,
                                 const std::vector<std::vector<uint8_t>>& gt_adjacency,
                                 int n_max);

// masked binary cross-entropy over valid unordered pairs, averaged over the
// total valid-pair count of the batch; targets/mask are [B, n_max, n_max]
template <typename S>
Tensor<S> edge_loss(const Tensor<S>& probs, const std::vector<S>& aligned_targets,
                    const std::vector<S>& pair_masks);

}  // namespace graphae
