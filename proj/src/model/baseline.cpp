#include "model/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "core/check.hpp"
#include "core/ops.hpp"

namespace graphae {

std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
    GA_CHECK(int(cost.size()) == n * n, "solve_assignment: cost size");
    const double kInf = 1e18;
    // potentials method over a 1-indexed virtual row/column 0
    std::vector<double> u(size_t(n) + 1, 0), v(size_t(n) + 1, 0);
    std::vector<int> p(size_t(n) + 1, 0), way(size_t(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(size_t(n) + 1, kInf);
        std::vector<char> used(size_t(n) + 1, 0);
        do {
            used[size_t(j0)] = 1;
            const int i0 = p[size_t(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[size_t(j)]) continue;
                const double cur =
                    cost[size_t(i0 - 1) * n + (j - 1)] - u[size_t(i0)] - v[size_t(j)];
                if (cur < minv[size_t(j)]) {
                    minv[size_t(j)] = cur;
                    way[size_t(j)] = j0;
                }
                if (minv[size_t(j)] < delta) {
                    delta = minv[size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[size_t(j)]) {
                    u[size_t(p[size_t(j)])] += delta;
                    v[size_t(j)] -= delta;
                } else {
                    minv[size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[size_t(j0)] != 0);
        do {
            const int j1 = way[size_t(j0)];
            p[size_t(j0)] = p[size_t(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col_of_row(size_t(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[size_t(j)] > 0) col_of_row[size_t(p[size_t(j)] - 1)] = j - 1;
    return col_of_row;
}

std::vector<float> gt_heatmap(const std::vector<std::array<float, 2>>& coords_px,
                              int canvas, int map_size, double sigma_cells) {
    std::vector<float> map(size_t(map_size) * map_size, 0.0f);
    const double r = double(canvas) / map_size;
    for (const auto& c : coords_px) {
        // pixel -> cell through the shared pixel-center convention
        const double cx = (c[0] + 0.5) / r - 0.5;
        const double cy = (c[1] + 0.5) / r - 0.5;
        for (int i = 0; i < map_size; ++i)
            for (int j = 0; j < map_size; ++j) {
                const double d2 = (j - cx) * (j - cx) + (i - cy) * (i - cy);
                map[size_t(i) * map_size + j] +=
                    float(std::exp(-d2 / (2.0 * sigma_cells * sigma_cells)));
            }
    }
    return map;
}

template <typename S>
Tensor<S> node_loss(const Tensor<S>& attention, const Tensor<S>& gt_maps) {
    auto peak = ops::chan_max(attention);
    auto summed = ops::sum_channels(ops::div_by_chan(attention, peak));
    auto diff = ops::sub(summed, gt_maps);
    return ops::mean_all(ops::mul(diff, diff));
}

AlignedAdjacency align_adjacency(const std::vector<std::array<double, 2>>& pred_coords,
                                 const std::vector<std::array<double, 2>>& gt_coords,
                                 const std::vector<std::vector<uint8_t>>& gt_adjacency,
                                 int n_max) {
    const int n = int(gt_coords.size());
    GA_CHECK(n <= n_max && int(pred_coords.size()) == n_max,
             "align_adjacency: size mismatch");
    // slots are rows, gt nodes are columns; surplus columns are zero-cost
    // dummies that absorb the unassigned slots
    std::vector<double> cost(size_t(n_max) * n_max, 0.0);
    for (int s = 0; s < n_max; ++s)
        for (int g = 0; g < n; ++g)
            cost[size_t(s) * n_max + g] = std::hypot(pred_coords[size_t(s)][0] - gt_coords[size_t(g)][0],
                                                     pred_coords[size_t(s)][1] - gt_coords[size_t(g)][1]);
    const auto col_of_row = solve_assignment(cost, n_max);

    AlignedAdjacency out;
    out.adjacency.assign(size_t(n_max) * n_max, 0.0f);
    out.pair_mask.assign(size_t(n_max) * n_max, 0.0f);
    out.slot_of_gt.assign(size_t(n), -1);
    for (int s = 0; s < n_max; ++s)
        if (col_of_row[size_t(s)] < n) out.slot_of_gt[size_t(col_of_row[size_t(s)])] = s;
    for (int g1 = 0; g1 < n; ++g1)
        for (int g2 = 0; g2 < n; ++g2)
            if (gt_adjacency[size_t(g1)][size_t(g2)]) {
                const int s1 = out.slot_of_gt[size_t(g1)], s2 = out.slot_of_gt[size_t(g2)];
                out.adjacency[size_t(s1) * n_max + s2] = 1.0f;
                out.adjacency[size_t(s2) * n_max + s1] = 1.0f;
            }
    std::vector<char> assigned(size_t(n_max), 0);
    for (int g = 0; g < n; ++g) assigned[size_t(out.slot_of_gt[size_t(g)])] = 1;
    for (int i = 0; i < n_max; ++i)
        for (int j = i + 1; j < n_max; ++j)
            if (assigned[size_t(i)] && assigned[size_t(j)])
                out.pair_mask[size_t(i) * n_max + j] = 1.0f;
    return out;
}

template <typename S>
Tensor<S> edge_loss(const Tensor<S>& probs, const std::vector<S>& aligned_targets,
                    const std::vector<S>& pair_masks) {
    GA_CHECK(int64_t(aligned_targets.size()) == probs.numel() &&
                 int64_t(pair_masks.size()) == probs.numel(),
             "edge_loss: size mismatch");
    double count = 0;
    for (const S m : pair_masks) count += double(m);
    if (count == 0) return Tensor<S>::zeros({1}, false);

    std::vector<S> w_pos(pair_masks.size()), w_neg(pair_masks.size());
    for (size_t k = 0; k < pair_masks.size(); ++k) {
        w_pos[k] = S(double(pair_masks[k]) * double(aligned_targets[k]) / count);
        w_neg[k] = S(double(pair_masks[k]) * (1.0 - double(aligned_targets[k])) / count);
    }
    const S eps = S(1e-7);
    auto pos = ops::dot_const(ops::log(ops::clamp_min(probs, eps)), w_pos);
    auto one_minus = ops::add_scalar(ops::mul_scalar(probs, S(-1)), S(1));
    auto neg = ops::dot_const(ops::log(ops::clamp_min(one_minus, eps)), w_neg);
    return ops::mul_scalar(ops::add(pos, neg), S(-1));
}

template Tensor<float> node_loss<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> node_loss<double>(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> edge_loss<float>(const Tensor<float>&, const std::vector<float>&,
                                        const std::vector<float>&);
template Tensor<double> edge_loss<double>(const Tensor<double>&,
                                          const std::vector<double>&,
                                          const std::vector<double>&);

}  // namespace graphae
