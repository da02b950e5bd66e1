#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seed/matrix.hpp"
#include "seed/matrixio.hpp"

namespace seed {

/// Channel subset used for influence scoring. When the bilateral selection
/// comes up empty the mask falls back to the full space and says so.
struct ChannelMask {
    std::vector<std::uint8_t> bits;  // length C
    std::size_t retained = 0;
    bool fallback = false;

    static ChannelMask full(std::size_t channels) {
        ChannelMask m;
        m.bits.assign(channels, 1);
        m.retained = channels;
        return m;
    }
};

/// Per-channel mean absolute magnitude across rows.
std::vector<double> channel_saliency(const DenseMatrix& g);

/// Saliency pooled over every checkpoint of the bundle (mean |value| across
/// all rows of all checkpoints). which = -1 selects the training matrices,
/// otherwise the target with that index.
std::vector<double> bundle_saliency(const CheckpointBundle& bundle, int which);

/// Channels whose saliency strictly exceeds the mean saliency on both sides.
/// Empty intersection falls back to the full space with the fallback flag set.
ChannelMask mutual_subspace(const std::vector<double>& sal_train,
                            const std::vector<double>& sal_target);

/// lr * masked inner product of two gradient rows, accumulated in float64.
double per_step_influence(std::span<const float> g_train_row,
                          std::span<const float> g_target_row, double lr,
                          const ChannelMask& mask);

/// N x M influence: learning-rate-weighted masked inner products summed over
/// checkpoints. Reduction order is fixed (channels left to right, then
/// checkpoints in order) so results do not depend on the parallel schedule.
Matrix64 trajectory_influence(const CheckpointBundle& bundle, const std::string& target_name,
                              const ChannelMask& mask);

struct NodeWeights {
    std::vector<double> weights;         // max over targets per train row
    std::vector<std::int32_t> argmax_target;  // smallest index achieving the max
};

NodeWeights node_weights(const Matrix64& influence);

/// Row i is the concatenation over checkpoints of sqrt(lr_t) * g_t(i), so the
/// plain inner product of two rows equals the summed learning-rate-weighted
/// gradient inner products. Rows are NOT normalized here. Held in float64:
/// float32 storage of the scaled values would cost ~1e-7 relative error on
/// the inner-product identity.
Matrix64 build_node_embeddings(const CheckpointBundle& bundle,
                               const ChannelMask* mask = nullptr);

}  // namespace seed
