#pragma once

// Serial reference implementations, deliberately written the obvious way and
// kept independent of the production kernels. Tests use them as oracles; the
// benchmark uses them as the single-thread baseline. Not linked into the CLI.

#include "seed/influence.hpp"
#include "seed/knn.hpp"

namespace seed::ref {

/// O(N^2) exact neighbour search: full similarity row, stable sort, take k.
KnnIndex knn_brute_force(const Matrix64& normalized, int k);

/// Naive influence accumulation, one scalar accumulator, no parallelism.
Matrix64 trajectory_influence(const CheckpointBundle& bundle, const std::string& target_name,
                              const ChannelMask& mask);

/// Naive embedding construction matching build_node_embeddings.
Matrix64 build_node_embeddings(const CheckpointBundle& bundle);

}  // namespace seed::ref
