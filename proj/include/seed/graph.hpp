#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "seed/knn.hpp"

namespace seed {

/// Local density per node: similarity to its k_eff-th nearest neighbour.
/// Nodes without neighbours (zero-norm rows) get 0.
std::vector<double> local_density(const KnnIndex& knn);

/// Per-node edge threshold max(tau, alpha * sigma_i); alpha must lie strictly
/// inside (0, 1). Raises the bar in dense neighbourhoods, recovers the global
/// threshold where density is low or negative.
std::vector<double> adaptive_thresholds(std::span<const double> sigma, double tau, double alpha);

struct GraphEdge {
    std::int32_t u = 0;  // u < v
    std::int32_t v = 0;
    double sim = 0.0;
};

struct ConflictGraph {
    std::size_t node_count = 0;
    std::vector<std::vector<std::int32_t>> adjacency;  // sorted neighbour ids
    std::vector<GraphEdge> edges;                      // sorted by (u, v)
    std::size_t edge_count = 0;
    std::size_t max_degree = 0;
};

/// Candidate pairs are the union of every node's neighbour list. A pair
/// becomes an undirected edge iff its similarity strictly exceeds
/// max(thresholds[u], thresholds[v]); with local scaling disabled the bar is
/// the global tau instead. Assembly is a single deterministic pass.
ConflictGraph build_conflict_graph(const KnnIndex& knn, std::span<const double> thresholds,
                                   bool local_scaling_enabled, double tau);

/// Direct construction from an explicit edge list (tests, random instances).
ConflictGraph make_conflict_graph(std::size_t node_count,
                                  std::span<const std::pair<std::int32_t, std::int32_t>> edges);

/// Erdos-Renyi instance for oracle checks; deterministic per seed.
ConflictGraph random_graph(std::size_t node_count, double edge_prob, std::uint64_t seed);

/// Debug export, one "u v sim" line per edge, u < v.
void write_edge_list(const ConflictGraph& graph, const std::filesystem::path& path);

}  // namespace seed
