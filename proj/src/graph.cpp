#include "seed/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "seed/errors.hpp"
#include "seed/rng.hpp"

namespace seed {

std::vector<double> local_density(const KnnIndex& knn) {
    std::vector<double> sigma(knn.node_count, 0.0);
    for (std::size_t i = 0; i < knn.node_count; ++i) {
        const auto& sims = knn.sims[i];
        if (!sims.empty()) sigma[i] = sims.back();
    }
    return sigma;
}

std::vector<double> adaptive_thresholds(std::span<const double> sigma, double tau, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("adaptive_thresholds: alpha must lie in (0, 1), got " +
                              std::to_string(alpha));
    }
    std::vector<double> out(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        out[i] = std::max(tau, alpha * sigma[i]);
    }
    return out;
}

namespace {

ConflictGraph assemble(std::size_t n, std::vector<GraphEdge>&& accepted) {
    std::sort(accepted.begin(), accepted.end(), [](const GraphEdge& a, const GraphEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    accepted.erase(std::unique(accepted.begin(), accepted.end(),
                               [](const GraphEdge& a, const GraphEdge& b) {
                                   return a.u == b.u && a.v == b.v;
                               }),
                   accepted.end());

    ConflictGraph g;
    g.node_count = n;
    g.adjacency.resize(n);
    for (const auto& e : accepted) {
        g.adjacency[e.u].push_back(e.v);
        g.adjacency[e.v].push_back(e.u);
    }
    for (auto& nbrs : g.adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
        g.max_degree = std::max(g.max_degree, nbrs.size());
    }
    g.edge_count = accepted.size();
    g.edges = std::move(accepted);
    return g;
}

}  // namespace

ConflictGraph build_conflict_graph(const KnnIndex& knn, std::span<const double> thresholds,
                                   bool local_scaling_enabled, double tau) {
    if (local_scaling_enabled && thresholds.size() != knn.node_count) {
        throw ValidationError("build_conflict_graph: thresholds length " +
                              std::to_string(thresholds.size()) + " != node count " +
                              std::to_string(knn.node_count));
    }

    std::vector<GraphEdge> accepted;
    for (std::size_t i = 0; i < knn.node_count; ++i) {
        const auto& ids = knn.ids[i];
        const auto& sims = knn.sims[i];
        for (std::size_t r = 0; r < ids.size(); ++r) {
            const std::int32_t j = ids[r];
            const double sim = sims[r];
            const std::int32_t u = std::min<std::int32_t>(static_cast<std::int32_t>(i), j);
            const std::int32_t v = std::max<std::int32_t>(static_cast<std::int32_t>(i), j);
            if (u == v) continue;
            const double bar =
                local_scaling_enabled ? std::max(thresholds[u], thresholds[v]) : tau;
            if (sim > bar) {
                accepted.push_back(GraphEdge{u, v, sim});
            }
        }
    }
    return assemble(knn.node_count, std::move(accepted));
}

ConflictGraph make_conflict_graph(std::size_t node_count,
                                  std::span<const std::pair<std::int32_t, std::int32_t>> edges) {
    std::vector<GraphEdge> list;
    list.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        if (a == b) {
            throw ValidationError("make_conflict_graph: self-loop on node " + std::to_string(a));
        }
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= node_count ||
            static_cast<std::size_t>(b) >= node_count) {
            throw ValidationError("make_conflict_graph: edge endpoint out of range");
        }
        list.push_back(GraphEdge{std::min(a, b), std::max(a, b), 0.0});
    }
    return assemble(node_count, std::move(list));
}

ConflictGraph random_graph(std::size_t node_count, double edge_prob, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::size_t i = 0; i < node_count; ++i) {
        for (std::size_t j = i + 1; j < node_count; ++j) {
            if (rng.uniform() < edge_prob) {
                edges.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j));
            }
        }
    }
    return make_conflict_graph(node_count, edges);
}

void write_edge_list(const ConflictGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    char buf[80];
    for (const auto& e : graph.edges) {
        std::snprintf(buf, sizeof(buf), "%d %d %.9g\n", e.u, e.v, e.sim);
        out << buf;
    }
    if (!out) {
        throw IoError("write failure: " + path.string());
    }
}

}  // namespace seed
