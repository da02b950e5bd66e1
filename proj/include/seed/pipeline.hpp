#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seed/influence.hpp"
#include "seed/synth.hpp"
#include "seed/wis.hpp"

namespace seed {

/// Full run configuration. Budget is either an absolute count or a fraction
/// of the pool, exactly one of the two.
struct SeedConfig {
    int k = 20;
    double alpha = 0.7;
    double tau = 0.5;
    std::optional<std::int64_t> budget;
    std::optional<double> budget_fraction;
    std::string target_name;
    bool enable_subspace = true;      // node-weight calibration on the bilateral subspace
    bool enable_local_scaling = true; // density-adaptive edge thresholds
    bool enable_wis = true;           // off: plain top-K by weight
    bool allow_negative = false;
    bool mask_edges = false;          // apply the channel mask to edge embeddings too
    std::uint64_t seed = 0;
    std::size_t batch_size = 4096;

    void validate() const;
    std::int64_t resolve_budget(std::size_t pool_size) const;
};

struct WeightHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::int64_t> counts;  // fixed bin count, sums to N
};

WeightHistogram weight_histogram(std::span<const double> weights, std::size_t bins = 32);

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t max_degree = 0;
    double mean_degree = 0.0;
    std::int32_t zero_norm_rows = 0;
    int k_effective = 0;
    std::optional<DomainDegreeStats> per_domain;  // when domain labels are supplied
};

struct MaskInfo {
    std::size_t retained = 0;
    std::size_t channels = 0;
    bool fallback = false;
    bool enabled = true;
};

struct RunReport {
    SelectionResult selection;
    NodeWeights weights;
    MaskInfo mask;
    GraphStats graph_stats;
    WeightHistogram hist_full;    // node weights over the full channel space
    WeightHistogram hist_masked;  // node weights under the mutual mask
    SeedConfig config;
    std::map<std::string, double> timings_ms;
    std::vector<GraphEdge> edges;  // for the optional edge-list export
};

/// The full selection run: saliency -> mask -> calibrated weights ->
/// embeddings -> kNN -> adaptive thresholds -> conflict graph -> greedy
/// selection. Deterministic for a fixed config, independent of thread count.
RunReport run_select(const CheckpointBundle& bundle, const SeedConfig& config,
                     const std::vector<std::int32_t>* domain_labels = nullptr);

struct VoteTally {
    std::vector<std::int32_t> votes;                  // per train row
    std::map<std::string, std::vector<std::int32_t>> per_target_selected;
    std::vector<std::int32_t> ranking;  // votes desc, weight-sum desc, id asc
    std::vector<double> weight_sums;    // summed per-target node weights
    std::vector<std::int32_t> retained; // top retain_fraction * N of the ranking
};

/// One selection per named target with identical settings; each selection
/// casts one vote per chosen row.
VoteTally run_vote(const CheckpointBundle& bundle, const SeedConfig& config,
                   double retain_fraction);

/// Writes selected.txt (ids, selection order), report.json, and optionally
/// edges.txt into out_dir.
void emit_report(const RunReport& report, const std::filesystem::path& out_dir,
                 bool write_edges = false);

std::string report_json(const RunReport& report);

}  // namespace seed
