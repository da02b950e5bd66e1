#include "seed/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "seed/errors.hpp"
#include "seed/graph.hpp"
#include "seed/knn.hpp"

namespace seed {

void SeedConfig::validate() const {
    if (k < 1) throw ValidationError("config: k must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("config: alpha must lie in (0, 1)");
    }
    if (budget.has_value() == budget_fraction.has_value()) {
        throw ValidationError("config: exactly one of budget / budget-fraction must be set");
    }
    if (budget && *budget < 1) throw ValidationError("config: budget must be >= 1");
    if (budget_fraction && !(*budget_fraction > 0.0 && *budget_fraction <= 1.0)) {
        throw ValidationError("config: budget fraction must lie in (0, 1]");
    }
    if (batch_size < 1) throw ValidationError("config: batch size must be >= 1");
}

std::int64_t SeedConfig::resolve_budget(std::size_t pool_size) const {
    if (budget) return *budget;
    const auto n = static_cast<double>(pool_size);
    std::int64_t k_budget = std::llround(*budget_fraction * n);
    k_budget = std::max<std::int64_t>(1, k_budget);
    k_budget = std::min<std::int64_t>(k_budget, static_cast<std::int64_t>(pool_size));
    return k_budget;
}

WeightHistogram weight_histogram(std::span<const double> weights, std::size_t bins) {
    WeightHistogram h;
    h.counts.assign(bins, 0);
    if (weights.empty()) return h;
    h.lo = *std::min_element(weights.begin(), weights.end());
    h.hi = *std::max_element(weights.begin(), weights.end());
    if (h.hi == h.lo) {
        h.counts[0] = static_cast<std::int64_t>(weights.size());
        return h;
    }
    const double width = (h.hi - h.lo) / static_cast<double>(bins);
    for (const double w : weights) {
        auto idx = static_cast<std::size_t>((w - h.lo) / width);
        if (idx >= bins) idx = bins - 1;  // hi lands in the last bin
        ++h.counts[idx];
    }
    return h;
}

namespace {

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

    void lap(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        sink_[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
    }

private:
    std::map<std::string, double>& sink_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

RunReport run_select(const CheckpointBundle& bundle, const SeedConfig& config,
                     const std::vector<std::int32_t>* domain_labels) {
    config.validate();
    const int target = bundle.target_index(config.target_name);
    if (target < 0) {
        throw ValidationError("run_select: unknown target '" + config.target_name + "'");
    }

    RunReport report;
    report.config = config;
    StageTimer timer(report.timings_ms);

    // Saliency on both sides, pooled over checkpoints.
    const auto sal_train = bundle_saliency(bundle, -1);
    const auto sal_target = bundle_saliency(bundle, target);
    timer.lap("saliency");

    const ChannelMask full_mask = ChannelMask::full(bundle.channel_count);
    ChannelMask mutual = mutual_subspace(sal_train, sal_target);
    const ChannelMask& active_mask = config.enable_subspace ? mutual : full_mask;
    report.mask.retained = active_mask.retained;
    report.mask.channels = bundle.channel_count;
    report.mask.fallback = active_mask.fallback;
    report.mask.enabled = config.enable_subspace;
    timer.lap("mask");

    // Node weights under the full space and under the mutual mask; both are
    // reported, the configured one drives selection.
    const Matrix64 inf_full = trajectory_influence(bundle, config.target_name, full_mask);
    const NodeWeights weights_full = node_weights(inf_full);
    NodeWeights weights_mutual;
    if (mutual.retained == bundle.channel_count) {
        weights_mutual = weights_full;  // fallback mask is the full space
    } else {
        weights_mutual = node_weights(trajectory_influence(bundle, config.target_name, mutual));
    }
    report.weights = config.enable_subspace ? weights_mutual : weights_full;
    report.hist_full = weight_histogram(weights_full.weights);
    report.hist_masked = weight_histogram(weights_mutual.weights);
    timer.lap("influence");

    // Edge side: trajectory embeddings over the full space by default.
    const ChannelMask* edge_mask = config.mask_edges ? &active_mask : nullptr;
    const Matrix64 embeddings = build_node_embeddings(bundle, edge_mask);
    const NormalizedRows normalized = normalize_rows(embeddings);
    timer.lap("embeddings");

    const KnnIndex knn = knn_search(normalized.matrix, config.k, config.batch_size);
    timer.lap("knn");

    const std::vector<double> sigma = local_density(knn);
    std::vector<double> thresholds;
    if (config.enable_local_scaling) {
        thresholds = adaptive_thresholds(sigma, config.tau, config.alpha);
    }
    const ConflictGraph graph =
        build_conflict_graph(knn, thresholds, config.enable_local_scaling, config.tau);
    timer.lap("graph");

    report.graph_stats.nodes = graph.node_count;
    report.graph_stats.edges = graph.edge_count;
    report.graph_stats.max_degree = graph.max_degree;
    report.graph_stats.mean_degree =
        graph.node_count == 0
            ? 0.0
            : 2.0 * static_cast<double>(graph.edge_count) / static_cast<double>(graph.node_count);
    report.graph_stats.zero_norm_rows = static_cast<std::int32_t>(normalized.zero_rows.size());
    report.graph_stats.k_effective = knn.k_effective;
    if (domain_labels != nullptr) {
        report.graph_stats.per_domain = degree_balance(graph, *domain_labels);
    }
    report.edges = graph.edges;

    const std::int64_t k_budget = config.resolve_budget(bundle.train_count);
    if (config.enable_wis) {
        report.selection = greedy_wis(graph, report.weights.weights,
                                      static_cast<std::int32_t>(k_budget), config.allow_negative);
    } else {
        // plain top-K by weight: selection on a conflict-free graph
        ConflictGraph edgeless;
        edgeless.node_count = graph.node_count;
        edgeless.adjacency.resize(graph.node_count);
        report.selection = greedy_wis(edgeless, report.weights.weights,
                                      static_cast<std::int32_t>(k_budget), config.allow_negative);
    }
    report.selection.flags.mask_fallback = active_mask.fallback;
    report.selection.flags.zero_norm_rows = static_cast<std::int32_t>(normalized.zero_rows.size());
    report.selection.flags.k_clamped = knn.k_clamped;
    timer.lap("selection");

    return report;
}

VoteTally run_vote(const CheckpointBundle& bundle, const SeedConfig& config,
                   double retain_fraction) {
    if (bundle.target_names.size() < 2) {
        throw ValidationError("run_vote: needs at least 2 named targets; use run_select");
    }
    if (!(retain_fraction > 0.0 && retain_fraction <= 1.0)) {
        throw ValidationError("run_vote: retain fraction must lie in (0, 1]");
    }

    const std::size_t n = bundle.train_count;
    VoteTally tally;
    tally.votes.assign(n, 0);
    tally.weight_sums.assign(n, 0.0);

    for (const auto& name : bundle.target_names) {
        SeedConfig per_target = config;
        per_target.target_name = name;
        const RunReport report = run_select(bundle, per_target);
        for (std::size_t i = 0; i < n; ++i) {
            tally.weight_sums[i] += report.weights.weights[i];
        }
        for (const std::int32_t id : report.selection.selected) {
            ++tally.votes[id];
        }
        tally.per_target_selected[name] = report.selection.selected;
    }

    tally.ranking.resize(n);
    std::iota(tally.ranking.begin(), tally.ranking.end(), 0);
    std::sort(tally.ranking.begin(), tally.ranking.end(),
              [&](std::int32_t a, std::int32_t b) {
                  if (tally.votes[a] != tally.votes[b]) return tally.votes[a] > tally.votes[b];
                  if (tally.weight_sums[a] != tally.weight_sums[b]) {
                      return tally.weight_sums[a] > tally.weight_sums[b];
                  }
                  return a < b;
              });

    auto keep = static_cast<std::size_t>(std::llround(retain_fraction * static_cast<double>(n)));
    keep = std::min(keep, n);
    tally.retained.assign(tally.ranking.begin(),
                          tally.ranking.begin() + static_cast<std::ptrdiff_t>(keep));
    return tally;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json histogram_json(const WeightHistogram& h) {
    return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

nlohmann::json config_json(const SeedConfig& c) {
    nlohmann::json j;
    j["k"] = c.k;
    j["alpha"] = c.alpha;
    j["tau"] = c.tau;
    if (c.budget) j["budget"] = *c.budget;
    if (c.budget_fraction) j["budget_fraction"] = *c.budget_fraction;
    j["target"] = c.target_name;
    j["enable_subspace"] = c.enable_subspace;
    j["enable_local_scaling"] = c.enable_local_scaling;
    j["enable_wis"] = c.enable_wis;
    j["allow_negative"] = c.allow_negative;
    j["mask_edges"] = c.mask_edges;
    j["seed"] = c.seed;
    j["batch_size"] = c.batch_size;
    return j;
}

}  // namespace

std::string report_json(const RunReport& report) {
    nlohmann::json j;
    j["selection"]["selected"] = report.selection.selected;
    j["selection"]["weights"] = report.selection.selected_weights;
    j["selection"]["total_weight"] = report.selection.total_weight;
    j["selection"]["budget"] = report.selection.budget;
    j["selection"]["removed_by"] = report.selection.removed_by;
    j["selection"]["flags"] = {{"mask_fallback", report.selection.flags.mask_fallback},
                               {"zero_norm_rows", report.selection.flags.zero_norm_rows},
                               {"k_clamped", report.selection.flags.k_clamped}};

    j["mask"] = {{"retained", report.mask.retained},
                 {"channels", report.mask.channels},
                 {"fallback", report.mask.fallback},
                 {"enabled", report.mask.enabled}};

    j["graph"] = {{"nodes", report.graph_stats.nodes},
                  {"edges", report.graph_stats.edges},
                  {"max_degree", report.graph_stats.max_degree},
                  {"mean_degree", report.graph_stats.mean_degree},
                  {"zero_norm_rows", report.graph_stats.zero_norm_rows},
                  {"k_effective", report.graph_stats.k_effective}};
    if (report.graph_stats.per_domain) {
        const auto& pd = *report.graph_stats.per_domain;
        j["graph"]["per_domain"] = {{"mean_degree", pd.mean_degree},
                                    {"max_degree", pd.max_degree},
                                    {"node_count", pd.node_count},
                                    {"ratio", pd.ratio}};
    }

    j["weight_histograms"] = {{"full", histogram_json(report.hist_full)},
                              {"mutual", histogram_json(report.hist_masked)}};
    j["argmax_target"] = report.weights.argmax_target;
    j["config"] = config_json(report.config);
    j["timings"] = report.timings_ms;
    return j.dump(2);
}

void emit_report(const RunReport& report, const std::filesystem::path& out_dir, bool write_edges) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output dir " + out_dir.string() + ": " + ec.message());
    }

    {
        const auto path = out_dir / "selected.txt";
        std::ofstream out(path);
        if (!out) throw IoError("cannot open for writing: " + path.string());
        for (const std::int32_t id : report.selection.selected) {
            out << id << "\n";
        }
        if (!out) throw IoError("write failure: " + path.string());
    }
    {
        const auto path = out_dir / "report.json";
        std::ofstream out(path);
        if (!out) throw IoError("cannot open for writing: " + path.string());
        out << report_json(report) << "\n";
        if (!out) throw IoError("write failure: " + path.string());
    }
    if (write_edges) {
        ConflictGraph g;
        g.edges = report.edges;
        write_edge_list(g, out_dir / "edges.txt");
    }
}

}  // namespace seed
