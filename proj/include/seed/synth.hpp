#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seed/graph.hpp"
#include "seed/matrixio.hpp"

namespace seed {

// ---------------------------------------------------------------------------
// Synthetic multi-domain gradient benchmark: planted quality on a small set
// of signal channels, domain structure with controllable cosine density on
// the noise channels, long-tail per-channel magnitudes.
// ---------------------------------------------------------------------------

struct DomainSpec {
    std::int64_t count = 0;
    double kappa = 1.0;            // higher -> denser cosine neighbourhoods
    double quality_fraction = 0.0; // leading fraction of rows carries signal
};

struct TargetSetSpec {
    std::string name;
    std::int64_t count = 0;
};

struct CheckpointSpec {
    std::int64_t step_id = 0;
    double learning_rate = 1.0;
};

struct SynthSpec {
    std::vector<DomainSpec> domains;
    std::int64_t signal_channels = 8;
    std::int64_t noise_channels = 504;
    std::vector<CheckpointSpec> checkpoints{{0, 1.0}};
    std::vector<TargetSetSpec> targets{{"target", 32}};
    std::uint64_t seed = 0;

    void validate() const;
};

struct GroundTruth {
    std::vector<std::int32_t> domain_label;
    std::vector<std::uint8_t> is_high_quality;
    std::vector<double> true_quality_score;  // 0 for unplanted rows
    std::int32_t domain_count = 0;
};

/// Deterministic per seed; domains use independent derived sub-streams so the
/// output never depends on generation order.
std::pair<CheckpointBundle, GroundTruth> generate(const SynthSpec& spec);

/// Spec used by the test and acceptance suites: two equal domains, dense
/// (kappa 50) vs sparse (kappa 2), 8 signal + 504 noise channels.
SynthSpec standard_spec(std::uint64_t seed, double quality_fraction = 0.2);

// ---------------------------------------------------------------------------
// Selection quality metrics
// ---------------------------------------------------------------------------

struct SelectionMetrics {
    double quality_recall = 0.0;  // planted rows recovered
    double domain_entropy = 0.0;  // Shannon entropy of selected domains, in [0,1]
    double rank_corr = 0.0;       // Spearman(weights, true quality), all rows
    double redundancy = 0.0;      // mean pairwise cosine among selected rows
};

/// embeddings may be null; redundancy is 0 without them.
SelectionMetrics eval_selection(std::span<const std::int32_t> selected, const GroundTruth& truth,
                                std::span<const double> weights,
                                const Matrix64* embeddings = nullptr);

/// Spearman rank correlation with average ranks on ties; 0 when either side
/// has no variance.
double spearman(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Graph structure diagnostics
// ---------------------------------------------------------------------------

struct DomainDegreeStats {
    std::vector<double> mean_degree;        // per domain
    std::vector<std::size_t> max_degree;    // per domain
    std::vector<std::size_t> node_count;    // per domain
    double ratio = 1.0;  // (max mean + 1) / (min mean + 1) over non-empty domains
};

DomainDegreeStats degree_balance(const ConflictGraph& graph,
                                 std::span<const std::int32_t> domain_labels);

// JSON (de)serialization for the CLI
SynthSpec parse_synth_spec(const std::string& json_text);
std::string synth_spec_json(const SynthSpec& spec);
std::string ground_truth_json(const GroundTruth& truth);
GroundTruth parse_ground_truth(const std::string& json_text);

}  // namespace seed
