#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seed/graph.hpp"

namespace seed {

/// Diagnostics accumulated along the pipeline and echoed with the selection.
struct SelectionFlags {
    bool mask_fallback = false;
    std::int32_t zero_norm_rows = 0;
    bool k_clamped = false;
};

struct SelectionResult {
    std::vector<std::int32_t> selected;      // in selection order
    std::vector<double> selected_weights;    // aligned with selected
    double total_weight = 0.0;
    std::vector<std::int32_t> removed_by;    // removing node id, -1 when never removed
    std::int32_t budget = 0;
    SelectionFlags flags;
};

/// Max-heap greedy with lazy deletion: repeatedly pop the heaviest surviving
/// node (ties to the lower id), select it, mark its neighbours removed. Stops
/// at the budget, when the pool is exhausted, or — unless allow_negative —
/// when the heaviest survivor has negative weight: adding negative-influence
/// samples only lowers the objective while the budget is slack.
SelectionResult greedy_wis(const ConflictGraph& graph, std::span<const double> weights,
                           std::int32_t budget, bool allow_negative = false);

/// Exhaustive branch-and-bound optimum for small instances (<= 30 nodes);
/// test oracle. Among equal-weight optima returns the lexicographically
/// smallest id set.
SelectionResult exact_wis(const ConflictGraph& graph, std::span<const double> weights,
                          std::int32_t budget);

/// True when ids are unique, in range, and pairwise non-adjacent.
bool is_independent_set(const ConflictGraph& graph, std::span<const std::int32_t> ids);

}  // namespace seed
