#include "seed/wis.hpp"

#include <algorithm>
#include <queue>

#include "seed/errors.hpp"

namespace seed {

namespace {

struct HeapEntry {
    double weight;
    std::int32_t id;
};

// priority_queue keeps the *greatest* element on top under operator<;
// rank by weight, break ties toward the lower id.
struct HeapLess {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.weight != b.weight) return a.weight < b.weight;
        return a.id > b.id;
    }
};

}  // namespace

SelectionResult greedy_wis(const ConflictGraph& graph, std::span<const double> weights,
                           std::int32_t budget, bool allow_negative) {
    const std::size_t n = graph.node_count;
    if (weights.size() != n) {
        throw ValidationError("greedy_wis: weights length " + std::to_string(weights.size()) +
                              " != node count " + std::to_string(n));
    }
    if (budget < 1) {
        throw ValidationError("greedy_wis: budget must be >= 1");
    }

    SelectionResult result;
    result.budget = budget;
    result.removed_by.assign(n, -1);

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap;
    for (std::size_t i = 0; i < n; ++i) {
        heap.push(HeapEntry{weights[i], static_cast<std::int32_t>(i)});
    }

    std::vector<std::uint8_t> removed(n, 0);
    while (!heap.empty() && result.selected.size() < static_cast<std::size_t>(budget)) {
        const HeapEntry top = heap.top();
        heap.pop();
        if (removed[top.id]) continue;  // lazy deletion
        if (!allow_negative && top.weight < 0.0) break;

        removed[top.id] = 1;
        result.selected.push_back(top.id);
        result.selected_weights.push_back(top.weight);
        result.total_weight += top.weight;
        for (const std::int32_t nbr : graph.adjacency[top.id]) {
            if (!removed[nbr]) {
                removed[nbr] = 1;
                result.removed_by[nbr] = top.id;
            }
        }
    }
    return result;
}

bool is_independent_set(const ConflictGraph& graph, std::span<const std::int32_t> ids) {
    std::vector<std::uint8_t> chosen(graph.node_count, 0);
    for (const std::int32_t id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= graph.node_count) return false;
        if (chosen[id]) return false;  // duplicate
        chosen[id] = 1;
    }
    for (const std::int32_t id : ids) {
        for (const std::int32_t nbr : graph.adjacency[id]) {
            if (chosen[nbr]) return false;
        }
    }
    return true;
}

SelectionResult exact_wis(const ConflictGraph& graph, std::span<const double> weights,
                          std::int32_t budget) {
    const std::size_t n = graph.node_count;
    if (n > 30) {
        throw ValidationError("exact_wis: instance too large (" + std::to_string(n) +
                              " nodes, limit 30)");
    }
    if (weights.size() != n) {
        throw ValidationError("exact_wis: weights length mismatch");
    }
    if (budget < 1) {
        throw ValidationError("exact_wis: budget must be >= 1");
    }

    std::vector<std::uint32_t> adj_mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (const std::int32_t j : graph.adjacency[i]) {
            adj_mask[i] |= 1u << j;
        }
    }

    // Bound helper: the best conceivable gain from ids >= idx is the sum of
    // the largest (budget - taken) positive weights in that suffix.
    std::vector<std::vector<double>> suffix_pos(n + 1);
    suffix_pos[n] = {};
    for (std::size_t idx = n; idx-- > 0;) {
        suffix_pos[idx] = suffix_pos[idx + 1];
        if (weights[idx] > 0.0) {
            suffix_pos[idx].insert(
                std::upper_bound(suffix_pos[idx].begin(), suffix_pos[idx].end(), weights[idx],
                                 std::greater<double>()),
                weights[idx]);
        }
    }

    double best_total = 0.0;  // the empty set is always feasible
    std::vector<std::int32_t> best_set;
    std::vector<std::int32_t> current;
    double current_total = 0.0;
    std::uint32_t blocked = 0;  // union of neighbourhoods of chosen nodes

    // Include-first DFS over increasing ids: the first optimum found is the
    // lexicographically smallest, so equal-total candidates never replace it.
    auto dfs = [&](auto&& self, std::size_t idx) -> void {
        if (current_total > best_total) {
            best_total = current_total;
            best_set = current;
        }
        if (idx == n || current.size() == static_cast<std::size_t>(budget)) return;

        double bound = current_total;
        const auto& pos = suffix_pos[idx];
        const std::size_t room =
            std::min(pos.size(), static_cast<std::size_t>(budget) - current.size());
        for (std::size_t r = 0; r < room; ++r) bound += pos[r];
        if (bound <= best_total) return;  // equal totals keep the first (lex-smallest) optimum

        const std::uint32_t bit = 1u << idx;
        if ((blocked & bit) == 0) {
            current.push_back(static_cast<std::int32_t>(idx));
            current_total += weights[idx];
            const std::uint32_t saved = blocked;
            blocked |= adj_mask[idx] | bit;
            self(self, idx + 1);
            blocked = saved;
            current_total -= weights[idx];
            current.pop_back();
        }
        self(self, idx + 1);
    };
    dfs(dfs, 0);

    SelectionResult result;
    result.budget = budget;
    result.removed_by.assign(n, -1);
    result.selected = best_set;
    // present heaviest-first like the greedy, lowest id on ties
    std::sort(result.selected.begin(), result.selected.end(),
              [&](std::int32_t a, std::int32_t b) {
                  if (weights[a] != weights[b]) return weights[a] > weights[b];
                  return a < b;
              });
    for (const std::int32_t id : result.selected) {
        result.selected_weights.push_back(weights[id]);
        result.total_weight += weights[id];
    }
    return result;
}

}  // namespace seed
