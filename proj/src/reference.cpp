#include "seed/reference.hpp"

#include <algorithm>
#include <cmath>

#include "seed/errors.hpp"

namespace seed::ref {

KnnIndex knn_brute_force(const Matrix64& normalized, int k) {
    const std::size_t n = normalized.rows;
    if (n < 2) throw ValidationError("knn_brute_force: need at least 2 rows");
    if (k < 1) throw ValidationError("knn_brute_force: k must be >= 1");

    KnnIndex index;
    index.node_count = n;
    index.k_requested = k;
    index.k_effective = static_cast<int>(std::min<std::size_t>(k, n - 1));
    index.k_clamped = index.k_effective < k;
    index.ids.resize(n);
    index.sims.resize(n);

    std::vector<std::uint8_t> is_zero(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t c = 0; c < normalized.cols; ++c) {
            sq += normalized.at(i, c) * normalized.at(i, c);
        }
        if (sq == 0.0) {
            is_zero[i] = 1;
            index.zero_rows.push_back(static_cast<std::int32_t>(i));
        }
    }

    struct Entry {
        double sim;
        std::int32_t id;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (is_zero[i]) continue;
        std::vector<Entry> all;
        all.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || is_zero[j]) continue;
            double s = 0.0;
            for (std::size_t c = 0; c < normalized.cols; ++c) {
                s += normalized.at(i, c) * normalized.at(j, c);
            }
            all.push_back(Entry{s, static_cast<std::int32_t>(j)});
        }
        std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
            if (a.sim != b.sim) return a.sim > b.sim;
            return a.id < b.id;
        });
        const std::size_t take =
            std::min<std::size_t>(all.size(), static_cast<std::size_t>(index.k_effective));
        for (std::size_t r = 0; r < take; ++r) {
            index.ids[i].push_back(all[r].id);
            index.sims[i].push_back(all[r].sim);
        }
    }
    return index;
}

Matrix64 trajectory_influence(const CheckpointBundle& bundle, const std::string& target_name,
                              const ChannelMask& mask) {
    const int b = bundle.target_index(target_name);
    if (b < 0) throw ValidationError("ref influence: unknown target '" + target_name + "'");

    const std::size_t n = bundle.train_count;
    const std::size_t m = bundle.target_rows(static_cast<std::size_t>(b));
    Matrix64 out(n, m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double total = 0.0;
            for (const auto& ck : bundle.checkpoints) {
                double acc = 0.0;
                for (std::size_t c = 0; c < bundle.channel_count; ++c) {
                    if (!mask.bits[c]) continue;
                    acc += static_cast<double>(ck.train.at(i, c)) *
                           static_cast<double>(ck.targets[b].at(j, c));
                }
                total += ck.learning_rate * acc;
            }
            out.at(i, j) = total;
        }
    }
    return out;
}

Matrix64 build_node_embeddings(const CheckpointBundle& bundle) {
    const std::size_t n = bundle.train_count;
    const std::size_t c_count = bundle.channel_count;
    const std::size_t t_count = bundle.checkpoints.size();
    Matrix64 out(n, t_count * c_count, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < t_count; ++t) {
            const double scale = std::sqrt(bundle.checkpoints[t].learning_rate);
            for (std::size_t c = 0; c < c_count; ++c) {
                out.at(i, t * c_count + c) =
                    scale * static_cast<double>(bundle.checkpoints[t].train.at(i, c));
            }
        }
    }
    return out;
}

}  // namespace seed::ref
