#include "seed/knn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "seed/errors.hpp"
#include "seed/threading.hpp"

namespace seed {

namespace {

// Fixed-order dot product: eight independent accumulators combined as
// ((s0+s1)+(s2+s3)) + ((s4+s5)+(s6+s7)), then the tail. The order never
// varies between calls, so every (query, candidate) pair gets the same value
// no matter how the scan is batched or scheduled. The independent
// accumulators also let the compiler vectorize without relaxing FP semantics.
double dot_rows(const double* __restrict a, const double* __restrict b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        s4 += a[i + 4] * b[i + 4];
        s5 += a[i + 5] * b[i + 5];
        s6 += a[i + 6] * b[i + 6];
        s7 += a[i + 7] * b[i + 7];
    }
    double s = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

struct Neighbor {
    double sim;
    std::int32_t id;
};

// true when a outranks b: higher similarity first, lower id on ties
bool outranks(const Neighbor& a, const Neighbor& b) {
    return a.sim > b.sim || (a.sim == b.sim && a.id < b.id);
}

void insert_sorted(std::vector<Neighbor>& top, const Neighbor& cand) {
    const auto pos = std::upper_bound(
        top.begin(), top.end(), cand,
        [](const Neighbor& a, const Neighbor& b) { return outranks(a, b); });
    top.insert(pos, cand);
}

}  // namespace

NormalizedRows normalize_rows(const Matrix64& m) {
    NormalizedRows out;
    out.matrix = Matrix64(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* src = m.row(i);
        double* dst = out.matrix.row(i);
        double sq = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) sq += src[c] * src[c];
        if (sq == 0.0) {
            out.zero_rows.push_back(static_cast<std::int32_t>(i));
            continue;  // row stays zero
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t c = 0; c < m.cols; ++c) dst[c] = src[c] * inv;
    }
    return out;
}

KnnIndex knn_search(const Matrix64& normalized, int k, std::size_t batch_size) {
    const std::size_t n = normalized.rows;
    if (n < 2) {
        throw ValidationError("knn_search: need at least 2 rows");
    }
    if (k < 1) {
        throw ValidationError("knn_search: k must be >= 1");
    }
    if (batch_size == 0) batch_size = 1;

    KnnIndex index;
    index.node_count = n;
    index.k_requested = k;
    index.k_effective = static_cast<int>(std::min<std::size_t>(k, n - 1));
    index.k_clamped = index.k_effective < k;
    index.ids.resize(n);
    index.sims.resize(n);

    const std::size_t dim = normalized.cols;
    std::vector<std::uint8_t> is_zero(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        const double* row = normalized.row(i);
        for (std::size_t c = 0; c < dim; ++c) sq += row[c] * row[c];
        if (sq == 0.0) {
            is_zero[i] = 1;
            index.zero_rows.push_back(static_cast<std::int32_t>(i));
        }
    }

    const std::size_t k_eff = static_cast<std::size_t>(index.k_effective);
    const int workers = worker_count();

    // Queries are processed in chunks so one candidate block is reused across
    // the whole chunk while hot in cache. Per query, candidates still arrive
    // in increasing id order, which keeps the result independent of both the
    // chunking and batch_size.
    constexpr std::size_t kQueryChunk = 16;
    const std::int64_t n_chunks =
        static_cast<std::int64_t>((n + kQueryChunk - 1) / kQueryChunk);
    std::atomic<bool> sim_out_of_range{false};

#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t ci = 0; ci < n_chunks; ++ci) {
        const std::size_t i_begin = static_cast<std::size_t>(ci) * kQueryChunk;
        const std::size_t i_end = std::min(n, i_begin + kQueryChunk);
        std::vector<std::vector<Neighbor>> tops(i_end - i_begin);
        for (auto& t : tops) t.reserve(k_eff + 1);

        for (std::size_t block = 0; block < n; block += batch_size) {
            const std::size_t block_end = std::min(n, block + batch_size);
            for (std::size_t i = i_begin; i < i_end; ++i) {
                if (is_zero[i]) continue;
                const double* query = normalized.row(i);
                auto& top = tops[i - i_begin];
                for (std::size_t j = block; j < block_end; ++j) {
                    if (j == i || is_zero[j]) continue;
                    const Neighbor cand{dot_rows(query, normalized.row(j), dim),
                                        static_cast<std::int32_t>(j)};
                    if (top.size() < k_eff) {
                        insert_sorted(top, cand);
                    } else if (outranks(cand, top.back())) {
                        top.pop_back();
                        insert_sorted(top, cand);
                    }
                }
            }
        }

        for (std::size_t i = i_begin; i < i_end; ++i) {
            const auto& top = tops[i - i_begin];
            auto& ids = index.ids[i];
            auto& sims = index.sims[i];
            ids.resize(top.size());
            sims.resize(top.size());
            for (std::size_t r = 0; r < top.size(); ++r) {
                if (std::fabs(top[r].sim) > 1.0 + 1e-6) {
                    sim_out_of_range.store(true, std::memory_order_relaxed);
                }
                ids[r] = top[r].id;
                sims[r] = top[r].sim;
            }
        }
    }

    if (sim_out_of_range.load()) {
        throw InternalError("knn_search: similarity outside [-1, 1]; input rows not unit norm?");
    }
    return index;
}

}  // namespace seed
