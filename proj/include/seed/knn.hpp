#pragma once

#include <cstdint>
#include <vector>

#include "seed/matrix.hpp"

namespace seed {

struct NormalizedRows {
    Matrix64 matrix;
    std::vector<std::int32_t> zero_rows;  // rows with zero norm, left untouched
};

/// Scales each nonzero row to unit L2 norm. Zero rows stay zero and are
/// reported; a zero gradient sample has no direction and conflicts with
/// nothing downstream.
NormalizedRows normalize_rows(const Matrix64& m);

/// Exact top-k neighbours by inner product over unit rows. Lists are sorted
/// by descending similarity, ties by lower id, self excluded. Zero-norm rows
/// get empty lists and never appear as neighbours.
struct KnnIndex {
    std::size_t node_count = 0;
    int k_requested = 0;
    int k_effective = 0;  // min(k, N-1)
    bool k_clamped = false;
    std::vector<std::vector<std::int32_t>> ids;
    std::vector<std::vector<double>> sims;
    std::vector<std::int32_t> zero_rows;
};

/// batch_size is the candidate block length used by the scan; any value
/// produces bitwise-identical output, it only shapes memory traffic.
KnnIndex knn_search(const Matrix64& normalized, int k, std::size_t batch_size);

}  // namespace seed
