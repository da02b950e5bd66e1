#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "seed/errors.hpp"

namespace seed {

// Row-major dense matrix. Gradient features are stored as float32 on disk and
// in loaded bundles; derived quantities (embeddings, influence values) use the
// float64 variant so long channel reductions keep their precision.
template <typename T>
struct BasicMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> values;  // rows * cols entries

    BasicMatrix() = default;
    BasicMatrix(std::size_t r, std::size_t c, T fill = T{})
        : rows(r), cols(c), values(r * c, fill) {}

    T* row(std::size_t i) { return values.data() + i * cols; }
    const T* row(std::size_t i) const { return values.data() + i * cols; }

    T& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    const T& at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    bool shape_consistent() const { return values.size() == rows * cols; }
};

using DenseMatrix = BasicMatrix<float>;
using Matrix64 = BasicMatrix<double>;

/// First non-finite entry as (row, col), or nullopt if all values are finite.
template <typename T>
std::optional<std::pair<std::size_t, std::size_t>> first_nonfinite(const BasicMatrix<T>& m) {
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (!std::isfinite(static_cast<double>(m.values[i]))) {
            return std::make_pair(i / m.cols, i % m.cols);
        }
    }
    return std::nullopt;
}

template <typename T>
void require_finite(const BasicMatrix<T>& m, const char* what) {
    if (auto bad = first_nonfinite(m)) {
        throw DataError(std::string(what) + ": non-finite value at row " +
                        std::to_string(bad->first) + ", col " + std::to_string(bad->second));
    }
}

}  // namespace seed
