#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "seed/matrixio.hpp"
#include "seed/rng.hpp"

namespace seed::testutil {

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("seed_test_" + tag + "_" + std::to_string(counter_++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

inline DenseMatrix matrix_from(std::size_t rows, std::size_t cols,
                               const std::vector<float>& values) {
    DenseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.values = values;
    return m;
}

inline DenseMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    DenseMatrix m(rows, cols);
    for (auto& v : m.values) v = static_cast<float>(scale * rng.normal());
    return m;
}

/// In-memory bundle: one train matrix and a set of named targets per
/// checkpoint, shapes validated.
inline CheckpointBundle make_bundle(
    const std::vector<double>& learning_rates, const std::vector<DenseMatrix>& trains,
    const std::vector<std::pair<std::string, std::vector<DenseMatrix>>>& targets) {
    CheckpointBundle bundle;
    for (const auto& [name, mats] : targets) {
        (void)mats;
        bundle.target_names.push_back(name);
    }
    std::sort(bundle.target_names.begin(), bundle.target_names.end());
    for (std::size_t t = 0; t < learning_rates.size(); ++t) {
        CheckpointGradients ck;
        ck.step_id = static_cast<std::int64_t>(t);
        ck.learning_rate = learning_rates[t];
        ck.train = trains[t];
        for (const auto& name : bundle.target_names) {
            for (const auto& [n2, mats] : targets) {
                if (n2 == name) ck.targets.push_back(mats[t]);
            }
        }
        bundle.checkpoints.push_back(std::move(ck));
    }
    finalize_bundle(bundle);
    return bundle;
}

/// Random bundle whose single target "self" equals the train matrices, for
/// inner-product identity checks.
inline CheckpointBundle random_self_bundle(Rng& rng, std::size_t n, std::size_t channels,
                                           std::size_t checkpoints) {
    std::vector<double> lrs;
    std::vector<DenseMatrix> trains;
    for (std::size_t t = 0; t < checkpoints; ++t) {
        lrs.push_back(rng.uniform(1e-5, 2.0));
        trains.push_back(random_matrix(rng, n, channels));
    }
    return make_bundle(lrs, trains, {{"self", trains}});
}

inline void set_env(const char* name, const char* value) {
    if (value == nullptr) {
        ::unsetenv(name);
    } else {
        ::setenv(name, value, 1);
    }
}

}  // namespace seed::testutil
