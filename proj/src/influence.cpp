#include "seed/influence.hpp"

#include <cmath>

#include "seed/errors.hpp"
#include "seed/threading.hpp"

namespace seed {

std::vector<double> channel_saliency(const DenseMatrix& g) {
    if (g.rows == 0 || g.cols == 0) {
        throw ValidationError("channel_saliency: empty matrix");
    }
    std::vector<double> out(g.cols, 0.0);
    for (std::size_t i = 0; i < g.rows; ++i) {
        const float* row = g.row(i);
        for (std::size_t c = 0; c < g.cols; ++c) {
            out[c] += std::fabs(static_cast<double>(row[c]));
        }
    }
    const double inv = 1.0 / static_cast<double>(g.rows);
    for (double& v : out) v *= inv;
    return out;
}

std::vector<double> bundle_saliency(const CheckpointBundle& bundle, int which) {
    std::vector<double> out(bundle.channel_count, 0.0);
    std::size_t total_rows = 0;
    for (const auto& ck : bundle.checkpoints) {
        const DenseMatrix& m = which < 0 ? ck.train : ck.targets.at(which);
        for (std::size_t i = 0; i < m.rows; ++i) {
            const float* row = m.row(i);
            for (std::size_t c = 0; c < m.cols; ++c) {
                out[c] += std::fabs(static_cast<double>(row[c]));
            }
        }
        total_rows += m.rows;
    }
    if (total_rows == 0) {
        throw ValidationError("bundle_saliency: no rows");
    }
    const double inv = 1.0 / static_cast<double>(total_rows);
    for (double& v : out) v *= inv;
    return out;
}

ChannelMask mutual_subspace(const std::vector<double>& sal_train,
                            const std::vector<double>& sal_target) {
    if (sal_train.size() != sal_target.size()) {
        throw ValidationError("mutual_subspace: saliency length mismatch (" +
                              std::to_string(sal_train.size()) + " vs " +
                              std::to_string(sal_target.size()) + ")");
    }
    if (sal_train.empty()) {
        throw ValidationError("mutual_subspace: empty saliency");
    }
    const std::size_t c_count = sal_train.size();
    double mean_train = 0.0, mean_target = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) {
        mean_train += sal_train[c];
        mean_target += sal_target[c];
    }
    mean_train /= static_cast<double>(c_count);
    mean_target /= static_cast<double>(c_count);

    ChannelMask mask;
    mask.bits.assign(c_count, 0);
    for (std::size_t c = 0; c < c_count; ++c) {
        // strict on both sides; a channel salient on only one side is noise
        // for the alignment measure and stays out
        if (sal_train[c] > mean_train && sal_target[c] > mean_target) {
            mask.bits[c] = 1;
            ++mask.retained;
        }
    }
    if (mask.retained == 0) {
        mask = ChannelMask::full(c_count);
        mask.fallback = true;
    }
    return mask;
}

double per_step_influence(std::span<const float> g_train_row, std::span<const float> g_target_row,
                          double lr, const ChannelMask& mask) {
    if (g_train_row.size() != g_target_row.size() || g_train_row.size() != mask.bits.size()) {
        throw ValidationError("per_step_influence: length mismatch");
    }
    if (!(lr > 0.0)) {
        throw ValidationError("per_step_influence: learning rate must be > 0");
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < g_train_row.size(); ++c) {
        if (mask.bits[c]) {
            acc += static_cast<double>(g_train_row[c]) * static_cast<double>(g_target_row[c]);
        }
    }
    return lr * acc;
}

Matrix64 trajectory_influence(const CheckpointBundle& bundle, const std::string& target_name,
                              const ChannelMask& mask) {
    const int b = bundle.target_index(target_name);
    if (b < 0) {
        throw ValidationError("trajectory_influence: unknown target '" + target_name + "'");
    }
    if (mask.bits.size() != bundle.channel_count) {
        throw ValidationError("trajectory_influence: mask length mismatch");
    }

    const std::size_t n = bundle.train_count;
    const std::size_t m = bundle.target_rows(static_cast<std::size_t>(b));
    const std::size_t c_count = bundle.channel_count;

    // Pack retained channel indices once; the masked dot then runs contiguous.
    std::vector<std::int32_t> kept;
    kept.reserve(mask.retained);
    for (std::size_t c = 0; c < c_count; ++c) {
        if (mask.bits[c]) kept.push_back(static_cast<std::int32_t>(c));
    }

    Matrix64 out(n, m, 0.0);
    const int workers = worker_count();

#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        double* out_row = out.row(static_cast<std::size_t>(i));
        for (const auto& ck : bundle.checkpoints) {
            const float* gi = ck.train.row(static_cast<std::size_t>(i));
            const DenseMatrix& tm = ck.targets[static_cast<std::size_t>(b)];
            for (std::size_t j = 0; j < m; ++j) {
                const float* gj = tm.row(j);
                double acc = 0.0;
                for (const std::int32_t c : kept) {
                    acc += static_cast<double>(gi[c]) * static_cast<double>(gj[c]);
                }
                out_row[j] += ck.learning_rate * acc;
            }
        }
    }

    if (auto bad = first_nonfinite(out)) {
        throw InternalError("trajectory_influence: non-finite value at (" +
                            std::to_string(bad->first) + ", " + std::to_string(bad->second) + ")");
    }
    return out;
}

NodeWeights node_weights(const Matrix64& influence) {
    if (influence.cols == 0) {
        throw ValidationError("node_weights: zero targets");
    }
    NodeWeights nw;
    nw.weights.resize(influence.rows);
    nw.argmax_target.resize(influence.rows);
    for (std::size_t i = 0; i < influence.rows; ++i) {
        const double* row = influence.row(i);
        double best = row[0];
        std::int32_t best_j = 0;
        for (std::size_t j = 1; j < influence.cols; ++j) {
            if (row[j] > best) {  // ties keep the lowest index
                best = row[j];
                best_j = static_cast<std::int32_t>(j);
            }
        }
        nw.weights[i] = best;
        nw.argmax_target[i] = best_j;
    }
    return nw;
}

Matrix64 build_node_embeddings(const CheckpointBundle& bundle, const ChannelMask* mask) {
    const std::size_t n = bundle.train_count;
    const std::size_t c_count = bundle.channel_count;
    const std::size_t t_count = bundle.checkpoints.size();
    if (mask && mask->bits.size() != c_count) {
        throw ValidationError("build_node_embeddings: mask length mismatch");
    }

    Matrix64 out(n, t_count * c_count, 0.0);
    std::vector<double> scale(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        scale[t] = std::sqrt(bundle.checkpoints[t].learning_rate);
    }

    const int workers = worker_count();
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        double* out_row = out.row(static_cast<std::size_t>(i));
        for (std::size_t t = 0; t < t_count; ++t) {
            const float* g = bundle.checkpoints[t].train.row(static_cast<std::size_t>(i));
            double* dst = out_row + t * c_count;
            for (std::size_t c = 0; c < c_count; ++c) {
                const bool keep = !mask || mask->bits[c];
                dst[c] = keep ? scale[t] * static_cast<double>(g[c]) : 0.0;
            }
        }
    }
    return out;
}

}  // namespace seed
