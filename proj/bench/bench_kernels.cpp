// Compares the OpenMP kernels against the serial reference implementations.
// Usage: seed_bench [n] [channels] [k]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "seed/influence.hpp"
#include "seed/knn.hpp"
#include "seed/reference.hpp"
#include "seed/rng.hpp"
#include "seed/threading.hpp"

using namespace seed;

namespace {

double time_seconds(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CheckpointBundle random_bundle(Rng& rng, std::size_t n, std::size_t channels, std::size_t m) {
    CheckpointBundle bundle;
    bundle.target_names = {"target"};
    CheckpointGradients ck;
    ck.step_id = 0;
    ck.learning_rate = 1.0;
    ck.train = DenseMatrix(n, channels);
    for (auto& v : ck.train.values) v = static_cast<float>(rng.normal());
    DenseMatrix tgt(m, channels);
    for (auto& v : tgt.values) v = static_cast<float>(rng.normal());
    ck.targets.push_back(tgt);
    bundle.checkpoints.push_back(std::move(ck));
    finalize_bundle(bundle);
    return bundle;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000;
    const std::size_t channels = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 256;
    const int k = argc > 3 ? std::atoi(argv[3]) : 20;

    std::printf("n=%zu channels=%zu k=%d workers=%d\n", n, channels, k, worker_count());

    Rng rng(7);
    const auto bundle = random_bundle(rng, n, channels, 32);

    Matrix64 embeddings;
    const double t_embed = time_seconds([&] { embeddings = build_node_embeddings(bundle); });
    Matrix64 embeddings_ref;
    const double t_embed_ref =
        time_seconds([&] { embeddings_ref = ref::build_node_embeddings(bundle); });

    const auto normalized = normalize_rows(embeddings).matrix;

    KnnIndex fast;
    const double t_knn = time_seconds([&] { fast = knn_search(normalized, k, 256); });
    KnnIndex brute;
    const double t_knn_ref = time_seconds([&] { brute = ref::knn_brute_force(normalized, k); });
    const bool knn_match = fast.ids == brute.ids;

    Matrix64 inf;
    const double t_inf = time_seconds([&] {
        inf = trajectory_influence(bundle, "target", ChannelMask::full(channels));
    });
    Matrix64 inf_ref;
    const double t_inf_ref = time_seconds([&] {
        inf_ref = ref::trajectory_influence(bundle, "target", ChannelMask::full(channels));
    });
    double max_diff = 0.0;
    for (std::size_t i = 0; i < inf.values.size(); ++i) {
        max_diff = std::max(max_diff, std::fabs(inf.values[i] - inf_ref.values[i]));
    }

    std::printf("%-22s %12s %12s %9s\n", "kernel", "parallel(s)", "serial(s)", "speedup");
    std::printf("%-22s %12.3f %12.3f %8.1fx\n", "build_embeddings", t_embed, t_embed_ref,
                t_embed_ref / t_embed);
    std::printf("%-22s %12.3f %12.3f %8.1fx  ids %s\n", "knn_search", t_knn, t_knn_ref,
                t_knn_ref / t_knn, knn_match ? "match" : "MISMATCH");
    std::printf("%-22s %12.3f %12.3f %8.1fx  max |diff| %.3g\n", "trajectory_influence", t_inf,
                t_inf_ref, t_inf_ref / t_inf, max_diff);
    return knn_match ? 0 : 1;
}
