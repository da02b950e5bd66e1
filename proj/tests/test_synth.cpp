#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seed/errors.hpp"
#include "seed/influence.hpp"
#include "seed/knn.hpp"
#include "seed/rng.hpp"
#include "seed/synth.hpp"

using namespace seed;

namespace {

double mean_within_domain_cosine(const CheckpointBundle& bundle, const GroundTruth& truth,
                                 std::int32_t domain, std::size_t max_pairs = 400) {
    const auto normalized = normalize_rows(build_node_embeddings(bundle)).matrix;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < truth.domain_label.size(); ++i) {
        if (truth.domain_label[i] == domain) rows.push_back(i);
    }
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < rows.size() && pairs < max_pairs; ++a) {
        for (std::size_t b = a + 1; b < rows.size() && pairs < max_pairs; ++b) {
            double dot = 0.0;
            for (std::size_t c = 0; c < normalized.cols; ++c) {
                dot += normalized.at(rows[a], c) * normalized.at(rows[b], c);
            }
            acc += dot;
            ++pairs;
        }
    }
    return acc / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("generate: identical seeds produce bitwise-identical bundles") {
    const auto spec = standard_spec(321, 0.2);
    auto [b1, t1] = generate(spec);
    auto [b2, t2] = generate(spec);
    REQUIRE(b1.checkpoints.size() == b2.checkpoints.size());
    for (std::size_t t = 0; t < b1.checkpoints.size(); ++t) {
        CHECK(b1.checkpoints[t].train.values == b2.checkpoints[t].train.values);
        for (std::size_t b = 0; b < b1.checkpoints[t].targets.size(); ++b) {
            CHECK(b1.checkpoints[t].targets[b].values == b2.checkpoints[t].targets[b].values);
        }
    }
    CHECK(t1.domain_label == t2.domain_label);
    CHECK(t1.true_quality_score == t2.true_quality_score);

    auto [b3, t3] = generate(standard_spec(322, 0.2));
    CHECK(b3.checkpoints[0].train.values != b1.checkpoints[0].train.values);
}

TEST_CASE("generate: dense domain has higher within-domain cosine") {
    for (int s = 0; s < 10; ++s) {
        auto [bundle, truth] = generate(standard_spec(500 + s, 0.0));
        const double dense = mean_within_domain_cosine(bundle, truth, 0);
        const double sparse = mean_within_domain_cosine(bundle, truth, 1);
        CHECK(dense > sparse);
    }
}

TEST_CASE("generate: zero quality fraction leaves no row above the noise floor") {
    for (int s = 0; s < 5; ++s) {
        auto spec = standard_spec(700 + s, 0.2);
        auto [planted_bundle, planted_truth] = generate(spec);
        spec.domains[0].quality_fraction = 0.0;
        spec.domains[1].quality_fraction = 0.0;
        auto [flat_bundle, flat_truth] = generate(spec);

        CHECK(std::count(flat_truth.is_high_quality.begin(), flat_truth.is_high_quality.end(), 1) ==
              0);

        const auto mask = mutual_subspace(bundle_saliency(planted_bundle, -1),
                                          bundle_saliency(planted_bundle, 0));
        const auto w_planted =
            node_weights(trajectory_influence(planted_bundle, "target", mask));
        const auto mask_flat =
            mutual_subspace(bundle_saliency(flat_bundle, -1), bundle_saliency(flat_bundle, 0));
        const auto w_flat = node_weights(trajectory_influence(flat_bundle, "target", mask_flat));

        double min_planted = 1e300;
        for (std::size_t i = 0; i < planted_truth.is_high_quality.size(); ++i) {
            if (planted_truth.is_high_quality[i]) {
                min_planted = std::min(min_planted, w_planted.weights[i]);
            }
        }
        const double max_flat = *std::max_element(w_flat.weights.begin(), w_flat.weights.end());
        CHECK(max_flat < min_planted);
    }
}

TEST_CASE("generate: validation") {
    SynthSpec spec = standard_spec(1, 0.2);
    spec.domains[0].kappa = 0.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);

    spec = standard_spec(1, 0.2);
    spec.domains.clear();
    CHECK_THROWS_AS(generate(spec), ValidationError);

    spec = standard_spec(1, 0.2);
    spec.checkpoints[0].learning_rate = -1.0;
    CHECK_THROWS_AS(generate(spec), ValidationError);

    spec = standard_spec(1, 0.2);
    spec.targets.push_back({"target", 4});  // duplicate name
    CHECK_THROWS_AS(generate(spec), ValidationError);
}

TEST_CASE("eval_selection: recall, entropy, permutation invariance") {
    GroundTruth truth;
    truth.domain_count = 2;
    truth.domain_label = {0, 0, 0, 1, 1, 1};
    truth.is_high_quality = {1, 1, 0, 0, 1, 0};
    truth.true_quality_score = {0.9, 0.8, 0, 0, 0.7, 0};
    const std::vector<double> weights{0.9, 0.8, 0.1, 0.05, 0.7, 0.2};

    const std::vector<std::int32_t> exact_planted{0, 1, 4};
    const auto m = eval_selection(exact_planted, truth, weights);
    CHECK(m.quality_recall == doctest::Approx(1.0));
    CHECK(m.domain_entropy > 0.9);  // 2-vs-1 split across two domains
    CHECK(m.rank_corr > 0.5);

    const std::vector<std::int32_t> one_domain{0, 1, 2};
    CHECK(eval_selection(one_domain, truth, weights).domain_entropy == doctest::Approx(0.0));

    const std::vector<std::int32_t> shuffled{4, 0, 1};
    const auto m2 = eval_selection(shuffled, truth, weights);
    CHECK(m2.quality_recall == m.quality_recall);
    CHECK(m2.domain_entropy == doctest::Approx(m.domain_entropy));

    CHECK_THROWS_AS(eval_selection(std::vector<std::int32_t>{}, truth, weights), ValidationError);
    CHECK_THROWS_AS(eval_selection(std::vector<std::int32_t>{9}, truth, weights), ValidationError);
}

TEST_CASE("eval_selection: entropy approaches 1 for large random selections") {
    Rng rng(2024);
    GroundTruth truth;
    truth.domain_count = 4;
    const std::size_t n = 400;
    for (std::size_t i = 0; i < n; ++i) {
        truth.domain_label.push_back(static_cast<std::int32_t>(i % 4));
        truth.is_high_quality.push_back(0);
        truth.true_quality_score.push_back(0.0);
    }
    std::vector<std::int32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    // random half of the pool
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(ids[i], ids[rng.below(i + 1)]);
    }
    ids.resize(n / 2);
    const std::vector<double> weights(n, 0.0);
    CHECK(eval_selection(ids, truth, weights).domain_entropy > 0.98);
}

TEST_CASE("eval_selection: redundancy is the mean pairwise cosine of the picks") {
    GroundTruth truth;
    truth.domain_count = 1;
    truth.domain_label = {0, 0, 0};
    truth.is_high_quality = {0, 0, 0};
    truth.true_quality_score = {0, 0, 0};
    Matrix64 emb(3, 2);
    emb.at(0, 0) = 1;  // e0
    emb.at(1, 0) = 1;  // e0 again
    emb.at(2, 1) = 1;  // e1
    const std::vector<double> weights{0, 0, 0};

    const auto dup = eval_selection(std::vector<std::int32_t>{0, 1}, truth, weights, &emb);
    CHECK(dup.redundancy == doctest::Approx(1.0));
    const auto orth = eval_selection(std::vector<std::int32_t>{0, 2}, truth, weights, &emb);
    CHECK(orth.redundancy == doctest::Approx(0.0));
}

TEST_CASE("spearman: monotone, reversed, tied inputs") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> up{10, 20, 30, 40, 50};
    CHECK(spearman(a, up) == doctest::Approx(1.0));
    const std::vector<double> down{5, 4, 3, 2, 1};
    CHECK(spearman(a, down) == doctest::Approx(-1.0));
    const std::vector<double> flat{7, 7, 7, 7, 7};
    CHECK(spearman(a, flat) == doctest::Approx(0.0));

    // ties get average ranks
    const std::vector<double> tied{1, 1, 2, 2, 3};
    CHECK(spearman(tied, up) > 0.9);
}

TEST_CASE("degree_balance: degenerate cases give ratio 1") {
    const auto empty = make_conflict_graph(6, std::vector<std::pair<std::int32_t, std::int32_t>>{});
    const std::vector<std::int32_t> labels{0, 0, 0, 1, 1, 1};
    const auto stats = degree_balance(empty, labels);
    CHECK(stats.ratio == doctest::Approx(1.0));
    CHECK(stats.mean_degree == std::vector<double>{0.0, 0.0});

    // complete graph over uniform domains
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::int32_t i = 0; i < 6; ++i) {
        for (std::int32_t j = i + 1; j < 6; ++j) edges.push_back({i, j});
    }
    const auto complete = make_conflict_graph(6, edges);
    CHECK(degree_balance(complete, labels).ratio == doctest::Approx(1.0));

    CHECK_THROWS_AS(degree_balance(empty, std::vector<std::int32_t>{0, 1}), ValidationError);
}

TEST_CASE("degree_balance: ratio ignores weights entirely") {
    // scale-free by construction: only the graph enters
    const auto g = random_graph(20, 0.4, 5);
    std::vector<std::int32_t> labels(20);
    for (std::size_t i = 0; i < 20; ++i) labels[i] = static_cast<std::int32_t>(i % 2);
    const auto s1 = degree_balance(g, labels);
    const auto s2 = degree_balance(g, labels);
    CHECK(s1.ratio == s2.ratio);
}

TEST_CASE("synth spec json round trip") {
    const auto spec = standard_spec(99, 0.15);
    const auto text = synth_spec_json(spec);
    const auto back = parse_synth_spec(text);
    CHECK(back.seed == spec.seed);
    CHECK(back.signal_channels == spec.signal_channels);
    CHECK(back.noise_channels == spec.noise_channels);
    REQUIRE(back.domains.size() == spec.domains.size());
    CHECK(back.domains[0].kappa == spec.domains[0].kappa);
    CHECK(back.domains[1].quality_fraction == spec.domains[1].quality_fraction);
    REQUIRE(back.checkpoints.size() == spec.checkpoints.size());
    CHECK(back.targets[0].name == spec.targets[0].name);

    CHECK_THROWS_AS(parse_synth_spec("{not json"), FormatError);
}

TEST_CASE("ground truth json round trip") {
    GroundTruth truth;
    truth.domain_count = 2;
    truth.domain_label = {0, 1, 1};
    truth.is_high_quality = {1, 0, 0};
    truth.true_quality_score = {0.5, 0, 0};
    const auto back = parse_ground_truth(ground_truth_json(truth));
    CHECK(back.domain_label == truth.domain_label);
    CHECK(back.is_high_quality == truth.is_high_quality);
    CHECK(back.true_quality_score == truth.true_quality_score);
    CHECK(back.domain_count == truth.domain_count);
}
