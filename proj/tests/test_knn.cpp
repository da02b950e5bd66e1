#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "seed/errors.hpp"
#include "seed/knn.hpp"
#include "seed/reference.hpp"
#include "seed/rng.hpp"
#include "test_util.hpp"

using namespace seed;

namespace {

Matrix64 unit_rows_at_angles(const std::vector<double>& degrees) {
    Matrix64 m(degrees.size(), 2);
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        const double rad = degrees[i] * std::numbers::pi / 180.0;
        m.at(i, 0) = std::cos(rad);
        m.at(i, 1) = std::sin(rad);
    }
    return m;
}

Matrix64 random_normalized(Rng& rng, std::size_t n, std::size_t dim) {
    Matrix64 m(n, dim);
    for (auto& v : m.values) v = rng.normal();
    return normalize_rows(m).matrix;
}

bool same_index(const KnnIndex& a, const KnnIndex& b) {
    if (a.ids != b.ids) return false;
    for (std::size_t i = 0; i < a.sims.size(); ++i) {
        if (a.sims[i].size() != b.sims[i].size()) return false;
        for (std::size_t r = 0; r < a.sims[i].size(); ++r) {
            if (a.sims[i][r] != b.sims[i][r]) return false;  // bitwise
        }
    }
    return true;
}

}  // namespace

TEST_CASE("normalize_rows: 3-4-5 triangle, zero rows, idempotence") {
    Matrix64 m(3, 2);
    m.at(0, 0) = 3;
    m.at(0, 1) = 4;
    m.at(1, 0) = 0;
    m.at(1, 1) = 0;
    m.at(2, 0) = 1;
    m.at(2, 1) = 0;
    const auto out = normalize_rows(m);
    CHECK(out.matrix.at(0, 0) == doctest::Approx(0.6));
    CHECK(out.matrix.at(0, 1) == doctest::Approx(0.8));
    CHECK(out.zero_rows == std::vector<std::int32_t>{1});
    CHECK(out.matrix.at(1, 0) == 0.0);

    const auto twice = normalize_rows(out.matrix);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            CHECK(twice.matrix.at(i, c) == doctest::Approx(out.matrix.at(i, c)).epsilon(1e-7));
        }
    }
}

TEST_CASE("knn_search: nearest by angle") {
    const auto m = unit_rows_at_angles({0, 10, 90});
    const auto knn = knn_search(m, 1, 64);
    REQUIRE(knn.k_effective == 1);
    CHECK(knn.ids[0] == std::vector<std::int32_t>{1});  // cos 10 > cos 90
    CHECK(knn.sims[0][0] == doctest::Approx(std::cos(10.0 * std::numbers::pi / 180.0)));
}

TEST_CASE("knn_search: duplicate rows are mutual neighbours at similarity 1") {
    Matrix64 m(2, 3);
    m.at(0, 0) = m.at(1, 0) = 0.6;
    m.at(0, 1) = m.at(1, 1) = 0.8;
    const auto normalized = normalize_rows(m).matrix;
    const auto knn = knn_search(normalized, 1, 1);
    CHECK(knn.ids[0] == std::vector<std::int32_t>{1});
    CHECK(knn.ids[1] == std::vector<std::int32_t>{0});
    CHECK(knn.sims[0][0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("knn_search: k clamps to N-1") {
    Rng rng(5);
    const auto m = random_normalized(rng, 4, 8);
    const auto knn = knn_search(m, 5, 2);
    CHECK(knn.k_effective == 3);
    CHECK(knn.k_clamped);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(knn.ids[i].size() == 3);  // everyone else listed
    }
}

TEST_CASE("knn_search: validation") {
    Matrix64 one(1, 2);
    one.at(0, 0) = 1;
    CHECK_THROWS_AS(knn_search(one, 1, 1), ValidationError);
    Rng rng(6);
    const auto m = random_normalized(rng, 3, 4);
    CHECK_THROWS_AS(knn_search(m, 0, 1), ValidationError);
}

TEST_CASE("knn_search: output is bitwise identical for any batch size") {
    Rng rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 5 + rng.below(60);
        const auto m = random_normalized(rng, n, 1 + rng.below(24));
        const int k = 1 + static_cast<int>(rng.below(8));
        const auto a = knn_search(m, k, 1);
        const auto b = knn_search(m, k, 7);
        const auto c = knn_search(m, k, n);
        CHECK(same_index(a, b));
        CHECK(same_index(a, c));
    }
}

TEST_CASE("knn_search: agrees with the brute-force oracle") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 4 + rng.below(80);
        const auto m = random_normalized(rng, n, 2 + rng.below(16));
        const int k = 1 + static_cast<int>(rng.below(10));
        const auto fast = knn_search(m, k, 13);
        const auto oracle = ref::knn_brute_force(m, k);
        REQUIRE(fast.ids == oracle.ids);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < fast.sims[i].size(); ++r) {
                CHECK(fast.sims[i][r] == doctest::Approx(oracle.sims[i][r]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("knn_search: lists are sorted, self-free, within [-1, 1]") {
    Rng rng(9);
    const auto m = random_normalized(rng, 40, 6);
    const auto knn = knn_search(m, 5, 11);
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t r = 0; r < knn.ids[i].size(); ++r) {
            CHECK(knn.ids[i][r] != static_cast<std::int32_t>(i));
            CHECK(std::fabs(knn.sims[i][r]) <= 1.0 + 1e-6);
            if (r > 0) CHECK(knn.sims[i][r] <= knn.sims[i][r - 1]);
        }
    }
}

TEST_CASE("knn_search: zero rows get no neighbours and are never candidates") {
    Matrix64 m(4, 2);
    m.at(0, 0) = 1;
    m.at(1, 1) = 1;
    // row 2 all zero
    m.at(3, 0) = -1;
    const auto knn = knn_search(m, 3, 2);
    CHECK(knn.zero_rows == std::vector<std::int32_t>{2});
    CHECK(knn.ids[2].empty());
    for (std::size_t i = 0; i < 4; ++i) {
        for (const auto id : knn.ids[i]) CHECK(id != 2);
    }
}

TEST_CASE("knn_search: identical under different worker caps") {
    Rng rng(10);
    const auto m = random_normalized(rng, 64, 12);
    testutil::set_env("SEED_THREADS", "1");
    const auto a = knn_search(m, 6, 17);
    testutil::set_env("SEED_THREADS", "4");
    const auto b = knn_search(m, 6, 17);
    testutil::set_env("SEED_THREADS", nullptr);
    CHECK(same_index(a, b));
}
