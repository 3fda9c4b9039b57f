#include <doctest.h>

#include <random>

#include "sdf/error.hpp"
#include "sdf/forest.hpp"
#include "support.hpp"

using namespace sdf;

namespace {

DecisionTree leaf(double p0, std::size_t width = 1) {
    return DecisionTree({{-1, 0, -1, -1, {p0, 1.0 - p0}}}, TreeConfig{}, 0, width);
}

Forest three_leaves() { return Forest(TreeKind::random_forest, {leaf(0.5), leaf(0.4), leaf(1.0)}, WeightVector::uniform(3)); }

struct Fixture {
    Matrix X;
    std::vector<int> y;
};

Fixture noisy(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Fixture f;
    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<double> row{g(rng), g(rng), g(rng), g(rng)};
        f.X.push_row(row);
        f.y.push_back(row[0] + row[1] > 0 ? 1 : 0);
    }
    return f;
}

} // namespace

TEST_CASE("weighted class vector is the weighted sum of tree distributions") {
    const std::vector<double> x{0.0};
    const std::vector<double> w{0.2, 0.3, 0.5};
    const auto f = set_weights(three_leaves(), w);
    const auto v = weighted_class_vector(f, x);
    CHECK(v[0] == doctest::Approx(0.5 * 0.2 + 0.4 * 0.3 + 1.0 * 0.5));
    CHECK(v[1] == doctest::Approx(0.5 * 0.2 + 0.6 * 0.3 + 0.0 * 0.5));

    const auto vertex = weighted_class_vector(set_weights(three_leaves(), std::vector<double>{1, 0, 0}), x);
    CHECK(vertex[0] == 0.5);
    CHECK(vertex[1] == 0.5);
}

TEST_CASE("uniform weights reproduce the arithmetic mean bit for bit") {
    const auto data = noisy(120, 1);
    for (const auto kind : {TreeKind::random_forest, TreeKind::complete_random}) {
        const auto f = fit_forest(data.X, data.y, TreeConfig::defaults(kind), 7, 2);
        CHECK(f.weights().is_uniform());
        for (std::size_t r = 0; r < data.X.rows(); ++r) {
            const auto weighted = f.class_vector(data.X.row(r));
            const auto mean = f.mean_class_vector(data.X.row(r));
            REQUIRE(weighted == mean);
            double p0 = 0.0;
            for (const auto& t : f.trees()) p0 += t.predict(data.X.row(r))[0];
            CHECK(weighted[0] == doctest::Approx(p0 / 7.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("single-tree forest returns its tree's distribution") {
    const auto data = noisy(50, 2);
    const auto f = fit_forest(data.X, data.y, TreeConfig::defaults(TreeKind::random_forest), 1, 3);
    for (std::size_t r = 0; r < data.X.rows(); ++r) {
        CHECK(f.class_vector(data.X.row(r)) == f.trees()[0].predict(data.X.row(r)));
    }
}

TEST_CASE("fit_forest is deterministic and seeds trees independently") {
    const auto data = noisy(80, 3);
    const auto cfg = TreeConfig::defaults(TreeKind::random_forest);
    const auto a = fit_forest(data.X, data.y, cfg, 5, 11);
    CHECK(a == fit_forest(data.X, data.y, cfg, 5, 11));
    CHECK_FALSE(a == fit_forest(data.X, data.y, cfg, 5, 12));
    CHECK_FALSE(a.trees()[0] == a.trees()[1]);
}

TEST_CASE("tree_probabilities column t is tree t applied rowwise") {
    const auto data = noisy(40, 4);
    const auto f = fit_forest(data.X, data.y, TreeConfig::defaults(TreeKind::complete_random), 4, 5);
    const auto P = tree_probabilities(f, data.X);
    REQUIRE(P.rows() == 40);
    REQUIRE(P.trees() == 4);
    for (std::size_t r = 0; r < P.rows(); ++r) {
        for (std::size_t t = 0; t < P.trees(); ++t) {
            CHECK(P.p0(r, t) == f.trees()[t].predict(data.X.row(r))[0]);
            CHECK(P.p0(r, t) >= 0.0);
            CHECK(P.p0(r, t) <= 1.0);
        }
    }
    const Forest ones(TreeKind::random_forest, {leaf(1.0, 4), leaf(1.0, 4)}, WeightVector::uniform(2));
    const auto all_one = tree_probabilities(ones, data.X);
    for (const double p : all_one.p0.data()) CHECK(p == 1.0);
}

TEST_CASE("set_weights enforces the simplex") {
    const Forest two(TreeKind::random_forest, {leaf(0.1), leaf(0.9)}, WeightVector::uniform(2));
    CHECK_NOTHROW(set_weights(two, std::vector<double>{0.2, 0.8}));
    CHECK_THROWS_AS(set_weights(two, std::vector<double>{0.5, 0.6}), InvariantError);
    CHECK_THROWS_AS(set_weights(two, std::vector<double>{1.2, -0.2}), InvariantError);
    CHECK_THROWS_AS(set_weights(two, WeightVector::uniform(3)), InvariantError);
}

TEST_CASE("forest construction invariants") {
    CHECK_THROWS_AS(Forest(TreeKind::random_forest, {}, WeightVector{}), InvariantError);
    CHECK_THROWS_AS(Forest(TreeKind::random_forest, {leaf(0.5, 1), leaf(0.5, 2)}, WeightVector::uniform(2)),
                    InvariantError);
    const DecisionTree crt({{-1, 0, -1, -1, {1, 0}}}, TreeConfig::defaults(TreeKind::complete_random), 0, 1);
    CHECK_THROWS_AS(Forest(TreeKind::random_forest, {crt}, WeightVector::uniform(1)), InvariantError);
    const std::vector<double> wide{1, 2};
    CHECK_THROWS_AS(weighted_class_vector(three_leaves(), wide), DataError);
}
