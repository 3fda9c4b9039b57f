#include <doctest.h>

#include <random>

#include "sdf/error.hpp"
#include "sdf/weightopt.hpp"
#include "support.hpp"

using namespace sdf;

namespace {

PMatrix pm(const std::vector<std::vector<double>>& rows) { return PMatrix{testing::to_matrix(rows)}; }

std::vector<std::vector<double>> random_rows(std::mt19937_64& rng, std::size_t rows, std::size_t T) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> P(rows, std::vector<double>(T));
    for (auto& r : P) for (auto& x : r) x = u(rng);
    return P;
}

} // namespace

TEST_CASE("P matrix entries carry z and the tree margin") {
    ProbMatrix probs{testing::to_matrix({{1.0, 0.5, 0.2}})};
    const std::vector<int> similar{0};
    const std::vector<int> dissimilar{1};
    const auto s = build_p_matrix(probs, similar, 1.0);
    CHECK(s.entries(0, 0) == -1.0);
    CHECK(s.entries(0, 1) == 0.0);
    CHECK(build_p_matrix(probs, dissimilar, 1.0).entries(0, 1) == 0.0);
    // Scalar oracle: z * (p0 - p1) with z = +2 for a dissimilar pair.
    const double p0 = 0.2;
    const double oracle = 2.0 * (p0 - (1.0 - p0));
    CHECK(build_p_matrix(probs, dissimilar, 2.0).entries(0, 2) == doctest::Approx(oracle));
    CHECK(oracle == doctest::Approx(-1.2));
    const std::vector<int> too_many{0, 1};
    CHECK_THROWS_AS(build_p_matrix(probs, too_many, 1.0), DataError);
}

TEST_CASE("objective examples") {
    const std::vector<double> half{0.5, 0.5};
    CHECK(objective(pm({{1, -1}}), half, 0.2) == doctest::Approx(0.1));
    const std::vector<double> w{0.3, 0.7};
    CHECK(objective(pm({{0, 0}, {0, 0}}), w, 0.4) == 0.4 * (0.09 + 0.49));
    const std::vector<double> star{1.0 / 12.0, 11.0 / 12.0};
    const std::vector<std::vector<double>> rows{{1, -1}, {1, 0}};
    CHECK(objective(pm(rows), star, 0.1) == doctest::Approx(testing::oracle_objective(rows, star, 0.1)));
    CHECK(objective(pm(rows), star, 0.1) == doctest::Approx(0.091667).epsilon(1e-5));
}

TEST_CASE("objective agrees with the direct oracle on random instances") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto rows = random_rows(rng, 7, 4);
        std::vector<double> w{0.1, 0.2, 0.3, 0.4};
        CHECK(objective(pm(rows), w, 0.05) == doctest::Approx(testing::oracle_objective(rows, w, 0.05)).epsilon(1e-12));
    }
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto rows = random_rows(rng, 6, 3);
        std::vector<double> w{u(rng), u(rng), u(rng)};
        const double lambda = 0.1;
        const auto g = objective_gradient(pm(rows), w, lambda);
        for (std::size_t t = 0; t < 3; ++t) {
            const double h = 1e-6;
            auto plus = w;
            auto minus = w;
            plus[t] += h;
            minus[t] -= h;
            const double fd = (testing::oracle_objective(rows, plus, lambda) - testing::oracle_objective(rows, minus, lambda)) / (2 * h);
            CHECK(g[t] == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("project_simplex examples") {
    const auto check = [](std::vector<double> in, std::vector<double> expected) {
        const auto out = project_simplex(in);
        REQUIRE(out.size() == expected.size());
        for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == doctest::Approx(expected[k]).epsilon(1e-12));
    };
    check({0.6, 0.6}, {0.5, 0.5});
    check({0.3, 0.7}, {0.3, 0.7});
    check({2, 0}, {1, 0});
    check({-5, 3, 0}, {0, 1, 0});
    CHECK_THROWS_AS(project_simplex(std::vector<double>{}), DataError);
    CHECK_THROWS_AS(project_simplex(std::vector<double>{1.0, std::nan("")}), DataError);
}

TEST_CASE("project_simplex is the nearest feasible point") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::vector<double> v{u(rng), u(rng)};
        const auto p = project_simplex(v);
        CHECK(on_simplex(p));
        // Oracle: scan the 1-D simplex for the closest point.
        double best = 1e300;
        for (int a = 0; a <= 100000; ++a) {
            const double w0 = a / 100000.0;
            best = std::min(best, (w0 - v[0]) * (w0 - v[0]) + (1 - w0 - v[1]) * (1 - w0 - v[1]));
        }
        const double got = (p[0] - v[0]) * (p[0] - v[0]) + (p[1] - v[1]) * (p[1] - v[1]);
        CHECK(got <= best + 1e-9);
    }
}

TEST_CASE("solve_weights reaches the hand-derived optima") {
    const std::vector<std::vector<double>> single{{1, -1}};
    const auto a = solve_weights(pm(single), QPConfig{0.1});
    CHECK(a.weights[0] == doctest::Approx(0.5).epsilon(1e-6));
    const auto grid_a = testing::grid_oracle(single, 0.1, 1e-4);
    CHECK(grid_a.argmin[0] == doctest::Approx(0.5).epsilon(1e-4));

    const std::vector<std::vector<double>> two{{1, -1}, {1, 0}};
    const auto b = solve_weights(pm(two), QPConfig{0.1});
    const auto grid_b = testing::grid_oracle(two, 0.1, 1e-4);
    CHECK(std::abs(grid_b.argmin[0] - 1.0 / 12.0) < 1e-4);
    CHECK(std::abs(b.weights[0] - 1.0 / 12.0) < 1e-3);
    CHECK(std::abs(b.final_objective() - 0.091667) < 1e-6);
    CHECK(b.final_objective() <= grid_b.value + 1e-12);
}

TEST_CASE("nonpositive P leaves only the ridge, minimized at uniform") {
    const auto r = solve_weights(pm({{-1, -0.5, -0.2}, {0, -1, -1}}), QPConfig{0.3}, WeightVector({0.8, 0.1, 0.1}));
    for (std::size_t t = 0; t < 3; ++t) CHECK(r.weights[t] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("objective trace never increases and ends below the start") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const auto rows = random_rows(rng, 12, 5);
        const auto r = solve_weights(pm(rows), QPConfig{0.01});
        for (std::size_t k = 1; k < r.trace.size(); ++k) REQUIRE(r.trace[k] <= r.trace[k - 1]);
        CHECK(r.final_objective() <= r.initial_objective());
        CHECK(on_simplex(r.weights.values()));
    }
}

TEST_CASE("max_iter caps the iteration count") {
    QPConfig cfg{0.0};
    cfg.max_iter = 2;
    const auto r = solve_weights(pm({{1, -1, 0.5}, {0.3, 0.2, -1}}), cfg);
    CHECK(r.iterations <= 2);
}

TEST_CASE("solve_all decomposes into independent per-forest problems") {
    ProbMatrix a{testing::to_matrix({{0.9, 0.2}, {0.4, 0.7}, {0.1, 0.3}})};
    const std::vector<int> y{0, 1, 1};
    const QPConfig cfg{0.05};
    const std::vector<ProbMatrix> one{a};
    const auto single = solve_all(one, y, cfg);
    CHECK(single.at(0).weights == solve_weights(build_p_matrix(a, y, 1.0), cfg).weights);
    const std::vector<ProbMatrix> twins{a, a};
    const auto both = solve_all(twins, y, cfg);
    CHECK(both[0].weights == both[1].weights);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(QPConfig{-1.0}.validate(), ConfigError);
    QPConfig bad_tol;
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(bad_tol.validate(), ConfigError);
    const std::vector<double> w{1.0};
    CHECK_THROWS_AS(objective(pm({{1, 2}}), w, 0.0), DataError);
}
