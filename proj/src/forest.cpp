#include "sdf/forest.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "sdf/error.hpp"
#include "sdf/rng.hpp"

namespace sdf {

namespace {

// Weights sum to 1 only up to rounding; clamping keeps entries inside [0, 1].
ClassDistribution clamp_unit(ClassDistribution v) {
    return {std::clamp(v[0], 0.0, 1.0), std::clamp(v[1], 0.0, 1.0)};
}

} // namespace

Forest::Forest(TreeKind kind, std::vector<DecisionTree> trees, WeightVector weights)
    : kind_(kind), trees_(std::move(trees)), weights_(std::move(weights)) {
    if (trees_.empty()) {
        throw InvariantError("forest has no trees");
    }
    if (weights_.size() != trees_.size()) {
        throw InvariantError("forest has " + std::to_string(trees_.size()) + " trees but " +
                             std::to_string(weights_.size()) + " weights");
    }
    for (const auto& t : trees_) {
        if (t.width() != trees_.front().width()) {
            throw InvariantError("forest trees disagree on input width");
        }
        if (t.config().kind != kind_) {
            throw InvariantError("forest of kind " + to_string(kind_) + " holds a " + to_string(t.config().kind) +
                                 " tree");
        }
    }
}

ClassDistribution Forest::class_vector(std::span<const double> x) const {
    ClassDistribution v{0.0, 0.0};
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        const auto& p = trees_[t].predict(x);
        const double w = weights_[t];
        v[0] += p[0] * w;
        v[1] += p[1] * w;
    }
    return clamp_unit(v);
}

// Accumulates p * (1/T) term by term, the same arithmetic as class_vector
// under uniform weights, so the two agree bit for bit.
ClassDistribution Forest::mean_class_vector(std::span<const double> x) const {
    const double inv = 1.0 / static_cast<double>(trees_.size());
    ClassDistribution v{0.0, 0.0};
    for (const auto& tree : trees_) {
        const auto& p = tree.predict(x);
        v[0] += p[0] * inv;
        v[1] += p[1] * inv;
    }
    return clamp_unit(v);
}

Forest fit_forest(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows, const TreeConfig& cfg,
                  std::size_t n_trees, std::uint64_t seed) {
    if (n_trees < 1) {
        throw ConfigError("fit_forest: need at least one tree");
    }
    std::vector<DecisionTree> trees;
    trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        trees.push_back(fit_tree(X, y, rows, cfg, derive_seed(seed, {t})));
    }
    return Forest(cfg.kind, std::move(trees), WeightVector::uniform(n_trees));
}

Forest fit_forest(const Matrix& X, std::span<const int> y, const TreeConfig& cfg, std::size_t n_trees,
                  std::uint64_t seed) {
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_forest(X, y, rows, cfg, n_trees, seed);
}

ProbMatrix tree_probabilities(const Forest& f, const Matrix& X, std::span<const std::size_t> rows) {
    if (X.cols() != f.width()) {
        throw DataError("tree_probabilities: input width " + std::to_string(X.cols()) + ", forest expects " +
                        std::to_string(f.width()));
    }
    ProbMatrix out{Matrix(rows.size(), f.size())};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto x = X.row(rows[r]);
        for (std::size_t t = 0; t < f.size(); ++t) {
            out.p0(r, t) = f.trees()[t].predict(x)[0];
        }
    }
    return out;
}

ProbMatrix tree_probabilities(const Forest& f, const Matrix& X) {
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return tree_probabilities(f, X, rows);
}

ClassDistribution weighted_class_vector(const Forest& f, std::span<const double> x) {
    if (x.size() != f.width()) {
        throw DataError("weighted_class_vector: input width " + std::to_string(x.size()) + ", forest expects " +
                        std::to_string(f.width()));
    }
    return f.class_vector(x);
}

Forest set_weights(Forest f, WeightVector w) {
    if (w.size() != f.size()) {
        throw InvariantError("set_weights: " + std::to_string(w.size()) + " weights for " + std::to_string(f.size()) +
                             " trees");
    }
    f.weights_ = std::move(w);
    return f;
}

Forest set_weights(Forest f, std::vector<double> w) { return set_weights(std::move(f), WeightVector(std::move(w))); }

} // namespace sdf
