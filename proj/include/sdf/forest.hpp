#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdf/matrix.hpp"
#include "sdf/simplex.hpp"
#include "sdf/tree.hpp"

namespace sdf {

/// Per-tree class-0 probabilities: one row per evaluated pair, one column per
/// tree. The class-1 probability of an entry is 1 minus the entry.
struct ProbMatrix {
    Matrix p0;

    std::size_t rows() const { return p0.rows(); }
    std::size_t trees() const { return p0.cols(); }
};

/// Trees of one kind plus their simplex weights. The class vector of a forest
/// is the weighted sum of its trees' leaf distributions.
class Forest {
public:
    Forest() = default;
    /// Validates shared width and weight length/feasibility; throws InvariantError.
    Forest(TreeKind kind, std::vector<DecisionTree> trees, WeightVector weights);

    TreeKind kind() const { return kind_; }
    std::span<const DecisionTree> trees() const { return trees_; }
    const WeightVector& weights() const { return weights_; }
    std::size_t size() const { return trees_.size(); }
    std::size_t width() const { return trees_.empty() ? 0 : trees_.front().width(); }

    /// sum_t w_t * p_t over the trees, without width checks.
    ClassDistribution class_vector(std::span<const double> x) const;
    /// Unweighted gcForest average (1/T) * sum_t p_t; ignores the stored weights.
    ClassDistribution mean_class_vector(std::span<const double> x) const;

    friend bool operator==(const Forest&, const Forest&) = default;
    friend Forest set_weights(Forest f, WeightVector w);

private:
    TreeKind kind_ = TreeKind::random_forest;
    std::vector<DecisionTree> trees_;
    WeightVector weights_;
};

/// Fits T trees on `rows` of X with seeds derived from (seed, tree index);
/// weights start uniform.
Forest fit_forest(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows, const TreeConfig& cfg,
                  std::size_t n_trees, std::uint64_t seed);
Forest fit_forest(const Matrix& X, std::span<const int> y, const TreeConfig& cfg, std::size_t n_trees,
                  std::uint64_t seed);

ProbMatrix tree_probabilities(const Forest& f, const Matrix& X);
ProbMatrix tree_probabilities(const Forest& f, const Matrix& X, std::span<const std::size_t> rows);

ClassDistribution weighted_class_vector(const Forest& f, std::span<const double> x);

/// Returns `f` with its weights replaced; throws InvariantError if `w` has the
/// wrong length or is not on the simplex.
Forest set_weights(Forest f, WeightVector w);
Forest set_weights(Forest f, std::vector<double> w);

} // namespace sdf
