#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdf/matrix.hpp"

namespace sdf {

enum class TreeKind { random_forest, complete_random };

std::string to_string(TreeKind kind);
TreeKind tree_kind_from_string(const std::string& s);

using ClassDistribution = std::array<double, 2>;

struct TreeConfig {
    TreeKind kind = TreeKind::random_forest;
    /// Features examined per split (random_forest only); 0 selects ceil(sqrt(width)).
    std::size_t mtry = 0;
    std::size_t min_leaf = 1;
    std::optional<std::size_t> max_depth;
    bool bootstrap = true;
    /// (n_c + 1) / (n + 2) leaf estimates instead of raw proportions.
    bool laplace = false;

    /// Bootstrap on for random-forest trees, off for completely-random trees.
    static TreeConfig defaults(TreeKind kind);
    std::size_t effective_mtry(std::size_t width) const;
    void validate(std::size_t width) const;

    friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

/// Internal nodes have feature >= 0 and both children; leaves have feature == -1
/// and a class distribution.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    ClassDistribution dist{0.0, 0.0};

    bool is_leaf() const { return feature < 0; }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
public:
    /// Validates node structure and leaf distributions; throws InvariantError.
    DecisionTree(std::vector<TreeNode> nodes, TreeConfig config, std::uint64_t seed, std::size_t width);

    /// Routes x to a leaf (left iff x[feature] <= threshold).
    std::size_t leaf_index(std::span<const double> x) const;
    const ClassDistribution& predict(std::span<const double> x) const { return nodes_[leaf_index(x)].dist; }

    std::span<const TreeNode> nodes() const { return nodes_; }
    const TreeConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t width() const { return width_; }
    std::size_t depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
    TreeConfig config_;
    std::uint64_t seed_ = 0;
    std::size_t width_ = 0;
};

DecisionTree fit_tree(const Matrix& X, std::span<const int> y, const TreeConfig& cfg, std::uint64_t seed);

/// Fits on the subset `rows` of X (duplicates allowed, bootstrap is drawn from it).
DecisionTree fit_tree(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows,
                      const TreeConfig& cfg, std::uint64_t seed);

/// Width-checked leaf lookup; throws DataError on a width mismatch.
ClassDistribution predict_distribution(const DecisionTree& tree, std::span<const double> x);

} // namespace sdf
