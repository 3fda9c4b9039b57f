#include "sdf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sdf/error.hpp"
#include "sdf/rng.hpp"

namespace sdf {

std::string to_string(TreeKind kind) {
    return kind == TreeKind::random_forest ? "random_forest" : "complete_random";
}

TreeKind tree_kind_from_string(const std::string& s) {
    if (s == "random_forest") {
        return TreeKind::random_forest;
    }
    if (s == "complete_random") {
        return TreeKind::complete_random;
    }
    throw ConfigError("unknown tree kind \"" + s + "\"");
}

TreeConfig TreeConfig::defaults(TreeKind kind) {
    TreeConfig cfg;
    cfg.kind = kind;
    cfg.bootstrap = kind == TreeKind::random_forest;
    return cfg;
}

std::size_t TreeConfig::effective_mtry(std::size_t width) const {
    if (mtry != 0) {
        return mtry;
    }
    const auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(width))));
    return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(width, 1));
}

void TreeConfig::validate(std::size_t width) const {
    if (min_leaf < 1) {
        throw ConfigError("tree min_leaf must be >= 1");
    }
    if (kind == TreeKind::random_forest && mtry > width) {
        throw ConfigError("tree mtry " + std::to_string(mtry) + " exceeds input width " + std::to_string(width));
    }
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, TreeConfig config, std::uint64_t seed, std::size_t width)
    : nodes_(std::move(nodes)), config_(config), seed_(seed), width_(width) {
    if (nodes_.empty()) {
        throw InvariantError("decision tree has no nodes");
    }
    std::vector<int> parents(nodes_.size(), 0);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        const auto& node = nodes_[k];
        if (node.is_leaf()) {
            const auto [p0, p1] = node.dist;
            if (!(p0 >= 0.0 && p1 >= 0.0) || std::abs(p0 + p1 - 1.0) > 1e-12) {
                throw InvariantError("leaf " + std::to_string(k) + " distribution (" + std::to_string(p0) + ", " +
                                     std::to_string(p1) + ") is not a probability vector");
            }
            continue;
        }
        if (static_cast<std::size_t>(node.feature) >= width_) {
            throw InvariantError("node " + std::to_string(k) + " splits on feature " + std::to_string(node.feature) +
                                 " outside width " + std::to_string(width_));
        }
        if (!std::isfinite(node.threshold)) {
            throw InvariantError("node " + std::to_string(k) + " has a non-finite threshold");
        }
        for (const auto child : {node.left, node.right}) {
            if (child <= static_cast<std::int32_t>(k) || static_cast<std::size_t>(child) >= nodes_.size()) {
                throw InvariantError("node " + std::to_string(k) + " has invalid child " + std::to_string(child));
            }
            ++parents[static_cast<std::size_t>(child)];
        }
    }
    for (std::size_t k = 1; k < nodes_.size(); ++k) {
        if (parents[k] != 1) {
            throw InvariantError("node " + std::to_string(k) + " is referenced " + std::to_string(parents[k]) +
                                 " times; expected exactly one parent");
        }
    }
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes_[k].is_leaf()) {
        const auto& node = nodes_[k];
        k = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                 : node.right);
    }
    return k;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> level(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        deepest = std::max(deepest, level[k]);
        if (!nodes_[k].is_leaf()) {
            level[static_cast<std::size_t>(nodes_[k].left)] = level[k] + 1;
            level[static_cast<std::size_t>(nodes_[k].right)] = level[k] + 1;
        }
    }
    return deepest;
}

namespace {

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const int> y, const TreeConfig& cfg, std::uint64_t seed)
        : X_(X), y_(y), cfg_(cfg), rng_(seed), width_(X.cols()), mtry_(cfg.effective_mtry(X.cols())) {
        features_.resize(width_);
    }

    std::vector<TreeNode> build(std::span<const std::size_t> rows) {
        if (cfg_.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
            idx_.resize(rows.size());
            for (auto& r : idx_) {
                r = rows[pick(rng_)];
            }
        } else {
            idx_.assign(rows.begin(), rows.end());
        }

        struct Task {
            std::size_t node;
            std::size_t begin;
            std::size_t end;
            std::size_t depth;
        };
        nodes_.clear();
        nodes_.emplace_back();
        std::vector<Task> stack{{0, 0, idx_.size(), 0}};
        while (!stack.empty()) {
            const Task task = stack.back();
            stack.pop_back();

            std::size_t n1 = 0;
            for (std::size_t k = task.begin; k < task.end; ++k) {
                n1 += static_cast<std::size_t>(y_[idx_[k]]);
            }
            const std::size_t n = task.end - task.begin;
            const std::size_t n0 = n - n1;

            const bool pure = n0 == 0 || n1 == 0;
            const bool too_small = n < 2 * cfg_.min_leaf;
            const bool at_depth = cfg_.max_depth && task.depth >= *cfg_.max_depth;
            std::optional<Split> split;
            if (!pure && !too_small && !at_depth) {
                split = cfg_.kind == TreeKind::random_forest ? best_gini_split(task.begin, task.end)
                                                             : random_split(task.begin, task.end);
            }
            if (!split) {
                make_leaf(task.node, n0, n1);
                continue;
            }

            const auto f = split->feature;
            const auto thr = split->threshold;
            const auto mid = std::partition(idx_.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                            idx_.begin() + static_cast<std::ptrdiff_t>(task.end),
                                            [&](std::size_t r) { return X_(r, f) <= thr; });
            const auto cut = static_cast<std::size_t>(mid - idx_.begin());

            const auto left = nodes_.size();
            const auto right = left + 1;
            nodes_.emplace_back();
            nodes_.emplace_back();
            auto& node = nodes_[task.node];
            node.feature = static_cast<std::int32_t>(f);
            node.threshold = thr;
            node.left = static_cast<std::int32_t>(left);
            node.right = static_cast<std::int32_t>(right);
            stack.push_back({right, cut, task.end, task.depth + 1});
            stack.push_back({left, task.begin, cut, task.depth + 1});
        }
        return std::move(nodes_);
    }

private:
    void make_leaf(std::size_t node, std::size_t n0, std::size_t n1) {
        const auto n = static_cast<double>(n0 + n1);
        auto& leaf = nodes_[node];
        if (cfg_.laplace) {
            leaf.dist = {(static_cast<double>(n0) + 1.0) / (n + 2.0), (static_cast<double>(n1) + 1.0) / (n + 2.0)};
        } else {
            leaf.dist = {static_cast<double>(n0) / n, static_cast<double>(n1) / n};
        }
    }

    // Examines features in random order until mtry non-constant ones have been
    // scored; constant features do not count toward mtry.
    std::optional<Split> best_gini_split(std::size_t begin, std::size_t end) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        const std::size_t n = end - begin;
        double best_score = -1.0;
        std::optional<Split> best;
        std::size_t scored = 0;
        for (std::size_t k = 0; k < width_ && scored < mtry_; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, width_ - 1);
            std::swap(features_[k], features_[pick(rng_)]);
            const auto f = features_[k];

            values_.clear();
            for (std::size_t r = begin; r < end; ++r) {
                values_.emplace_back(X_(idx_[r], f), y_[idx_[r]]);
            }
            std::sort(values_.begin(), values_.end());
            if (values_.front().first == values_.back().first) {
                continue;
            }
            ++scored;

            std::size_t total1 = 0;
            for (const auto& v : values_) {
                total1 += static_cast<std::size_t>(v.second);
            }
            const std::size_t total0 = n - total1;
            std::size_t l0 = 0;
            std::size_t l1 = 0;
            for (std::size_t p = 0; p + 1 < n; ++p) {
                (values_[p].second == 0 ? l0 : l1) += 1;
                if (values_[p].first == values_[p + 1].first) {
                    continue;
                }
                const std::size_t nl = p + 1;
                const std::size_t nr = n - nl;
                if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) {
                    continue;
                }
                const double r0 = static_cast<double>(total0 - l0);
                const double r1 = static_cast<double>(total1 - l1);
                const double a0 = static_cast<double>(l0);
                const double a1 = static_cast<double>(l1);
                // Minimizing weighted Gini == maximizing sum of squared counts over size.
                const double score = (a0 * a0 + a1 * a1) / static_cast<double>(nl) + (r0 * r0 + r1 * r1) / static_cast<double>(nr);
                if (score > best_score) {
                    best_score = score;
                    const double lo = values_[p].first;
                    const double hi = values_[p + 1].first;
                    double mid = 0.5 * (lo + hi);
                    if (!(mid < hi)) {
                        mid = lo;
                    }
                    best = Split{f, mid};
                }
            }
        }
        return best;
    }

    // One feature drawn uniformly among those with spread in the node, threshold
    // uniform in (min, max).
    std::optional<Split> random_split(std::size_t begin, std::size_t end) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        std::size_t remaining = width_;
        while (remaining > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
            const auto slot = pick(rng_);
            const auto f = features_[slot];
            double lo = X_(idx_[begin], f);
            double hi = lo;
            for (std::size_t r = begin + 1; r < end; ++r) {
                const double v = X_(idx_[r], f);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo < hi) {
                std::uniform_real_distribution<double> draw(lo, hi);
                double thr = draw(rng_);
                if (!(thr < hi)) {
                    thr = lo;
                }
                return Split{f, thr};
            }
            std::swap(features_[slot], features_[remaining - 1]);
            --remaining;
        }
        return std::nullopt;
    }

    const Matrix& X_;
    std::span<const int> y_;
    const TreeConfig& cfg_;
    Rng rng_;
    std::size_t width_;
    std::size_t mtry_;
    std::vector<std::size_t> idx_;
    std::vector<std::size_t> features_;
    std::vector<std::pair<double, int>> values_;
    std::vector<TreeNode> nodes_;
};

} // namespace

DecisionTree fit_tree(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows,
                      const TreeConfig& cfg, std::uint64_t seed) {
    if (X.empty() || X.cols() == 0 || rows.empty()) {
        throw DataError("fit_tree: empty input");
    }
    if (y.size() != X.rows()) {
        throw DataError("fit_tree: " + std::to_string(y.size()) + " labels for " + std::to_string(X.rows()) + " rows");
    }
    for (const auto r : rows) {
        if (r >= X.rows()) {
            throw DataError("fit_tree: row index " + std::to_string(r) + " out of range");
        }
        if (y[r] != 0 && y[r] != 1) {
            throw DataError("fit_tree: label " + std::to_string(y[r]) + " at row " + std::to_string(r) +
                            " is outside {0, 1}");
        }
    }
    cfg.validate(X.cols());
    TreeBuilder builder(X, y, cfg, seed);
    return DecisionTree(builder.build(rows), cfg, seed, X.cols());
}

DecisionTree fit_tree(const Matrix& X, std::span<const int> y, const TreeConfig& cfg, std::uint64_t seed) {
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_tree(X, y, rows, cfg, seed);
}

ClassDistribution predict_distribution(const DecisionTree& tree, std::span<const double> x) {
    if (x.size() != tree.width()) {
        throw DataError("predict_distribution: input width " + std::to_string(x.size()) + ", tree expects " +
                        std::to_string(tree.width()));
    }
    return tree.predict(x);
}

} // namespace sdf
