#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sdf/data.hpp"
#include "sdf/forest.hpp"

namespace sdf {

enum class ScanShape { vector_1d, image_2d };

/// Paired multi-grained scanning. Window sizes are floor(d / k) for each
/// divisor k of a 1-D vector of length d, or floor(side / k) for square
/// windows over a height x width image (side = min(height, width)).
struct ScanConfig {
    bool enabled = false;
    ScanShape shape = ScanShape::vector_1d;
    std::size_t height = 0;
    std::size_t width = 0;
    /// Empty selects {16, 9, 4} for vectors and {4, 3, 2} for images.
    std::vector<std::size_t> window_divisors;
    std::size_t trees_per_forest = 30;

    std::vector<std::size_t> divisors() const;
    void validate(std::size_t d) const;

    friend bool operator==(const ScanConfig&, const ScanConfig&) = default;
};

struct WindowPlan {
    /// Distinct retained sizes, in divisor order.
    std::vector<std::size_t> sizes;
    /// Distinct floored sizes dropped for being < 2 or larger than the input.
    std::vector<std::size_t> skipped;
};

WindowPlan plan_windows(const ScanConfig& cfg, std::size_t d);

/// Number of window positions (stride 1) for one window size.
std::size_t window_positions(const ScanConfig& cfg, std::size_t d, std::size_t size);

/// The same window slice taken from both members of a pair: a's values
/// followed by b's. For vectors `row` is always 0 and `col` is the offset.
struct WindowPair {
    std::size_t row = 0;
    std::size_t col = 0;
    std::vector<double> values;
};

struct WindowGroup {
    std::size_t size = 0;
    std::vector<WindowPair> windows;
};

std::vector<WindowGroup> extract_window_pairs(const Sample& a, const Sample& b, const ScanConfig& cfg);

/// One random forest and one completely-random forest per window size, with
/// uniform weights. A disabled config yields the identity transform.
struct Scanners {
    ScanConfig config;
    std::size_t d = 0;
    std::vector<std::size_t> sizes;
    /// forests[s] = {random_forest, complete_random} for sizes[s].
    std::vector<std::vector<Forest>> forests;

    bool enabled() const { return config.enabled; }
    /// Width of the scanned block: sum over sizes of positions * 2 forests * 2 classes.
    std::size_t scanned_width() const;
    void validate() const;

    friend bool operator==(const Scanners&, const Scanners&) = default;
};

Scanners fit_scanners(const PairDataset& train, const ScanConfig& cfg, std::uint64_t seed);

/// Level-1 cascade input: concatenate_pair(a, b) followed by the class vectors
/// of every (size, position, forest), in that nesting order.
std::vector<double> transform_pair(const Sample& a, const Sample& b, const Scanners& scanners);

} // namespace sdf
