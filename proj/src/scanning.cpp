#include "sdf/scanning.hpp"

#include <algorithm>
#include <iostream>
#include <string>

#include "sdf/error.hpp"
#include "sdf/rng.hpp"

namespace sdf {

namespace {

std::size_t scan_extent(const ScanConfig& cfg, std::size_t d) {
    return cfg.shape == ScanShape::vector_1d ? d : std::min(cfg.height, cfg.width);
}

void check_shape(const ScanConfig& cfg, const Sample& s) {
    if (cfg.shape == ScanShape::image_2d && s.features.size() != cfg.height * cfg.width) {
        throw DataError("scanning: sample has " + std::to_string(s.features.size()) + " features, expected a " +
                        std::to_string(cfg.height) + "x" + std::to_string(cfg.width) + " image");
    }
}

} // namespace

std::vector<std::size_t> ScanConfig::divisors() const {
    if (!window_divisors.empty()) {
        return window_divisors;
    }
    if (shape == ScanShape::vector_1d) {
        return {16, 9, 4};
    }
    return {4, 3, 2};
}

void ScanConfig::validate(std::size_t d) const {
    if (!enabled) {
        return;
    }
    for (const auto k : window_divisors) {
        if (k == 0) {
            throw ConfigError("scanning window divisors must be >= 1");
        }
    }
    if (trees_per_forest < 1) {
        throw ConfigError("scanning trees_per_forest must be >= 1");
    }
    if (shape == ScanShape::image_2d && (height == 0 || width == 0 || height * width != d)) {
        throw ConfigError("scanning image shape " + std::to_string(height) + "x" + std::to_string(width) +
                          " does not match " + std::to_string(d) + " features");
    }
}

WindowPlan plan_windows(const ScanConfig& cfg, std::size_t d) {
    WindowPlan plan;
    const auto extent = scan_extent(cfg, d);
    for (const auto k : cfg.divisors()) {
        const auto size = extent / k;
        if (size < 2 || size > extent) {
            if (std::find(plan.skipped.begin(), plan.skipped.end(), size) == plan.skipped.end()) {
                plan.skipped.push_back(size);
            }
        } else if (std::find(plan.sizes.begin(), plan.sizes.end(), size) == plan.sizes.end()) {
            plan.sizes.push_back(size);
        }
    }
    return plan;
}

std::size_t window_positions(const ScanConfig& cfg, std::size_t d, std::size_t size) {
    if (cfg.shape == ScanShape::vector_1d) {
        return size > d ? 0 : d - size + 1;
    }
    if (size > cfg.height || size > cfg.width) {
        return 0;
    }
    return (cfg.height - size + 1) * (cfg.width - size + 1);
}

std::vector<WindowGroup> extract_window_pairs(const Sample& a, const Sample& b, const ScanConfig& cfg) {
    if (a.features.size() != b.features.size()) {
        throw DataError("extract_window_pairs: pair members differ in length");
    }
    check_shape(cfg, a);
    const auto d = a.features.size();
    const auto plan = plan_windows(cfg, d);
    if (plan.sizes.empty()) {
        throw DataError("extract_window_pairs: every window size is degenerate for " + std::to_string(d) + " features");
    }

    std::vector<WindowGroup> groups;
    for (const auto size : plan.sizes) {
        WindowGroup group{size, {}};
        if (cfg.shape == ScanShape::vector_1d) {
            for (std::size_t off = 0; off + size <= d; ++off) {
                WindowPair wp{0, off, {}};
                wp.values.reserve(2 * size);
                wp.values.insert(wp.values.end(), a.features.begin() + static_cast<std::ptrdiff_t>(off),
                                 a.features.begin() + static_cast<std::ptrdiff_t>(off + size));
                wp.values.insert(wp.values.end(), b.features.begin() + static_cast<std::ptrdiff_t>(off),
                                 b.features.begin() + static_cast<std::ptrdiff_t>(off + size));
                group.windows.push_back(std::move(wp));
            }
        } else {
            for (std::size_t r = 0; r + size <= cfg.height; ++r) {
                for (std::size_t c = 0; c + size <= cfg.width; ++c) {
                    WindowPair wp{r, c, {}};
                    wp.values.reserve(2 * size * size);
                    for (const auto* s : {&a, &b}) {
                        for (std::size_t dr = 0; dr < size; ++dr) {
                            const auto base = (r + dr) * cfg.width + c;
                            wp.values.insert(wp.values.end(), s->features.begin() + static_cast<std::ptrdiff_t>(base),
                                             s->features.begin() + static_cast<std::ptrdiff_t>(base + size));
                        }
                    }
                    group.windows.push_back(std::move(wp));
                }
            }
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

std::size_t Scanners::scanned_width() const {
    if (!config.enabled) {
        return 0;
    }
    std::size_t width = 0;
    for (const auto size : sizes) {
        width += window_positions(config, d, size) * 2 * 2;
    }
    return width;
}

void Scanners::validate() const {
    if (!config.enabled) {
        if (!sizes.empty() || !forests.empty()) {
            throw InvariantError("disabled scanning block carries forests");
        }
        return;
    }
    config.validate(d);
    if (sizes != plan_windows(config, d).sizes || forests.size() != sizes.size()) {
        throw InvariantError("scanning window sizes do not match the scanning config");
    }
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        const auto expected_width =
            config.shape == ScanShape::vector_1d ? 2 * sizes[s] : 2 * sizes[s] * sizes[s];
        if (forests[s].size() != 2) {
            throw InvariantError("scanning size " + std::to_string(sizes[s]) + " needs 2 forests");
        }
        for (const auto& f : forests[s]) {
            if (f.width() != expected_width) {
                throw InvariantError("scanning forest for size " + std::to_string(sizes[s]) + " has width " +
                                     std::to_string(f.width()) + ", expected " + std::to_string(expected_width));
            }
            if (!f.weights().is_uniform()) {
                throw InvariantError("scanning forests must carry uniform weights");
            }
        }
    }
}

Scanners fit_scanners(const PairDataset& train, const ScanConfig& cfg, std::uint64_t seed) {
    Scanners out;
    out.config = cfg;
    if (!cfg.enabled) {
        return out;
    }
    if (!train.source || train.pairs.empty()) {
        throw DataError("fit_scanners: no training pairs");
    }
    const auto& samples = train.source->samples;
    out.d = train.source->d;
    cfg.validate(out.d);

    const auto plan = plan_windows(cfg, out.d);
    for (const auto size : plan.skipped) {
        std::clog << "warning: scanning window size " << size << " skipped (must be in [2, "
                  << scan_extent(cfg, out.d) << "])\n";
    }
    if (plan.sizes.empty()) {
        throw DataError("fit_scanners: every window size is degenerate for " + std::to_string(out.d) + " features");
    }
    out.sizes = plan.sizes;

    std::vector<Matrix> X(plan.sizes.size());
    std::vector<std::vector<int>> y(plan.sizes.size());
    for (const auto& p : train.pairs) {
        const auto groups = extract_window_pairs(samples[p.i], samples[p.j], cfg);
        for (std::size_t s = 0; s < groups.size(); ++s) {
            for (const auto& wp : groups[s].windows) {
                X[s].push_row(wp.values);
                y[s].push_back(p.y);
            }
        }
    }

    for (std::size_t s = 0; s < plan.sizes.size(); ++s) {
        std::vector<Forest> pair_of_forests;
        std::uint64_t k = 0;
        for (const auto kind : {TreeKind::random_forest, TreeKind::complete_random}) {
            pair_of_forests.push_back(fit_forest(X[s], y[s], TreeConfig::defaults(kind), cfg.trees_per_forest,
                                                 derive_seed(seed, {stream::scanning, s, k++})));
        }
        out.forests.push_back(std::move(pair_of_forests));
    }
    return out;
}

std::vector<double> transform_pair(const Sample& a, const Sample& b, const Scanners& scanners) {
    auto out = concatenate_pair(a, b);
    if (!scanners.enabled()) {
        return out;
    }
    if (a.features.size() != scanners.d) {
        throw DataError("transform_pair: sample has " + std::to_string(a.features.size()) +
                        " features, scanners were fitted on " + std::to_string(scanners.d));
    }
    const auto groups = extract_window_pairs(a, b, scanners.config);
    out.reserve(out.size() + scanners.scanned_width());
    for (std::size_t s = 0; s < groups.size(); ++s) {
        for (const auto& wp : groups[s].windows) {
            for (const auto& forest : scanners.forests[s]) {
                const auto v = forest.mean_class_vector(wp.values);
                out.push_back(v[0]);
                out.push_back(v[1]);
            }
        }
    }
    return out;
}

} // namespace sdf
