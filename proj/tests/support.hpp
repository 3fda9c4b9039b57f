#pragma once

// Fixtures and independent oracles shared by the unit and acceptance suites.
// Nothing here calls the library code it is used to check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sdf/data.hpp"
#include "sdf/matrix.hpp"

namespace sdf::testing {

/// Gaussian blobs: class c is centred at c * separation on every axis.
inline std::shared_ptr<const LabeledDataset> blobs(std::size_t per_class, std::size_t classes, std::size_t d,
                                                   double separation, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto ds = std::make_shared<LabeledDataset>();
    ds->d = d;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t r = 0; r < per_class; ++r) {
            Sample s;
            s.id = ds->samples.size();
            for (std::size_t k = 0; k < d; ++k) {
                s.features.push_back(static_cast<double>(c) * separation + noise(rng));
            }
            ds->samples.push_back(std::move(s));
            ds->labels.push_back("c" + std::to_string(c));
        }
    }
    return ds;
}

/// sum_r max(0, P_r . w)^2 + lambda |w|^2, written out directly.
inline double oracle_objective(const std::vector<std::vector<double>>& P, const std::vector<double>& w, double lambda) {
    double total = 0.0;
    for (const auto& row : P) {
        double m = 0.0;
        for (std::size_t t = 0; t < w.size(); ++t) m += row[t] * w[t];
        if (m > 0.0) total += m * m;
    }
    for (const double x : w) total += lambda * x * x;
    return total;
}

struct GridMin {
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> argmin;
};

/// Exhaustive search over the simplex lattice with spacing `step`, for T = 2 or 3.
inline GridMin grid_oracle(const std::vector<std::vector<double>>& P, double lambda, double step) {
    GridMin best;
    const std::size_t T = P.empty() ? 0 : P.front().size();
    const auto n = static_cast<long>(std::llround(1.0 / step));
    auto consider = [&](std::vector<double> w) {
        const double v = oracle_objective(P, w, lambda);
        if (v < best.value) {
            best.value = v;
            best.argmin = std::move(w);
        }
    };
    if (T == 2) {
        for (long a = 0; a <= n; ++a) {
            const double w0 = static_cast<double>(a) / static_cast<double>(n);
            consider({w0, 1.0 - w0});
        }
    } else if (T == 3) {
        for (long a = 0; a <= n; ++a) {
            for (long b = 0; a + b <= n; ++b) {
                const double w0 = static_cast<double>(a) / static_cast<double>(n);
                const double w1 = static_cast<double>(b) / static_cast<double>(n);
                consider({w0, w1, 1.0 - w0 - w1});
            }
        }
    }
    return best;
}

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    for (const auto& r : rows) m.push_row(r);
    return m;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("sdf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace sdf::testing
