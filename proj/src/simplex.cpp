#include "sdf/simplex.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sdf/error.hpp"

namespace sdf {

bool on_simplex(std::span<const double> w, double tol) {
    if (w.empty()) {
        return false;
    }
    double sum = 0.0;
    for (const double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            return false;
        }
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
    if (!on_simplex(w_)) {
        const double sum = std::accumulate(w_.begin(), w_.end(), 0.0);
        throw InvariantError("simplex violation: weights of length " + std::to_string(w_.size()) + " sum to " +
                             std::to_string(sum) + " or contain a negative entry");
    }
}

WeightVector WeightVector::uniform(std::size_t n) {
    if (n == 0) {
        throw InvariantError("simplex violation: empty weight vector");
    }
    return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

WeightVector WeightVector::from_iterate(std::vector<double> w) {
    double sum = 0.0;
    for (double& v : w) {
        if (v < 0.0 && v >= -1e-12) {
            v = 0.0;
        }
        sum += v;
    }
    if (sum > 0.0 && sum != 1.0) {
        for (double& v : w) {
            v /= sum;
        }
    }
    return WeightVector(std::move(w));
}

bool WeightVector::is_uniform() const {
    if (w_.empty()) {
        return false;
    }
    const double u = 1.0 / static_cast<double>(w_.size());
    for (const double v : w_) {
        if (v != u) {
            return false;
        }
    }
    return true;
}

} // namespace sdf
