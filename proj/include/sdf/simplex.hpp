#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdf {

inline constexpr double kSimplexTolerance = 1e-9;

/// True when every entry is >= 0 and the entries sum to 1 within `tol`.
bool on_simplex(std::span<const double> w, double tol = kSimplexTolerance);

/// Tree weights of one forest, always a point of the unit simplex.
class WeightVector {
public:
    WeightVector() = default;

    /// Throws InvariantError unless `w` is nonempty and simplex-feasible.
    explicit WeightVector(std::vector<double> w);

    static WeightVector uniform(std::size_t n);

    /// Clamps entries in [-1e-12, 0) to zero and renormalizes before the
    /// feasibility check; used when emitting solver iterates.
    static WeightVector from_iterate(std::vector<double> w);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t t) const { return w_[t]; }
    std::span<const double> values() const { return w_; }
    bool is_uniform() const;

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    std::vector<double> w_;
};

} // namespace sdf
