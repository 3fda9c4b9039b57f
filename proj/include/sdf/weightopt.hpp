#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdf/forest.hpp"
#include "sdf/matrix.hpp"
#include "sdf/simplex.hpp"

namespace sdf {

/// Signed tree margins feeding the weight QP: entry (r, t) is
/// z_r * (p0 - p1) of tree t on training pair r, with z_r = -z for similar
/// pairs and +z for dissimilar ones. A positive row product P_r . w means the
/// weighted forest leans toward the wrong class for pair r.
struct PMatrix {
    Matrix entries;

    std::size_t rows() const { return entries.rows(); }
    std::size_t trees() const { return entries.cols(); }
};

struct QPConfig {
    double lambda = 0.01;
    std::size_t max_iter = 10000;
    /// Stop once the infinity-norm change between iterates drops below tol.
    double tol = 1e-8;
    /// Magnitude of z; the cascade sets it per level from the z schedule.
    double z_multiplier = 1.0;

    void validate() const;

    friend bool operator==(const QPConfig&, const QPConfig&) = default;
};

PMatrix build_p_matrix(const ProbMatrix& probs, std::span<const int> y, double z_multiplier);

/// J(w) = sum_r max(0, P_r . w)^2 + lambda * |w|^2, the squared-hinge form of
/// the per-forest QP (the slack variables are eliminated exactly).
double objective(const PMatrix& P, std::span<const double> w, double lambda);

/// dJ/dw = 2 sum_r max(0, P_r . w) P_r + 2 lambda w.
std::vector<double> objective_gradient(const PMatrix& P, std::span<const double> w, double lambda);

/// Euclidean projection onto the unit simplex (sort and threshold).
std::vector<double> project_simplex(std::span<const double> v);

struct SolveResult {
    WeightVector weights;
    /// Objective at w0 followed by the objective after every accepted step.
    std::vector<double> trace;
    std::size_t iterations = 0;
    bool converged = false;

    double initial_objective() const { return trace.front(); }
    double final_objective() const { return trace.back(); }
};

/// Projected gradient descent with Armijo backtracking (step 1, halving,
/// sufficient decrease 1e-4) from w0.
SolveResult solve_weights(const PMatrix& P, const QPConfig& cfg, const WeightVector& w0);
/// Starts from uniform weights.
SolveResult solve_weights(const PMatrix& P, const QPConfig& cfg);

/// One independent QP per forest; the joint problem over all forests of a
/// level decomposes into these because no variable or constraint is shared.
std::vector<SolveResult> solve_all(std::span<const ProbMatrix> probs, std::span<const int> y, const QPConfig& cfg);

} // namespace sdf
