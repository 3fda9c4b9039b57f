#include "sdf/weightopt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sdf/error.hpp"

namespace sdf {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kMinStep = 1e-30;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += a[k] * b[k];
    }
    return s;
}

void check_width(const PMatrix& P, std::span<const double> w, const char* who) {
    if (w.size() != P.trees()) {
        throw DataError(std::string(who) + ": " + std::to_string(w.size()) + " weights for " +
                        std::to_string(P.trees()) + " P columns");
    }
}

} // namespace

void QPConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("qp lambda must be a finite value >= 0");
    }
    if (!(tol > 0.0)) {
        throw ConfigError("qp tol must be > 0");
    }
    if (max_iter < 1) {
        throw ConfigError("qp max_iter must be >= 1");
    }
    if (!std::isfinite(z_multiplier)) {
        throw ConfigError("qp z_multiplier must be finite");
    }
}

PMatrix build_p_matrix(const ProbMatrix& probs, std::span<const int> y, double z_multiplier) {
    if (probs.rows() != y.size()) {
        throw DataError("build_p_matrix: " + std::to_string(probs.rows()) + " probability rows for " +
                        std::to_string(y.size()) + " labels");
    }
    PMatrix P{Matrix(probs.rows(), probs.trees())};
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const double z = y[r] == 0 ? -z_multiplier : z_multiplier;
        for (std::size_t t = 0; t < probs.trees(); ++t) {
            const double p0 = probs.p0(r, t);
            P.entries(r, t) = z * (p0 - (1.0 - p0));
        }
    }
    return P;
}

double objective(const PMatrix& P, std::span<const double> w, double lambda) {
    check_width(P, w, "objective");
    double hinge = 0.0;
    for (std::size_t r = 0; r < P.rows(); ++r) {
        const double m = dot(P.entries.row(r), w);
        if (m > 0.0) {
            hinge += m * m;
        }
    }
    return hinge + lambda * dot(w, w);
}

std::vector<double> objective_gradient(const PMatrix& P, std::span<const double> w, double lambda) {
    check_width(P, w, "objective_gradient");
    std::vector<double> g(w.size());
    for (std::size_t t = 0; t < w.size(); ++t) {
        g[t] = 2.0 * lambda * w[t];
    }
    for (std::size_t r = 0; r < P.rows(); ++r) {
        const auto row = P.entries.row(r);
        const double m = dot(row, w);
        if (m > 0.0) {
            for (std::size_t t = 0; t < w.size(); ++t) {
                g[t] += 2.0 * m * row[t];
            }
        }
    }
    return g;
}

std::vector<double> project_simplex(std::span<const double> v) {
    if (v.empty()) {
        throw DataError("project_simplex: empty vector");
    }
    for (const double x : v) {
        if (!std::isfinite(x)) {
            throw DataError("project_simplex: non-finite input");
        }
    }
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumsum += u[k];
        const double candidate = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - candidate > 0.0) {
            theta = candidate;
        }
    }
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[k] = std::max(v[k] - theta, 0.0);
    }
    return out;
}

SolveResult solve_weights(const PMatrix& P, const QPConfig& cfg, const WeightVector& w0) {
    cfg.validate();
    check_width(P, w0.values(), "solve_weights");

    std::vector<double> w(w0.values().begin(), w0.values().end());
    double f = objective(P, w, cfg.lambda);
    if (!std::isfinite(f)) {
        throw DataError("solve_weights: non-finite objective at w0 (bad P matrix)");
    }

    SolveResult result;
    result.trace.push_back(f);
    std::vector<double> trial(w.size());
    std::vector<double> candidate;
    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        const auto g = objective_gradient(P, w, cfg.lambda);
        for (const double gt : g) {
            if (!std::isfinite(gt)) {
                throw DataError("solve_weights: non-finite gradient (bad P matrix)");
            }
        }

        double step = 1.0;
        double f_new = f;
        bool accepted = false;
        while (step >= kMinStep) {
            for (std::size_t t = 0; t < w.size(); ++t) {
                trial[t] = w[t] - step * g[t];
            }
            candidate = project_simplex(trial);
            double decrease = 0.0;
            for (std::size_t t = 0; t < w.size(); ++t) {
                decrease += g[t] * (candidate[t] - w[t]);
            }
            f_new = objective(P, candidate, cfg.lambda);
            if (f_new <= f + kArmijo * decrease && f_new <= f) {
                accepted = true;
                break;
            }
            step *= kShrink;
        }
        ++result.iterations;
        if (!accepted) {
            // No representable step decreases J: w is stationary to machine precision.
            result.converged = true;
            break;
        }

        double change = 0.0;
        for (std::size_t t = 0; t < w.size(); ++t) {
            change = std::max(change, std::abs(candidate[t] - w[t]));
        }
        w.swap(candidate);
        f = f_new;
        result.trace.push_back(f);
        if (change < cfg.tol) {
            result.converged = true;
            break;
        }
    }
    result.weights = WeightVector::from_iterate(std::move(w));
    return result;
}

SolveResult solve_weights(const PMatrix& P, const QPConfig& cfg) {
    return solve_weights(P, cfg, WeightVector::uniform(P.trees()));
}

std::vector<SolveResult> solve_all(std::span<const ProbMatrix> probs, std::span<const int> y, const QPConfig& cfg) {
    std::vector<SolveResult> out;
    out.reserve(probs.size());
    for (const auto& pm : probs) {
        out.push_back(solve_weights(build_p_matrix(pm, y, cfg.z_multiplier), cfg));
    }
    return out;
}

} // namespace sdf
