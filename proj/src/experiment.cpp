#include "sdf/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sdf/error.hpp"
#include "sdf/rng.hpp"

namespace sdf {

std::string to_string(ExperimentMode m) {
    switch (m) {
    case ExperimentMode::gcf: return "gcf";
    case ExperimentMode::sdf: return "sdf";
    case ExperimentMode::both: return "both";
    }
    return "both";
}

ExperimentMode experiment_mode_from_string(const std::string& s) {
    if (s == "gcf") return ExperimentMode::gcf;
    if (s == "sdf") return ExperimentMode::sdf;
    if (s == "both") return ExperimentMode::both;
    throw ConfigError("unknown mode '" + s + "' (expected gcf, sdf or both)");
}

void ExperimentSpec::validate() const {
    if (repetitions < 1) {
        throw ConfigError("repetitions must be >= 1");
    }
    if (tree_counts.empty() || pair_counts.empty()) {
        throw ConfigError("experiment needs at least one T and one N value");
    }
    for (const auto t : tree_counts) {
        if (t < 1) throw ConfigError("every T must be >= 1");
    }
    for (const auto n : pair_counts) {
        if (n < 2) throw ConfigError("every N must be >= 2, got " + std::to_string(n));
    }
    if (lambdas.empty()) {
        throw ConfigError("experiment needs at least one lambda");
    }
    for (const auto l : lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be finite and >= 0");
    }
    if (!(balance >= 0.0 && balance <= 1.0)) {
        throw ConfigError("balance must lie in [0, 1]");
    }
    if (!(tau >= 0.0)) {
        throw ConfigError("tau must be >= 0");
    }
    base.validate();
}

const CellResult* AccuracyReport::find(std::size_t trees, std::size_t pairs, ExperimentMode mode) const {
    for (const auto& c : cells) {
        if (c.trees == trees && c.pairs == pairs && c.mode == mode) return &c;
    }
    return nullptr;
}

std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
    if (xs.empty()) {
        return {0.0, 0.0};
    }
    double sum = 0.0;
    for (const auto x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (const auto x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

namespace {

double best_validation(const SDFModel& m) {
    double best = 0.0;
    for (std::size_t q = 0; q < m.levels.size(); ++q) {
        best = std::max(best, m.metadata.validation_trace[q]);
    }
    return best;
}

double test_accuracy(const SDFModel& m, const PairDataset& test) {
    const auto verdicts = predict_batch(m, test);
    return accuracy(verdicts, test.pairs);
}

} // namespace

AccuracyReport run_experiment(const ExperimentSpec& spec, std::shared_ptr<const LabeledDataset> ds,
                              const ProgressFn& progress) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    const bool want_gcf = spec.mode != ExperimentMode::sdf;
    const bool want_sdf = spec.mode != ExperimentMode::gcf;

    AccuracyReport report;
    report.repetitions = spec.repetitions;
    for (const auto T : spec.tree_counts) {
        for (const auto N : spec.pair_counts) {
            CellResult gcf{T, N, ExperimentMode::gcf, {}, {}, 0.0, 0.0};
            CellResult sdf{T, N, ExperimentMode::sdf, {}, {}, 0.0, 0.0};
            for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
                // Pairs and cascade seeds depend only on (seed, N, rep), so every
                // mode and lambda within a repetition sees the same split and trees.
                const auto pair_seed = derive_seed(spec.seed, {stream::repetition, N, rep, 0});
                const auto pool = generate_pairs(ds, N + test_size_for(N), spec.balance, pair_seed);
                const auto [train, test] = split_pairs(pool, N, pair_seed);

                CascadeConfig cfg = spec.base;
                cfg.trees_per_forest = T;
                cfg.tau = spec.tau;
                cfg.seed = derive_seed(spec.seed, {stream::repetition, N, rep, 1});

                std::ostringstream line;
                line << "T=" << T << " N=" << N << " rep " << (rep + 1) << "/" << spec.repetitions;
                if (want_gcf) {
                    cfg.weighting = Weighting::uniform;
                    const auto acc = test_accuracy(train_cascade(train, cfg), test);
                    gcf.accuracies.push_back(acc);
                    line << " gcf=" << acc;
                }
                if (want_sdf) {
                    cfg.weighting = Weighting::optimized;
                    double best_val = -1.0;
                    double best_lambda = spec.lambdas.front();
                    double best_acc = 0.0;
                    for (const auto lambda : spec.lambdas) {
                        cfg.qp.lambda = lambda;
                        const auto model = train_cascade(train, cfg);
                        const auto val = best_validation(model);
                        if (val > best_val) {
                            best_val = val;
                            best_lambda = lambda;
                            best_acc = test_accuracy(model, test);
                        }
                    }
                    sdf.accuracies.push_back(best_acc);
                    sdf.chosen_lambdas.push_back(best_lambda);
                    line << " sdf=" << best_acc << " (lambda " << best_lambda << ")";
                }
                if (progress) progress(line.str());
            }
            for (auto* cell : {&gcf, &sdf}) {
                if (cell->accuracies.empty()) continue;
                std::tie(cell->mean, cell->stddev) = mean_stddev(cell->accuracies);
                report.cells.push_back(*cell);
            }
        }
    }
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

AccuracyReport run_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
    auto ds = std::make_shared<const LabeledDataset>(load_csv(spec.dataset, spec.label_column, spec.has_header));
    return run_experiment(spec, std::move(ds), progress);
}

nlohmann::json report_to_json(const AccuracyReport& r) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json cell = {{"trees", c.trees},         {"pairs", c.pairs}, {"mode", to_string(c.mode)},
                               {"accuracies", c.accuracies}, {"mean", c.mean},   {"stddev", c.stddev}};
        if (c.mode == ExperimentMode::sdf) {
            cell["chosen_lambdas"] = c.chosen_lambdas;
        }
        cells.push_back(cell);
    }
    return {{"repetitions", r.repetitions}, {"cells", cells}};
}

std::string report_table(const AccuracyReport& r) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%6s %6s %5s %8s %8s\n", "T", "N", "mode", "mean", "std");
    out << buf;
    for (const auto& c : r.cells) {
        std::snprintf(buf, sizeof buf, "%6zu %6zu %5s %8.3f %8.3f\n", c.trees, c.pairs, to_string(c.mode).c_str(),
                      c.mean, c.stddev);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "repetitions %zu, runtime %.1f s\n", r.repetitions, r.runtime_seconds);
    out << buf;
    return out.str();
}

} // namespace sdf
