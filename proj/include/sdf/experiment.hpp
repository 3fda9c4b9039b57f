#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdf/cascade.hpp"
#include "sdf/data.hpp"

namespace sdf {

enum class ExperimentMode { gcf, sdf, both };
std::string to_string(ExperimentMode m);
ExperimentMode experiment_mode_from_string(const std::string& s);

struct ExperimentSpec {
    std::filesystem::path dataset;
    LabelColumn label_column;
    bool has_header = true;
    std::vector<std::size_t> tree_counts{100};
    std::vector<std::size_t> pair_counts{100, 500, 1000, 2000};
    std::size_t repetitions = 20;
    std::uint64_t seed = 0;
    /// SDF picks, per repetition, the lambda whose model scores best on its
    /// own validation holdout (ties go to the earlier entry).
    std::vector<double> lambdas{0.01};
    ExperimentMode mode = ExperimentMode::both;
    double tau = 0.0;
    double balance = 0.5;
    /// trees_per_forest, qp.lambda, weighting, tau and seed are set per run.
    CascadeConfig base;

    void validate() const;
};

struct CellResult {
    std::size_t trees = 0;
    std::size_t pairs = 0;
    ExperimentMode mode = ExperimentMode::sdf;
    std::vector<double> accuracies;
    /// Selected lambda per repetition; empty for gcf.
    std::vector<double> chosen_lambdas;
    double mean = 0.0;
    double stddev = 0.0;
};

struct AccuracyReport {
    std::vector<CellResult> cells;
    std::size_t repetitions = 0;
    /// Wall-clock seconds; reported in the text table only, never in the JSON.
    double runtime_seconds = 0.0;

    const CellResult* find(std::size_t trees, std::size_t pairs, ExperimentMode mode) const;
};

using ProgressFn = std::function<void(const std::string&)>;

AccuracyReport run_experiment(const ExperimentSpec& spec, std::shared_ptr<const LabeledDataset> ds,
                              const ProgressFn& progress = {});
AccuracyReport run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

/// Byte-reproducible for a fixed spec and seed.
nlohmann::json report_to_json(const AccuracyReport& r);
std::string report_table(const AccuracyReport& r);

/// Sample mean and (n - 1) standard deviation; stddev is 0 for a single value.
std::pair<double, double> mean_stddev(const std::vector<double>& xs);

} // namespace sdf
