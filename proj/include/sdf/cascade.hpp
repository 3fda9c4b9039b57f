#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdf/data.hpp"
#include "sdf/forest.hpp"
#include "sdf/scanning.hpp"
#include "sdf/weightopt.hpp"

namespace sdf {

enum class ZSchedule { constant, doubling };
enum class Augmentation { replace, accumulate };
/// `uniform` skips the weight QPs and yields the plain gcForest.
enum class Weighting { optimized, uniform };

std::string to_string(ZSchedule z);
std::string to_string(Augmentation a);
std::string to_string(Weighting w);
ZSchedule z_schedule_from_string(const std::string& s);
Augmentation augmentation_from_string(const std::string& s);
Weighting weighting_from_string(const std::string& s);

struct CascadeConfig {
    std::size_t max_levels = 5;
    /// First half random forests, second half completely-random forests.
    std::size_t forests_per_level = 4;
    std::size_t trees_per_forest = 100;
    std::size_t cv_folds = 3;
    QPConfig qp;
    ZSchedule z_schedule = ZSchedule::constant;
    Augmentation augmentation = Augmentation::replace;
    double val_fraction = 0.2;
    double epsilon_gain = 0.0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    Weighting weighting = Weighting::optimized;
    ScanConfig scanning;

    void validate() const;
    /// z multiplier at 1-based level q.
    double z_multiplier(std::size_t q) const;
    TreeKind slot_kind(std::size_t slot) const;

    friend bool operator==(const CascadeConfig&, const CascadeConfig&) = default;
};

struct Level {
    std::size_t input_width = 0;
    /// Prefix of the input kept by replace mode (the level-1 input width).
    std::size_t base_width = 0;
    Augmentation augmentation = Augmentation::replace;
    /// forests[slot][fold]; each carries the weights fitted on its held-out fold.
    std::vector<std::vector<Forest>> forests;

    std::size_t slots() const { return forests.size(); }
    std::size_t folds() const { return forests.empty() ? 0 : forests.front().size(); }
    std::size_t output_width() const;

    friend bool operator==(const Level&, const Level&) = default;
};

struct QPStats {
    double initial_objective = 0.0;
    double final_objective = 0.0;
    std::size_t iterations = 0;
    bool converged = true;

    friend bool operator==(const QPStats&, const QPStats&) = default;
};

struct TrainingMetadata {
    std::uint64_t seed = 0;
    std::size_t train_pair_count = 0;
    /// Accuracy after every trained level, including levels dropped by the best-prefix rule.
    std::vector<double> validation_trace;
    /// qp_stats[level][slot][fold] for every trained level.
    std::vector<std::vector<std::vector<QPStats>>> qp_stats;

    friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct SDFModel {
    std::vector<Level> levels;
    CascadeConfig config;
    std::size_t d = 0;
    Scanners scanners;
    TrainingMetadata metadata;

    /// Re-checks simplex feasibility, forest widths, grid shape and width chaining.
    void validate() const;

    friend bool operator==(const SDFModel&, const SDFModel&) = default;
};

enum class Verdict { similar, dissimilar, undetermined };
std::string to_string(Verdict v);

struct PairVerdict {
    double diff = 0.0;
    Verdict label = Verdict::similar;

    friend bool operator==(const PairVerdict&, const PairVerdict&) = default;
};

/// similar if diff >= tau, dissimilar if diff < 0, undetermined otherwise.
Verdict decide(double diff, double tau);
/// Undetermined never counts as correct.
bool verdict_correct(Verdict v, int y);

SDFModel train_cascade(const PairDataset& train, const CascadeConfig& cfg);

/// Fold-averaged weighted class vector of every slot.
std::vector<ClassDistribution> level_class_vectors(std::span<const double> x, const Level& level);
/// Same, with (1/T) tree averages in place of the stored weights.
std::vector<ClassDistribution> level_mean_class_vectors(std::span<const double> x, const Level& level);

std::vector<double> augment(std::span<const double> x, const Level& level);

PairVerdict predict_pair(const SDFModel& m, const Sample& a, const Sample& b);
/// The gcForest path: every level uses unweighted tree averages.
PairVerdict predict_pair_uniform(const SDFModel& m, const Sample& a, const Sample& b);
std::vector<PairVerdict> predict_batch(const SDFModel& m, const PairDataset& pairs);

double accuracy(std::span<const PairVerdict> verdicts, std::span<const Pair> pairs);

} // namespace sdf
