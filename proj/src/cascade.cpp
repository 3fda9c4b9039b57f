#include "sdf/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sdf/error.hpp"
#include "sdf/rng.hpp"

namespace sdf {

std::string to_string(ZSchedule z) { return z == ZSchedule::constant ? "constant" : "doubling"; }
std::string to_string(Augmentation a) { return a == Augmentation::replace ? "replace" : "accumulate"; }
std::string to_string(Weighting w) { return w == Weighting::optimized ? "optimized" : "uniform"; }

ZSchedule z_schedule_from_string(const std::string& s) {
    if (s == "constant") return ZSchedule::constant;
    if (s == "doubling") return ZSchedule::doubling;
    throw ConfigError("unknown z_schedule '" + s + "' (expected constant or doubling)");
}

Augmentation augmentation_from_string(const std::string& s) {
    if (s == "replace") return Augmentation::replace;
    if (s == "accumulate") return Augmentation::accumulate;
    throw ConfigError("unknown augmentation '" + s + "' (expected replace or accumulate)");
}

Weighting weighting_from_string(const std::string& s) {
    if (s == "optimized") return Weighting::optimized;
    if (s == "uniform") return Weighting::uniform;
    throw ConfigError("unknown weighting '" + s + "' (expected optimized or uniform)");
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::similar: return "similar";
    case Verdict::dissimilar: return "dissimilar";
    case Verdict::undetermined: return "undetermined";
    }
    return "undetermined";
}

void CascadeConfig::validate() const {
    if (max_levels < 1) {
        throw ConfigError("max_levels must be >= 1");
    }
    if (forests_per_level < 2 || forests_per_level % 2 != 0) {
        throw ConfigError("forests_per_level must be even and >= 2, got " + std::to_string(forests_per_level));
    }
    if (trees_per_forest < 1) {
        throw ConfigError("trees_per_forest must be >= 1");
    }
    if (cv_folds < 2) {
        throw ConfigError("cv_folds must be >= 2, got " + std::to_string(cv_folds));
    }
    if (!(val_fraction >= 0.0 && val_fraction <= 0.5)) {
        throw ConfigError("val_fraction must lie in [0, 0.5]");
    }
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ConfigError("tau must be a finite value >= 0");
    }
    if (!std::isfinite(epsilon_gain)) {
        throw ConfigError("epsilon_gain must be finite");
    }
    qp.validate();
}

double CascadeConfig::z_multiplier(std::size_t q) const {
    if (z_schedule == ZSchedule::constant) {
        return qp.z_multiplier;
    }
    return std::ldexp(qp.z_multiplier, static_cast<int>(q) - 1);
}

TreeKind CascadeConfig::slot_kind(std::size_t slot) const {
    return slot < forests_per_level / 2 ? TreeKind::random_forest : TreeKind::complete_random;
}

std::size_t Level::output_width() const {
    const auto head = augmentation == Augmentation::replace ? base_width : input_width;
    return head + 2 * slots();
}

Verdict decide(double diff, double tau) {
    if (diff >= tau) return Verdict::similar;
    if (diff < 0.0) return Verdict::dissimilar;
    return Verdict::undetermined;
}

bool verdict_correct(Verdict v, int y) {
    return (v == Verdict::similar && y == 0) || (v == Verdict::dissimilar && y == 1);
}

void SDFModel::validate() const {
    config.validate();
    if (levels.empty()) {
        throw InvariantError("model has no levels");
    }
    if (d == 0) {
        throw InvariantError("model has d = 0");
    }
    if (scanners.enabled() != config.scanning.enabled) {
        throw InvariantError("scanning block disagrees with the scanning config");
    }
    if (scanners.enabled() && scanners.d != d) {
        throw InvariantError("scanners fitted on " + std::to_string(scanners.d) + " features, model d = " +
                             std::to_string(d));
    }
    scanners.validate();

    const auto base = 2 * d + scanners.scanned_width();
    auto expected = base;
    for (std::size_t q = 0; q < levels.size(); ++q) {
        const auto& level = levels[q];
        const auto where = "level " + std::to_string(q + 1);
        if (level.augmentation != config.augmentation) {
            throw InvariantError(where + " augmentation disagrees with config");
        }
        if (level.base_width != base) {
            throw InvariantError(where + " base width " + std::to_string(level.base_width) + ", expected " +
                                 std::to_string(base));
        }
        if (level.input_width != expected) {
            throw InvariantError(where + " input width " + std::to_string(level.input_width) +
                                 " breaks width chaining, expected " + std::to_string(expected));
        }
        if (level.slots() != config.forests_per_level) {
            throw InvariantError(where + " has " + std::to_string(level.slots()) + " slots, expected " +
                                 std::to_string(config.forests_per_level));
        }
        for (std::size_t k = 0; k < level.slots(); ++k) {
            if (level.forests[k].size() != config.cv_folds) {
                throw InvariantError(where + " slot " + std::to_string(k) + " has " +
                                     std::to_string(level.forests[k].size()) + " folds, expected " +
                                     std::to_string(config.cv_folds));
            }
            for (std::size_t f = 0; f < config.cv_folds; ++f) {
                const auto& forest = level.forests[k][f];
                const auto id = where + " slot " + std::to_string(k) + " fold " + std::to_string(f);
                if (forest.width() != level.input_width) {
                    throw InvariantError(id + ": forest width " + std::to_string(forest.width()) +
                                         " != level input width " + std::to_string(level.input_width));
                }
                if (forest.kind() != config.slot_kind(k)) {
                    throw InvariantError(id + ": forest kind " + to_string(forest.kind()) + ", expected " +
                                         to_string(config.slot_kind(k)));
                }
                if (!on_simplex(forest.weights().values())) {
                    throw InvariantError(id + ": simplex violation in forest weights");
                }
            }
        }
        expected = level.output_width();
    }
}

namespace {

template <typename ClassVectorFn>
std::vector<ClassDistribution> fold_averaged(std::span<const double> x, const Level& level, ClassVectorFn fn) {
    if (x.size() != level.input_width) {
        throw DataError("level input width " + std::to_string(level.input_width) + ", got " +
                        std::to_string(x.size()));
    }
    const double folds = static_cast<double>(level.folds());
    std::vector<ClassDistribution> out(level.slots());
    for (std::size_t k = 0; k < level.slots(); ++k) {
        ClassDistribution v{0.0, 0.0};
        for (const auto& forest : level.forests[k]) {
            const auto u = fn(forest, x);
            v[0] += u[0];
            v[1] += u[1];
        }
        out[k] = {v[0] / folds, v[1] / folds};
    }
    return out;
}

std::vector<double> append_vectors(std::span<const double> x, const Level& level,
                                   const std::vector<ClassDistribution>& vs) {
    const auto head = level.augmentation == Augmentation::replace ? level.base_width : x.size();
    std::vector<double> out(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(head));
    out.reserve(head + 2 * vs.size());
    for (const auto& v : vs) {
        out.push_back(v[0]);
        out.push_back(v[1]);
    }
    return out;
}

double class_sum_diff(const std::vector<ClassDistribution>& vs) {
    double s0 = 0.0;
    double s1 = 0.0;
    for (const auto& v : vs) {
        s0 += v[0];
        s1 += v[1];
    }
    return s0 - s1;
}

template <typename LevelVectorsFn>
PairVerdict run_cascade(const SDFModel& m, const Sample& a, const Sample& b, LevelVectorsFn vectors) {
    if (a.features.size() != m.d || b.features.size() != m.d) {
        throw DataError("predict: pair has " + std::to_string(a.features.size()) + " and " +
                        std::to_string(b.features.size()) + " features, model expects " + std::to_string(m.d));
    }
    if (m.levels.empty()) {
        throw InvariantError("predict: model has no levels");
    }
    auto x = transform_pair(a, b, m.scanners);
    for (std::size_t q = 0; q + 1 < m.levels.size(); ++q) {
        x = append_vectors(x, m.levels[q], vectors(x, m.levels[q]));
    }
    const double diff = class_sum_diff(vectors(x, m.levels.back()));
    return {diff, decide(diff, m.config.tau)};
}

std::vector<std::size_t> indices_of(const std::vector<int>& y, int label) {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < y.size(); ++r) {
        if (y[r] == label) out.push_back(r);
    }
    return out;
}

// Per-class shuffle, then class-major round robin, so every fold is nonempty
// whenever there are at least as many pairs as folds.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& y, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (const int label : {0, 1}) {
        auto idx = indices_of(y, label);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (const auto r : idx) {
            folds[next++ % k].push_back(r);
        }
    }
    for (auto& f : folds) {
        std::sort(f.begin(), f.end());
    }
    return folds;
}

struct Holdout {
    std::vector<Pair> fit;
    std::vector<Pair> val;
};

Holdout split_validation(const std::vector<Pair>& pairs, double fraction, std::uint64_t seed) {
    Holdout out;
    if (fraction <= 0.0) {
        out.fit = pairs;
        return out;
    }
    Rng rng(seed);
    std::vector<int> y;
    y.reserve(pairs.size());
    for (const auto& p : pairs) y.push_back(p.y);
    std::vector<bool> is_val(pairs.size(), false);
    for (const int label : {0, 1}) {
        auto idx = indices_of(y, label);
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        for (std::size_t r = 0; r < n_val; ++r) is_val[idx[r]] = true;
    }
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        (is_val[r] ? out.val : out.fit).push_back(pairs[r]);
    }
    return out;
}

Matrix level_one_inputs(const std::vector<Pair>& pairs, const LabeledDataset& src, const Scanners& scanners) {
    Matrix X;
    for (const auto& p : pairs) {
        X.push_row(transform_pair(src.samples[p.i], src.samples[p.j], scanners));
    }
    return X;
}

double accuracy_of(const std::vector<double>& diffs, const std::vector<int>& y, double tau) {
    std::size_t correct = 0;
    for (std::size_t r = 0; r < diffs.size(); ++r) {
        correct += verdict_correct(decide(diffs[r], tau), y[r]) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(diffs.size());
}

} // namespace

std::vector<ClassDistribution> level_class_vectors(std::span<const double> x, const Level& level) {
    return fold_averaged(x, level, [](const Forest& f, std::span<const double> v) { return f.class_vector(v); });
}

std::vector<ClassDistribution> level_mean_class_vectors(std::span<const double> x, const Level& level) {
    return fold_averaged(x, level, [](const Forest& f, std::span<const double> v) { return f.mean_class_vector(v); });
}

std::vector<double> augment(std::span<const double> x, const Level& level) {
    return append_vectors(x, level, level_class_vectors(x, level));
}

PairVerdict predict_pair(const SDFModel& m, const Sample& a, const Sample& b) {
    return run_cascade(m, a, b, [](std::span<const double> x, const Level& l) { return level_class_vectors(x, l); });
}

PairVerdict predict_pair_uniform(const SDFModel& m, const Sample& a, const Sample& b) {
    return run_cascade(m, a, b,
                       [](std::span<const double> x, const Level& l) { return level_mean_class_vectors(x, l); });
}

std::vector<PairVerdict> predict_batch(const SDFModel& m, const PairDataset& pairs) {
    std::vector<PairVerdict> out;
    if (pairs.pairs.empty()) {
        return out;
    }
    if (!pairs.source) {
        throw DataError("predict_batch: pairs have no sample source");
    }
    pairs.validate();
    out.reserve(pairs.size());
    for (const auto& p : pairs.pairs) {
        out.push_back(predict_pair(m, pairs.source->samples[p.i], pairs.source->samples[p.j]));
    }
    return out;
}

double accuracy(std::span<const PairVerdict> verdicts, std::span<const Pair> pairs) {
    if (verdicts.size() != pairs.size()) {
        throw DataError("accuracy: " + std::to_string(verdicts.size()) + " verdicts for " +
                        std::to_string(pairs.size()) + " pairs");
    }
    if (pairs.empty()) {
        throw DataError("accuracy: no pairs");
    }
    std::size_t correct = 0;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        correct += verdict_correct(verdicts[r].label, pairs[r].y) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

SDFModel train_cascade(const PairDataset& train, const CascadeConfig& cfg) {
    cfg.validate();
    if (!train.source || train.pairs.empty()) {
        throw DataError("train_cascade: no training pairs");
    }
    train.validate();
    const auto labels = train.labels();
    const auto n_sim = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
    if (n_sim == 0 || n_sim == labels.size()) {
        throw DataError("train_cascade: training pairs are all " +
                        std::string(n_sim == 0 ? "dissimilar" : "similar") + "; both labels are required");
    }

    const auto& src = *train.source;
    auto holdout = split_validation(train.pairs, cfg.val_fraction, derive_seed(cfg.seed, {stream::validation}));
    if (holdout.fit.size() < cfg.cv_folds) {
        throw DataError("train_cascade: " + std::to_string(holdout.fit.size()) + " fitting pairs cannot fill " +
                        std::to_string(cfg.cv_folds) + " folds");
    }
    const bool use_oof = holdout.val.empty();

    SDFModel model;
    model.config = cfg;
    model.d = src.d;
    model.metadata.seed = cfg.seed;
    model.metadata.train_pair_count = train.size();
    model.scanners = fit_scanners(PairDataset{holdout.fit, train.source}, cfg.scanning,
                                  derive_seed(cfg.seed, {stream::scanning}));

    std::vector<int> y_fit;
    for (const auto& p : holdout.fit) y_fit.push_back(p.y);
    std::vector<int> y_val;
    for (const auto& p : holdout.val) y_val.push_back(p.y);

    Matrix X = level_one_inputs(holdout.fit, src, model.scanners);
    Matrix V = level_one_inputs(holdout.val, src, model.scanners);
    const auto base_width = X.cols();

    const auto folds = stratified_folds(y_fit, cfg.cv_folds, derive_seed(cfg.seed, {stream::folds}));
    std::vector<std::size_t> fold_of(y_fit.size());
    std::vector<std::vector<std::size_t>> out_fold(cfg.cv_folds);
    for (std::size_t f = 0; f < cfg.cv_folds; ++f) {
        for (const auto r : folds[f]) fold_of[r] = f;
    }
    for (std::size_t f = 0; f < cfg.cv_folds; ++f) {
        for (std::size_t r = 0; r < y_fit.size(); ++r) {
            if (fold_of[r] != f) out_fold[f].push_back(r);
        }
    }

    std::vector<Level> trained;
    double best = -1.0;
    std::size_t best_levels = 0;
    const auto M = cfg.forests_per_level;

    for (std::size_t q = 1; q <= cfg.max_levels; ++q) {
        Level level;
        level.input_width = X.cols();
        level.base_width = base_width;
        level.augmentation = cfg.augmentation;
        level.forests.assign(M, {});

        QPConfig qp = cfg.qp;
        qp.z_multiplier = cfg.z_multiplier(q);
        std::vector<std::vector<QPStats>> stats(M, std::vector<QPStats>(cfg.cv_folds));
        // oof[r][k]: class vector of fit pair r from the slot-k forest that held r out.
        std::vector<std::vector<ClassDistribution>> oof(y_fit.size(), std::vector<ClassDistribution>(M));

        for (std::size_t k = 0; k < M; ++k) {
            const auto tree_cfg = TreeConfig::defaults(cfg.slot_kind(k));
            for (std::size_t f = 0; f < cfg.cv_folds; ++f) {
                auto forest = fit_forest(X, y_fit, out_fold[f], tree_cfg, cfg.trees_per_forest,
                                         derive_seed(cfg.seed, {stream::forest, q, k, f}));
                const auto probs = tree_probabilities(forest, X, folds[f]);
                std::vector<int> y_fold;
                for (const auto r : folds[f]) y_fold.push_back(y_fit[r]);
                const auto P = build_p_matrix(probs, y_fold, qp.z_multiplier);

                auto& st = stats[k][f];
                if (cfg.weighting == Weighting::optimized) {
                    auto solved = solve_weights(P, qp);
                    st = {solved.initial_objective(), solved.final_objective(), solved.iterations, solved.converged};
                    forest = set_weights(std::move(forest), std::move(solved.weights));
                } else {
                    const double j = objective(P, forest.weights().values(), qp.lambda);
                    st = {j, j, 0, true};
                }
                for (const auto r : folds[f]) {
                    oof[r][k] = forest.class_vector(X.row(r));
                }
                level.forests[k].push_back(std::move(forest));
            }
        }

        std::vector<double> diffs;
        std::vector<std::vector<ClassDistribution>> val_vectors;
        if (use_oof) {
            for (const auto& vs : oof) diffs.push_back(class_sum_diff(vs));
        } else {
            for (std::size_t r = 0; r < V.rows(); ++r) {
                val_vectors.push_back(level_class_vectors(V.row(r), level));
                diffs.push_back(class_sum_diff(val_vectors.back()));
            }
        }
        const double acc = accuracy_of(diffs, use_oof ? y_fit : y_val, cfg.tau);
        model.metadata.validation_trace.push_back(acc);
        model.metadata.qp_stats.push_back(std::move(stats));

        const bool improved = q == 1 || acc > best + cfg.epsilon_gain;
        if (improved) {
            best = acc;
            best_levels = q;
        }
        trained.push_back(std::move(level));
        if (!improved || q == cfg.max_levels) {
            break;
        }

        const auto& last = trained.back();
        Matrix X_next;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            X_next.push_row(append_vectors(X.row(r), last, oof[r]));
        }
        Matrix V_next;
        for (std::size_t r = 0; r < V.rows(); ++r) {
            V_next.push_row(append_vectors(V.row(r), last, val_vectors[r]));
        }
        X = std::move(X_next);
        V = std::move(V_next);
    }

    trained.resize(best_levels);
    model.levels = std::move(trained);
    return model;
}

} // namespace sdf
