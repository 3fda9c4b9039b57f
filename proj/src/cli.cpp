#include "sdf/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "sdf/cascade.hpp"
#include "sdf/error.hpp"
#include "sdf/experiment.hpp"
#include "sdf/persist.hpp"

namespace sdf {

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string config;
    bool quiet = false;
    bool seed_given = false;
};

struct SampleArgs {
    std::string path;
    std::string label_col = "last";
    bool no_header = false;

    std::shared_ptr<const LabeledDataset> load() const {
        return std::make_shared<const LabeledDataset>(load_csv(path, LabelColumn::parse(label_col), !no_header));
    }
};

void add_sample_flags(CLI::App* cmd, SampleArgs& s, const char* flag) {
    cmd->add_option(flag, s.path, "Samples CSV")->required();
    cmd->add_option("--label-col", s.label_col, "Label column: index, 'last' or 'none'");
    cmd->add_flag("--no-header", s.no_header, "The CSV has no header row");
}

CascadeConfig base_config(const Globals& g) {
    CascadeConfig cfg = g.config.empty() ? CascadeConfig{} : load_config(g.config);
    if (g.seed_given) {
        cfg.seed = g.seed;
    }
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    return out;
}

void write_training_log(const SDFModel& m, std::ostream& log) {
    log << std::setprecision(17);
    const auto& md = m.metadata;
    for (std::size_t q = 0; q < md.validation_trace.size(); ++q) {
        log << "level " << (q + 1) << " validation_accuracy " << md.validation_trace[q]
            << (q < m.levels.size() ? "" : " (dropped)") << "\n";
        for (std::size_t k = 0; k < md.qp_stats[q].size(); ++k) {
            for (std::size_t f = 0; f < md.qp_stats[q][k].size(); ++f) {
                const auto& s = md.qp_stats[q][k][f];
                log << "  slot " << k << " fold " << f << " objective_uniform " << s.initial_objective
                    << " objective_after " << s.final_objective << " iterations " << s.iterations
                    << (s.converged ? "" : " (max_iter)") << "\n";
            }
        }
    }
    log << "levels_kept " << m.levels.size() << "\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Siamese deep forest: pair generation, training, prediction and experiments", "sdf"};
    app.require_subcommand(1);
    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Root random seed");
    app.add_option("--config", g.config, "Cascade config JSON");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    auto* pairs_cmd = app.add_subcommand("pairs", "Generate labeled pairs from a samples CSV");
    SampleArgs pairs_in;
    std::size_t pairs_n = 0;
    double pairs_balance = 0.5;
    std::string pairs_out;
    add_sample_flags(pairs_cmd, pairs_in, "--input");
    pairs_cmd->add_option("--n", pairs_n, "Number of pairs")->required();
    pairs_cmd->add_option("--balance", pairs_balance, "Fraction of similar pairs");
    pairs_cmd->add_option("--out", pairs_out, "Output pairs CSV")->required();

    auto* train_cmd = app.add_subcommand("train", "Train a cascade on labeled pairs");
    SampleArgs train_in;
    std::string train_pairs, train_out, train_log;
    bool baseline = false;
    add_sample_flags(train_cmd, train_in, "--samples");
    train_cmd->add_option("--pairs", train_pairs, "Training pairs CSV")->required();
    train_cmd->add_option("--out", train_out, "Output model JSON")->required();
    train_cmd->add_option("--log", train_log, "Training log (default: <out>.log)");
    train_cmd->add_flag("--baseline", baseline, "Uniform tree weights (plain gcForest)");

    auto* predict_cmd = app.add_subcommand("predict", "Classify pairs with a trained model");
    SampleArgs predict_in;
    std::string predict_model, predict_pairs, predict_out;
    double predict_tau = 0.0;
    add_sample_flags(predict_cmd, predict_in, "--samples");
    predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
    predict_cmd->add_option("--pairs", predict_pairs, "Pairs CSV")->required();
    predict_cmd->add_option("--out", predict_out, "Verdict CSV (default: stdout)");
    predict_cmd->add_option("--tau", predict_tau, "Decision threshold");

    auto* exp_cmd = app.add_subcommand("experiment", "Repeated SDF vs gcForest accuracy experiment");
    SampleArgs exp_in;
    ExperimentSpec spec;
    std::string exp_mode = "both";
    std::string exp_json;
    add_sample_flags(exp_cmd, exp_in, "--dataset");
    exp_cmd->add_option("--trees", spec.tree_counts, "Trees per forest (T values)");
    exp_cmd->add_option("--pairs", spec.pair_counts, "Training pair counts (N values)");
    exp_cmd->add_option("--reps", spec.repetitions, "Repetitions per cell");
    exp_cmd->add_option("--lambdas", spec.lambdas, "Lambda grid for SDF");
    exp_cmd->add_option("--mode", exp_mode, "gcf, sdf or both");
    exp_cmd->add_option("--tau", spec.tau, "Decision threshold");
    exp_cmd->add_option("--balance", spec.balance, "Fraction of similar pairs");
    exp_cmd->add_option("--json", exp_json, "Write the machine-readable report here");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return exit_code::usage;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (pairs_cmd->parsed()) {
            const auto ds = pairs_in.load();
            write_pairs_csv(generate_pairs(ds, pairs_n, pairs_balance, g.seed), pairs_out);
        } else if (train_cmd->parsed()) {
            auto cfg = base_config(g);
            if (baseline) {
                cfg.weighting = Weighting::uniform;
            }
            const auto ds = train_in.load();
            const auto pairs = read_pairs_csv(train_pairs, ds);
            const auto model = train_cascade(pairs, cfg);
            save_model(model, train_out);
            auto log = open_out(train_log.empty() ? train_out + ".log" : train_log);
            write_training_log(model, log);
            if (!g.quiet) {
                write_training_log(model, err);
            }
        } else if (predict_cmd->parsed()) {
            if (!(predict_tau >= 0.0)) {
                throw ConfigError("--tau must be >= 0");
            }
            const auto model = load_model(predict_model);
            const auto ds = predict_in.load();
            if (ds->d != model.d) {
                throw DataError("samples have " + std::to_string(ds->d) + " features, model expects " +
                                std::to_string(model.d));
            }
            const auto pairs = read_pairs_csv(predict_pairs, ds);
            const auto verdicts = predict_batch(model, pairs);
            std::ofstream file;
            if (!predict_out.empty()) {
                file = open_out(predict_out);
            }
            std::ostream& sink = predict_out.empty() ? out : file;
            sink << std::setprecision(17) << "i,j,diff,label\n";
            for (std::size_t r = 0; r < pairs.size(); ++r) {
                sink << pairs.pairs[r].i << "," << pairs.pairs[r].j << "," << verdicts[r].diff << ","
                     << to_string(decide(verdicts[r].diff, predict_tau)) << "\n";
            }
        } else if (exp_cmd->parsed()) {
            spec.dataset = exp_in.path;
            spec.label_column = LabelColumn::parse(exp_in.label_col);
            spec.has_header = !exp_in.no_header;
            spec.mode = experiment_mode_from_string(exp_mode);
            spec.base = base_config(g);
            spec.seed = g.seed_given ? g.seed : spec.base.seed;
            ProgressFn progress;
            if (!g.quiet) {
                progress = [&err](const std::string& line) { err << line << "\n"; };
            }
            const auto report = run_experiment(spec, progress);
            out << report_table(report);
            if (!exp_json.empty()) {
                auto file = open_out(exp_json);
                file << dump_canonical(report_to_json(report));
            }
        }
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const InvariantError& e) {
        err << "invariant violation: " << e.what() << "\n";
        return exit_code::invariant;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return exit_code::data;
    }
    return exit_code::ok;
}

} // namespace sdf
