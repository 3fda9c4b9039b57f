#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdf/cli.hpp"
#include "support.hpp"

using namespace sdf;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::filesystem::path samples_csv(const std::filesystem::path& dir) {
    const auto ds = testing::blobs(12, 3, 3, 1.5, 1);
    const auto path = dir / "samples.csv";
    std::ofstream f(path);
    f << "a,b,c,label\n";
    for (std::size_t r = 0; r < ds->size(); ++r) {
        const auto& x = ds->samples[r].features;
        f << x[0] << "," << x[1] << "," << x[2] << "," << ds->labels[r] << "\n";
    }
    return path;
}

} // namespace

TEST_CASE("pairs writes the requested balance deterministically") {
    const auto dir = testing::scratch_dir("cli_pairs");
    const auto samples = samples_csv(dir).string();
    const auto a = (dir / "a.csv").string();
    const auto b = (dir / "b.csv").string();
    REQUIRE(cli({"--seed", "4", "pairs", "--input", samples, "--n", "10", "--balance", "0.5", "--out", a}).code == 0);
    REQUIRE(cli({"--seed", "4", "pairs", "--input", samples, "--n", "10", "--balance", "0.5", "--out", b}).code == 0);
    const auto rows = lines(slurp(a));
    REQUIRE(rows.size() == 11);
    int similar = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) similar += rows[r].back() == '0' ? 1 : 0;
    CHECK(similar == 5);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("usage and data errors map to exit codes") {
    const auto dir = testing::scratch_dir("cli_errors");
    CHECK(cli({"pairs", "--n", "10", "--out", (dir / "x.csv").string()}).code == exit_code::usage);
    CHECK(cli({}).code == exit_code::usage);
    CHECK(cli({"--help"}).code == exit_code::ok);
    CHECK(cli({"pairs", "--input", (dir / "missing.csv").string(), "--n", "10", "--out", (dir / "x.csv").string()}).code ==
          exit_code::data);
    std::ofstream(dir / "bad.json") << R"({"forests_per_level": 3})";
    const auto samples = samples_csv(dir).string();
    REQUIRE(cli({"pairs", "--input", samples, "--n", "30", "--out", (dir / "p.csv").string()}).code == 0);
    CHECK(cli({"--config", (dir / "bad.json").string(), "train", "--samples", samples, "--pairs",
               (dir / "p.csv").string(), "--out", (dir / "m.json").string()})
              .code == exit_code::config);
}

TEST_CASE("train, predict and the tau band") {
    const auto dir = testing::scratch_dir("cli_train");
    const auto samples = samples_csv(dir).string();
    const auto pairs = (dir / "p.csv").string();
    const auto model = (dir / "m.json").string();
    std::ofstream(dir / "cfg.json") << R"({"trees_per_forest": 5, "max_levels": 2})";
    const auto cfg = (dir / "cfg.json").string();
    REQUIRE(cli({"--seed", "2", "pairs", "--input", samples, "--n", "60", "--out", pairs}).code == 0);
    const auto trained = cli({"--seed", "2", "--config", cfg, "train", "--samples", samples, "--pairs", pairs, "--out", model});
    REQUIRE(trained.code == 0);
    CHECK(std::filesystem::exists(model));

    // Log lines: every forest's objective after the QP is at most the uniform objective.
    int checked = 0;
    for (const auto& line : lines(slurp(model + ".log"))) {
        std::istringstream in(line);
        std::string word;
        double before = 0, after = 0;
        while (in >> word) {
            if (word == "objective_uniform") in >> before;
            if (word == "objective_after") {
                in >> after;
                CHECK(after <= before);
                ++checked;
            }
        }
    }
    CHECK(checked > 0);

    const auto binary = cli({"predict", "--model", model, "--samples", samples, "--pairs", pairs});
    REQUIRE(binary.code == 0);
    const auto rows = lines(binary.out);
    CHECK(rows.size() == 61);
    CHECK(rows[0] == "i,j,diff,label");
    for (std::size_t r = 1; r < rows.size(); ++r) CHECK(rows[r].find("undetermined") == std::string::npos);

    const auto banded = cli({"predict", "--tau", "10", "--model", model, "--samples", samples, "--pairs", pairs});
    for (const auto& row : lines(banded.out)) {
        const bool nonneg = row.find(",-") == std::string::npos;
        if (row.rfind("i,j", 0) == 0) continue;
        CHECK(row.find(nonneg ? "undetermined" : "dissimilar") != std::string::npos);
    }

    const auto base = (dir / "g.json").string();
    REQUIRE(cli({"--seed", "2", "--config", cfg, "train", "--baseline", "--samples", samples, "--pairs", pairs, "--out", base}).code == 0);
    CHECK(slurp(base).find("\"weighting\": \"uniform\"") != std::string::npos);

    std::ofstream(dir / "wide.csv") << "a,b,label\n1,2,x\n3,4,y\n";
    CHECK(cli({"predict", "--model", model, "--samples", (dir / "wide.csv").string(), "--pairs", pairs}).code ==
          exit_code::data);
}

TEST_CASE("experiment report JSON is reproducible") {
    const auto dir = testing::scratch_dir("cli_experiment");
    const auto samples = samples_csv(dir).string();
    std::ofstream(dir / "cfg.json") << R"({"trees_per_forest": 3, "max_levels": 2})";
    std::vector<std::string> args{"--quiet", "--seed", "5", "--config", (dir / "cfg.json").string(), "experiment",
                                  "--dataset", samples, "--trees", "3", "--pairs", "30", "--reps", "2",
                                  "--lambdas", "0.01", "0.1"};
    auto first = args;
    first.insert(first.end(), {"--json", (dir / "a.json").string()});
    auto second = args;
    second.insert(second.end(), {"--json", (dir / "b.json").string()});
    REQUIRE(cli(first).code == 0);
    REQUIRE(cli(second).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    const auto report = nlohmann::json::parse(slurp(dir / "a.json"));
    CHECK(report["repetitions"] == 2);
    CHECK(report["cells"].size() == 2);
    for (const auto& cell : report["cells"]) {
        CHECK(cell["accuracies"].size() == 2);
        for (const auto& a : cell["accuracies"]) { const double v = a.get<double>(); CHECK(v >= 0.0); CHECK(v <= 1.0); }
    }
}
