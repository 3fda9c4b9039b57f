#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "sdf/data.hpp"
#include "sdf/error.hpp"
#include "support.hpp"

using namespace sdf;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
    const auto path = testing::scratch_dir("data_" + name) / "f.csv";
    std::ofstream(path) << text;
    return path;
}

std::shared_ptr<const LabeledDataset> labels_only(std::vector<std::string> labels) {
    auto ds = std::make_shared<LabeledDataset>();
    ds->d = 1;
    for (std::size_t r = 0; r < labels.size(); ++r) ds->samples.push_back({{static_cast<double>(r)}, r});
    ds->labels = std::move(labels);
    return ds;
}

} // namespace

TEST_CASE("load_csv parses features and the label column") {
    const auto ds = load_csv(write_file("basic", "a,b,cls\n1,2,x\n3,4,y\n5,6,x\n"), LabelColumn{}, true);
    CHECK(ds.size() == 3);
    CHECK(ds.d == 2);
    CHECK(ds.samples[1].features == std::vector<double>{3, 4});
    CHECK(ds.labels == std::vector<std::string>{"x", "y", "x"});
    CHECK(ds.class_count() == 2);
}

TEST_CASE("load_csv without header keeps the first row") {
    const auto ds = load_csv(write_file("nohdr", "1,2,x\n3,4,y\n"), LabelColumn{}, false);
    CHECK(ds.size() == 2);
    CHECK(ds.samples[0].features == std::vector<double>{1, 2});
}

TEST_CASE("load_csv label column by index and none") {
    const auto path = write_file("idx", "x,1,2\ny,3,4\n");
    const auto by_index = load_csv(path, LabelColumn::parse("0"), false);
    CHECK(by_index.d == 2);
    CHECK(by_index.labels[1] == "y");
    CHECK_THROWS_AS(load_csv(path, LabelColumn::parse("none"), false), DataError);
    const auto numeric = load_csv(write_file("none", "1,2\n3,4\n"), LabelColumn::parse("none"), false);
    CHECK(numeric.d == 2);
    CHECK_THROWS_AS(LabelColumn::parse("first"), DataError);
}

TEST_CASE("load_csv names the offending row and column") {
    const auto path = write_file("bad", "a,b,c\n1,2,x\n3,abc,y\n");
    try {
        load_csv(path, LabelColumn{}, true);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
    }
    CHECK_THROWS_AS(load_csv(write_file("ragged", "1,2,x\n3,y\n"), LabelColumn{}, false), DataError);
    CHECK_THROWS_AS(load_csv(write_file("empty", ""), LabelColumn{}, false), DataError);
    CHECK_THROWS_AS(load_csv(write_file("nan", "1,nan,x\n"), LabelColumn{}, false), DataError);
}

TEST_CASE("generate_pairs labels follow class identity") {
    const auto ds = labels_only({"A", "A", "B"});
    const auto pd = generate_pairs(ds, 2, 0.5, 7);
    REQUIRE(pd.size() == 2);
    for (const auto& p : pd.pairs) {
        const bool same = ds->labels[p.i] == ds->labels[p.j];
        CHECK(p.y == (same ? 0 : 1));
        CHECK(p.i != p.j);
    }
}

TEST_CASE("generate_pairs hits the requested balance exactly") {
    const auto ds = testing::blobs(10, 3, 2, 3.0, 1);
    for (const auto& [n, balance] : std::vector<std::pair<std::size_t, double>>{{4, 0.5}, {10, 0.3}, {101, 0.5}}) {
        const auto pd = generate_pairs(ds, n, balance, 3);
        const auto labels = pd.labels();
        CHECK(pd.size() == n);
        CHECK(std::count(labels.begin(), labels.end(), 0) == std::llround(static_cast<double>(n) * balance));
    }
}

TEST_CASE("generate_pairs draws distinct unordered pairs when enough exist") {
    const auto ds = testing::blobs(8, 2, 2, 3.0, 2);
    const auto pd = generate_pairs(ds, 40, 0.5, 11);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& p : pd.pairs) {
        CHECK(seen.insert({std::min(p.i, p.j), std::max(p.i, p.j)}).second);
    }
}

TEST_CASE("generate_pairs is deterministic and seed-sensitive") {
    const auto ds = testing::blobs(20, 3, 2, 3.0, 3);
    CHECK(generate_pairs(ds, 50, 0.5, 9).pairs == generate_pairs(ds, 50, 0.5, 9).pairs);
    CHECK(generate_pairs(ds, 50, 0.5, 9).pairs != generate_pairs(ds, 50, 0.5, 10).pairs);
}

TEST_CASE("generate_pairs replacement policy") {
    const auto ds = labels_only({"A", "A", "B", "B"});
    // Two similar combinations exist; five are requested.
    CHECK(generate_pairs(ds, 10, 0.5, 1).size() == 10);
    CHECK_THROWS_AS(generate_pairs(ds, 10, 0.5, 1, Replacement::never), DataError);
    CHECK_THROWS_AS(generate_pairs(labels_only({"A", "B", "C"}), 4, 0.5, 1), DataError);
    CHECK_THROWS_AS(generate_pairs(labels_only({"A", "A", "A"}), 4, 0.5, 1), DataError);
}

TEST_CASE("test_size_for is ceil(2n/3)") {
    for (std::size_t n = 1; n < 5000; ++n) {
        const auto oracle = static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(n) / 3.0));
        REQUIRE(test_size_for(n) == oracle);
    }
    CHECK(test_size_for(100) == 67);
    CHECK(test_size_for(2000) == 1334);
}

TEST_CASE("split_pairs yields disjoint train and test sets") {
    const auto ds = testing::blobs(30, 3, 2, 3.0, 4);
    const auto pool = generate_pairs(ds, 100 + test_size_for(100), 0.5, 5);
    const auto [train, test] = split_pairs(pool, 100, 6);
    CHECK(train.size() == 100);
    CHECK(test.size() == 67);
    std::set<std::pair<std::size_t, std::size_t>> train_keys;
    for (const auto& p : train.pairs) train_keys.insert({std::min(p.i, p.j), std::max(p.i, p.j)});
    for (const auto& p : test.pairs) CHECK_FALSE(train_keys.contains({std::min(p.i, p.j), std::max(p.i, p.j)}));
    CHECK_THROWS_AS(split_pairs(pool, 150, 6), DataError);
}

TEST_CASE("concatenate_pair") {
    const Sample a{{1, 2}, 0};
    const Sample b{{3, 4}, 1};
    CHECK(concatenate_pair(a, b) == std::vector<double>{1, 2, 3, 4});
    CHECK(concatenate_pair(a, b) != concatenate_pair(b, a));
    CHECK_THROWS_AS(concatenate_pair(Sample{}, Sample{}), DataError);
    CHECK_THROWS_AS(concatenate_pair(a, Sample{{1}, 2}), DataError);
}

TEST_CASE("pair CSV round trip") {
    const auto ds = testing::blobs(10, 2, 2, 3.0, 5);
    const auto pd = generate_pairs(ds, 12, 0.5, 1);
    const auto path = testing::scratch_dir("pairs_rt") / "p.csv";
    write_pairs_csv(pd, path);
    CHECK(read_pairs_csv(path, ds).pairs == pd.pairs);
    std::ofstream(path) << "i,j,y\n0,99,1\n";
    CHECK_THROWS_AS(read_pairs_csv(path, ds), DataError);
}
