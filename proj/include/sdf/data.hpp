#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sdf {

struct Sample {
    std::vector<double> features;
    std::size_t id = 0;
};

/// Feature rows with one opaque class label per row. Labels only define
/// which pairs are semantically similar; their values are never used.
struct LabeledDataset {
    std::vector<Sample> samples;
    std::vector<std::string> labels;
    std::size_t d = 0;

    std::size_t size() const { return samples.size(); }
    std::size_t class_count() const;
};

/// A pair of sample indices; y = 0 marks a similar pair, y = 1 a dissimilar one.
struct Pair {
    std::size_t i = 0;
    std::size_t j = 0;
    int y = 0;

    friend bool operator==(const Pair&, const Pair&) = default;
};

struct PairDataset {
    std::vector<Pair> pairs;
    std::shared_ptr<const LabeledDataset> source;

    std::size_t size() const { return pairs.size(); }
    std::vector<int> labels() const;
    /// Throws DataError if an index is out of range, i == j or y is not binary.
    void validate() const;
};

/// Column holding the class label: a zero-based index, the last column, or
/// none (every column is a feature; labels are left empty).
struct LabelColumn {
    struct Last {};
    struct None {};
    std::variant<std::size_t, Last, None> which = Last{};

    static LabelColumn parse(const std::string& token);
};

LabeledDataset load_csv(const std::filesystem::path& path, LabelColumn label_column, bool has_header);

enum class Replacement { automatic, never };

/// Draws round(n * balance) similar pairs uniformly from same-class index
/// combinations and the rest from cross-class combinations. Combinations are
/// unordered and drawn without replacement unless more are requested than
/// exist (then with replacement, or an error under Replacement::never).
PairDataset generate_pairs(std::shared_ptr<const LabeledDataset> ds, std::size_t n, double balance,
                           std::uint64_t seed, Replacement replacement = Replacement::automatic);

/// ceil(2 n_train / 3), the test-set size that accompanies n_train training pairs.
std::size_t test_size_for(std::size_t n_train);

/// Disjoint train (n_train pairs) and test (test_size_for(n_train) pairs) subsets.
std::pair<PairDataset, PairDataset> split_pairs(const PairDataset& pd, std::size_t n_train, std::uint64_t seed);

std::vector<double> concatenate_pair(const Sample& a, const Sample& b);

PairDataset read_pairs_csv(const std::filesystem::path& path, std::shared_ptr<const LabeledDataset> source);
void write_pairs_csv(const PairDataset& pd, const std::filesystem::path& path);

} // namespace sdf
