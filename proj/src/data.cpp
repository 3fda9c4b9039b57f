#include "sdf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "sdf/error.hpp"
#include "sdf/rng.hpp"

namespace sdf {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return cells;
}

bool parse_double(std::string_view cell, double& out) {
    if (cell.empty()) {
        return false;
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

template <class T>
bool parse_unsigned(std::string_view cell, T& out) {
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size() && !cell.empty();
}

std::uint64_t combination_key(std::size_t i, std::size_t j, std::size_t n) {
    const auto lo = std::min(i, j);
    const auto hi = std::max(i, j);
    return static_cast<std::uint64_t>(lo) * n + hi;
}

std::size_t choose2(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

} // namespace

std::size_t LabeledDataset::class_count() const {
    std::vector<std::string> sorted(labels);
    std::sort(sorted.begin(), sorted.end());
    return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

std::vector<int> PairDataset::labels() const {
    std::vector<int> y;
    y.reserve(pairs.size());
    for (const auto& p : pairs) {
        y.push_back(p.y);
    }
    return y;
}

void PairDataset::validate() const {
    if (!source) {
        throw DataError("pair dataset has no sample source");
    }
    const auto n = source->size();
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const auto& p = pairs[r];
        if (p.i >= n || p.j >= n) {
            throw DataError("pair " + std::to_string(r) + " references sample index out of range (" +
                            std::to_string(p.i) + ", " + std::to_string(p.j) + "; " + std::to_string(n) +
                            " samples)");
        }
        if (p.i == p.j) {
            throw DataError("pair " + std::to_string(r) + " pairs sample " + std::to_string(p.i) + " with itself");
        }
        if (p.y != 0 && p.y != 1) {
            throw DataError("pair " + std::to_string(r) + " has label " + std::to_string(p.y) + ", expected 0 or 1");
        }
    }
}

LabelColumn LabelColumn::parse(const std::string& token) {
    if (token == "last") {
        return {Last{}};
    }
    if (token == "none") {
        return {None{}};
    }
    std::size_t index = 0;
    if (!parse_unsigned(token, index)) {
        throw DataError("label column must be a zero-based index, \"last\" or \"none\", got \"" + token + "\"");
    }
    return {index};
}

LabeledDataset load_csv(const std::filesystem::path& path, LabelColumn label_column, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }

    LabeledDataset ds;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto cells = split_commas(line);
        if (width == 0) {
            width = cells.size();
        } else if (cells.size() != width) {
            throw DataError(path.string() + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(width));
        }

        std::size_t label_at = width;  // width means "no label column"
        if (const auto* idx = std::get_if<std::size_t>(&label_column.which)) {
            if (*idx >= width) {
                throw DataError(path.string() + ": row " + std::to_string(line_no) + " has no label column " +
                                std::to_string(*idx));
            }
            label_at = *idx;
        } else if (std::holds_alternative<LabelColumn::Last>(label_column.which)) {
            if (width < 2) {
                throw DataError(path.string() + ": row " + std::to_string(line_no) +
                                " needs at least one feature column besides the label");
            }
            label_at = width - 1;
        }

        Sample sample;
        sample.id = ds.samples.size();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_at) {
                continue;
            }
            double value = 0.0;
            if (!parse_double(cells[c], value)) {
                throw DataError(path.string() + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                ": \"" + std::string(cells[c]) + "\" is not a finite number");
            }
            sample.features.push_back(value);
        }
        if (label_at < width) {
            ds.labels.emplace_back(cells[label_at]);
        }
        ds.samples.push_back(std::move(sample));
    }

    if (ds.samples.empty()) {
        throw DataError(path.string() + ": no data rows");
    }
    ds.d = ds.samples.front().features.size();
    if (ds.d == 0) {
        throw DataError(path.string() + ": no feature columns");
    }
    return ds;
}

PairDataset generate_pairs(std::shared_ptr<const LabeledDataset> ds, std::size_t n, double balance,
                           std::uint64_t seed, Replacement replacement) {
    if (!ds) {
        throw DataError("generate_pairs: no dataset");
    }
    if (n < 2) {
        throw DataError("generate_pairs: need at least 2 pairs, got " + std::to_string(n));
    }
    if (!(balance >= 0.0 && balance <= 1.0)) {
        throw DataError("generate_pairs: balance must lie in [0, 1]");
    }
    if (ds->labels.size() != ds->size()) {
        throw DataError("generate_pairs: dataset has no labels for its samples");
    }

    // Class membership in order of first appearance.
    std::map<std::string, std::size_t> class_of;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::size_t> cls(ds->size());
    for (std::size_t i = 0; i < ds->size(); ++i) {
        auto [it, inserted] = class_of.try_emplace(ds->labels[i], members.size());
        if (inserted) {
            members.emplace_back();
        }
        cls[i] = it->second;
        members[it->second].push_back(i);
    }
    if (members.size() < 2) {
        throw DataError("generate_pairs: need at least 2 classes, found " + std::to_string(members.size()));
    }

    const std::size_t total = ds->size();
    std::size_t same_available = 0;
    for (const auto& m : members) {
        same_available += choose2(m.size());
    }
    const std::size_t cross_available = choose2(total) - same_available;

    const auto n_similar = static_cast<std::size_t>(std::llround(static_cast<double>(n) * balance));
    const auto n_dissimilar = n - n_similar;
    if (n_similar > 0 && same_available == 0) {
        throw DataError("generate_pairs: no class has 2 members, cannot draw similar pairs");
    }
    if (replacement == Replacement::never) {
        if (n_similar > same_available) {
            throw DataError("generate_pairs: " + std::to_string(n_similar) + " similar pairs requested, only " +
                            std::to_string(same_available) + " distinct combinations exist");
        }
        if (n_dissimilar > cross_available) {
            throw DataError("generate_pairs: " + std::to_string(n_dissimilar) + " dissimilar pairs requested, only " +
                            std::to_string(cross_available) + " distinct combinations exist");
        }
    }

    Rng rng(derive_seed(seed, {stream::pairs}));
    std::bernoulli_distribution flip(0.5);
    auto oriented = [&](std::size_t a, std::size_t b, int y) {
        return flip(rng) ? Pair{b, a, y} : Pair{a, b, y};
    };

    std::vector<Pair> out;
    out.reserve(n);

    // Similar pairs: class chosen with probability proportional to its
    // combination count, so every same-class combination is equally likely.
    {
        std::vector<double> class_weight;
        for (const auto& m : members) {
            class_weight.push_back(static_cast<double>(choose2(m.size())));
        }
        std::discrete_distribution<std::size_t> pick_class(class_weight.begin(), class_weight.end());
        auto draw_similar = [&]() -> std::pair<std::size_t, std::size_t> {
            const auto& m = members[pick_class(rng)];
            std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
            const auto a = pick(rng);
            auto b = pick(rng);
            while (b == a) {
                b = pick(rng);
            }
            return {m[a], m[b]};
        };

        if (n_similar > same_available || n_similar == 0) {
            for (std::size_t k = 0; k < n_similar; ++k) {
                const auto [a, b] = draw_similar();
                out.push_back(oriented(a, b, 0));
            }
        } else if (2 * n_similar > same_available) {
            std::vector<std::pair<std::size_t, std::size_t>> all;
            all.reserve(same_available);
            for (const auto& m : members) {
                for (std::size_t a = 0; a < m.size(); ++a) {
                    for (std::size_t b = a + 1; b < m.size(); ++b) {
                        all.emplace_back(m[a], m[b]);
                    }
                }
            }
            std::shuffle(all.begin(), all.end(), rng);
            for (std::size_t k = 0; k < n_similar; ++k) {
                out.push_back(oriented(all[k].first, all[k].second, 0));
            }
        } else {
            std::unordered_set<std::uint64_t> seen;
            while (seen.size() < n_similar) {
                const auto [a, b] = draw_similar();
                if (seen.insert(combination_key(a, b, total)).second) {
                    out.push_back(oriented(a, b, 0));
                }
            }
        }
    }

    // Dissimilar pairs: uniform over cross-class combinations by rejection.
    {
        std::uniform_int_distribution<std::size_t> pick(0, total - 1);
        auto draw_dissimilar = [&]() -> std::pair<std::size_t, std::size_t> {
            while (true) {
                const auto a = pick(rng);
                const auto b = pick(rng);
                if (cls[a] != cls[b]) {
                    return {a, b};
                }
            }
        };

        if (n_dissimilar > cross_available || n_dissimilar == 0) {
            for (std::size_t k = 0; k < n_dissimilar; ++k) {
                const auto [a, b] = draw_dissimilar();
                out.push_back(oriented(a, b, 1));
            }
        } else if (2 * n_dissimilar > cross_available) {
            std::vector<std::pair<std::size_t, std::size_t>> all;
            all.reserve(cross_available);
            for (std::size_t a = 0; a < total; ++a) {
                for (std::size_t b = a + 1; b < total; ++b) {
                    if (cls[a] != cls[b]) {
                        all.emplace_back(a, b);
                    }
                }
            }
            std::shuffle(all.begin(), all.end(), rng);
            for (std::size_t k = 0; k < n_dissimilar; ++k) {
                out.push_back(oriented(all[k].first, all[k].second, 1));
            }
        } else {
            std::unordered_set<std::uint64_t> seen;
            while (seen.size() < n_dissimilar) {
                const auto [a, b] = draw_dissimilar();
                if (seen.insert(combination_key(a, b, total)).second) {
                    out.push_back(oriented(a, b, 1));
                }
            }
        }
    }

    std::shuffle(out.begin(), out.end(), rng);
    return PairDataset{std::move(out), std::move(ds)};
}

std::size_t test_size_for(std::size_t n_train) { return (2 * n_train + 2) / 3; }

std::pair<PairDataset, PairDataset> split_pairs(const PairDataset& pd, std::size_t n_train, std::uint64_t seed) {
    const auto n_test = test_size_for(n_train);
    if (pd.size() < n_train + n_test) {
        throw DataError("split_pairs: " + std::to_string(n_train) + " training pairs need " +
                        std::to_string(n_train + n_test) + " pairs in total, have " + std::to_string(pd.size()));
    }
    std::vector<std::size_t> order(pd.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, {stream::split}));
    std::shuffle(order.begin(), order.end(), rng);

    PairDataset train{{}, pd.source};
    PairDataset test{{}, pd.source};
    train.pairs.reserve(n_train);
    test.pairs.reserve(n_test);
    for (std::size_t k = 0; k < n_train; ++k) {
        train.pairs.push_back(pd.pairs[order[k]]);
    }
    for (std::size_t k = n_train; k < n_train + n_test; ++k) {
        test.pairs.push_back(pd.pairs[order[k]]);
    }
    return {std::move(train), std::move(test)};
}

std::vector<double> concatenate_pair(const Sample& a, const Sample& b) {
    if (a.features.size() != b.features.size()) {
        throw DataError("concatenate_pair: dimension mismatch (" + std::to_string(a.features.size()) + " vs " +
                        std::to_string(b.features.size()) + ")");
    }
    if (a.features.empty()) {
        throw DataError("concatenate_pair: samples have no features");
    }
    std::vector<double> out;
    out.reserve(2 * a.features.size());
    out.insert(out.end(), a.features.begin(), a.features.end());
    out.insert(out.end(), b.features.begin(), b.features.end());
    return out;
}

PairDataset read_pairs_csv(const std::filesystem::path& path, std::shared_ptr<const LabeledDataset> source) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    PairDataset pd{{}, std::move(source)};
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_commas(line);
        if (!header_seen) {
            if (cells.size() != 3 || cells[0] != "i" || cells[1] != "j" || cells[2] != "y") {
                throw DataError(path.string() + ": expected header \"i,j,y\"");
            }
            header_seen = true;
            continue;
        }
        if (cells.size() != 3) {
            throw DataError(path.string() + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " columns, expected 3");
        }
        Pair p;
        unsigned y = 0;
        if (!parse_unsigned(cells[0], p.i) || !parse_unsigned(cells[1], p.j) || !parse_unsigned(cells[2], y)) {
            throw DataError(path.string() + ": row " + std::to_string(line_no) + " is not \"i,j,y\" integers");
        }
        p.y = static_cast<int>(y);
        pd.pairs.push_back(p);
    }
    if (!header_seen) {
        throw DataError(path.string() + ": empty pair file");
    }
    pd.validate();
    return pd;
}

void write_pairs_csv(const PairDataset& pd, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "i,j,y\n";
    for (const auto& p : pd.pairs) {
        out << p.i << ',' << p.j << ',' << p.y << '\n';
    }
    if (!out) {
        throw DataError("write failed: " + path.string());
    }
}

} // namespace sdf
