#include "sdf/persist.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sdf/error.hpp"

namespace sdf {

using nlohmann::json;

namespace {

// Schema access: every failure names the JSON path and throws E.
template <typename E>
const json& field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) {
        throw E(where + ": expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw E(where + ": missing key '" + key + "'");
    }
    return *it;
}

template <typename T, typename E>
T as(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw E(where + ": expected a boolean");
    } else if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw E(where + ": expected a nonnegative integer");
        }
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw E(where + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw E(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw E(where + ": expected a string");
    }
    return v.get<T>();
}

template <typename T>
T get_data(const json& obj, const std::string& key, const std::string& where) {
    return as<T, DataError>(field<DataError>(obj, key, where), where + "." + key);
}

const json& array_field(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = field<DataError>(obj, key, where);
    if (!v.is_array()) {
        throw DataError(where + "." + key + ": expected an array");
    }
    return v;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void override_from(const json& obj, const char* key, T& target, const std::string& where) {
    if (const auto it = obj.find(key); it != obj.end()) {
        target = as<T, ConfigError>(*it, where + "." + key);
    }
}

json scan_config_to_json(const ScanConfig& s) {
    return {{"enabled", s.enabled},
            {"shape", s.shape == ScanShape::vector_1d ? "vector" : "image"},
            {"height", s.height},
            {"width", s.width},
            {"window_divisors", s.window_divisors},
            {"trees_per_forest", s.trees_per_forest}};
}

ScanConfig scan_config_from_json(const json& j, ScanConfig s) {
    const std::string where = "config.scanning";
    reject_unknown(j, {"enabled", "shape", "height", "width", "window_divisors", "trees_per_forest"}, where);
    override_from(j, "enabled", s.enabled, where);
    if (const auto it = j.find("shape"); it != j.end()) {
        const auto shape = as<std::string, ConfigError>(*it, where + ".shape");
        if (shape == "vector") {
            s.shape = ScanShape::vector_1d;
        } else if (shape == "image") {
            s.shape = ScanShape::image_2d;
        } else {
            throw ConfigError(where + ".shape: expected 'vector' or 'image', got '" + shape + "'");
        }
    }
    override_from(j, "height", s.height, where);
    override_from(j, "width", s.width, where);
    override_from(j, "trees_per_forest", s.trees_per_forest, where);
    if (const auto it = j.find("window_divisors"); it != j.end()) {
        if (!it->is_array()) {
            throw ConfigError(where + ".window_divisors: expected an array");
        }
        s.window_divisors.clear();
        for (const auto& v : *it) {
            s.window_divisors.push_back(as<std::size_t, ConfigError>(v, where + ".window_divisors[]"));
        }
    }
    return s;
}

json tree_config_to_json(const TreeConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"mtry", c.mtry},
            {"min_leaf", c.min_leaf},
            {"max_depth", c.max_depth ? json(*c.max_depth) : json(nullptr)},
            {"bootstrap", c.bootstrap},
            {"laplace", c.laplace}};
}

TreeConfig tree_config_from_json(const json& j, const std::string& where) {
    TreeConfig c;
    try {
        c.kind = tree_kind_from_string(get_data<std::string>(j, "kind", where));
    } catch (const ConfigError& e) {
        throw DataError(where + ".kind: " + e.what());
    }
    c.mtry = get_data<std::size_t>(j, "mtry", where);
    c.min_leaf = get_data<std::size_t>(j, "min_leaf", where);
    const auto& depth = field<DataError>(j, "max_depth", where);
    if (!depth.is_null()) {
        c.max_depth = as<std::size_t, DataError>(depth, where + ".max_depth");
    }
    c.bootstrap = get_data<bool>(j, "bootstrap", where);
    c.laplace = get_data<bool>(j, "laplace", where);
    return c;
}

json tree_to_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
        if (n.is_leaf()) {
            nodes.push_back({{"dist", {n.dist[0], n.dist[1]}}});
        } else {
            nodes.push_back({{"f", n.feature}, {"thr", n.threshold}, {"l", n.left}, {"r", n.right}});
        }
    }
    return {{"config", tree_config_to_json(t.config())}, {"seed", t.seed()}, {"width", t.width()}, {"nodes", nodes}};
}

DecisionTree tree_from_json(const json& j, const std::string& where) {
    std::vector<TreeNode> nodes;
    const auto& arr = array_field(j, "nodes", where);
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& n = arr[k];
        const auto at = where + ".nodes[" + std::to_string(k) + "]";
        TreeNode node;
        if (n.is_object() && n.contains("dist")) {
            const auto& dist = array_field(n, "dist", at);
            if (dist.size() != 2) {
                throw DataError(at + ".dist: expected 2 entries");
            }
            node.dist = {as<double, DataError>(dist[0], at + ".dist[0]"), as<double, DataError>(dist[1], at + ".dist[1]")};
        } else {
            node.feature = get_data<std::int32_t>(n, "f", at);
            if (node.feature < 0) {
                throw DataError(at + ".f: feature index must be >= 0");
            }
            node.threshold = get_data<double>(n, "thr", at);
            node.left = get_data<std::int32_t>(n, "l", at);
            node.right = get_data<std::int32_t>(n, "r", at);
        }
        nodes.push_back(node);
    }
    return DecisionTree(std::move(nodes), tree_config_from_json(field<DataError>(j, "config", where), where + ".config"),
                        get_data<std::uint64_t>(j, "seed", where), get_data<std::size_t>(j, "width", where));
}

json forest_to_json(const Forest& f) {
    json trees = json::array();
    for (const auto& t : f.trees()) {
        trees.push_back(tree_to_json(t));
    }
    const auto w = f.weights().values();
    return {{"kind", to_string(f.kind())}, {"weights", std::vector<double>(w.begin(), w.end())}, {"trees", trees}};
}

// Invariant failures are re-thrown with `where` (level/slot/fold) prefixed.
Forest forest_from_json(const json& j, const std::string& where) {
    TreeKind kind;
    try {
        kind = tree_kind_from_string(get_data<std::string>(j, "kind", where));
    } catch (const ConfigError& e) {
        throw DataError(where + ".kind: " + e.what());
    }
    std::vector<double> weights;
    for (const auto& v : array_field(j, "weights", where)) {
        weights.push_back(as<double, DataError>(v, where + ".weights[]"));
    }
    try {
        std::vector<DecisionTree> trees;
        const auto& arr = array_field(j, "trees", where);
        for (std::size_t t = 0; t < arr.size(); ++t) {
            trees.push_back(tree_from_json(arr[t], where + ".trees[" + std::to_string(t) + "]"));
        }
        return Forest(kind, std::move(trees), WeightVector(std::move(weights)));
    } catch (const InvariantError& e) {
        throw InvariantError(where + ": " + e.what());
    }
}

std::string level_slot_fold(std::size_t q, std::size_t k, std::size_t f) {
    return "level " + std::to_string(q + 1) + " slot " + std::to_string(k) + " fold " + std::to_string(f);
}

json qp_stats_to_json(const QPStats& s) {
    return {{"initial", s.initial_objective},
            {"final", s.final_objective},
            {"iterations", s.iterations},
            {"converged", s.converged}};
}

QPStats qp_stats_from_json(const json& j, const std::string& where) {
    return {get_data<double>(j, "initial", where), get_data<double>(j, "final", where),
            get_data<std::size_t>(j, "iterations", where), get_data<bool>(j, "converged", where)};
}

} // namespace

json config_to_json(const CascadeConfig& c) {
    return {{"max_levels", c.max_levels},
            {"forests_per_level", c.forests_per_level},
            {"trees_per_forest", c.trees_per_forest},
            {"cv_folds", c.cv_folds},
            {"lambda", c.qp.lambda},
            {"qp", {{"tol", c.qp.tol}, {"max_iter", c.qp.max_iter}, {"z_multiplier", c.qp.z_multiplier}}},
            {"z_schedule", to_string(c.z_schedule)},
            {"augmentation", to_string(c.augmentation)},
            {"val_fraction", c.val_fraction},
            {"epsilon_gain", c.epsilon_gain},
            {"tau", c.tau},
            {"seed", c.seed},
            {"weighting", to_string(c.weighting)},
            {"scanning", scan_config_to_json(c.scanning)}};
}

CascadeConfig config_from_json(const json& j, const CascadeConfig& base) {
    const std::string where = "config";
    reject_unknown(j,
                   {"max_levels", "forests_per_level", "trees_per_forest", "cv_folds", "lambda", "qp", "z_schedule",
                    "augmentation", "val_fraction", "epsilon_gain", "tau", "seed", "weighting", "scanning"},
                   where);
    CascadeConfig c = base;
    override_from(j, "max_levels", c.max_levels, where);
    override_from(j, "forests_per_level", c.forests_per_level, where);
    override_from(j, "trees_per_forest", c.trees_per_forest, where);
    override_from(j, "cv_folds", c.cv_folds, where);
    override_from(j, "lambda", c.qp.lambda, where);
    override_from(j, "val_fraction", c.val_fraction, where);
    override_from(j, "epsilon_gain", c.epsilon_gain, where);
    override_from(j, "tau", c.tau, where);
    override_from(j, "seed", c.seed, where);
    if (const auto it = j.find("qp"); it != j.end()) {
        reject_unknown(*it, {"tol", "max_iter", "z_multiplier"}, where + ".qp");
        override_from(*it, "tol", c.qp.tol, where + ".qp");
        override_from(*it, "max_iter", c.qp.max_iter, where + ".qp");
        override_from(*it, "z_multiplier", c.qp.z_multiplier, where + ".qp");
    }
    if (const auto it = j.find("z_schedule"); it != j.end()) {
        c.z_schedule = z_schedule_from_string(as<std::string, ConfigError>(*it, where + ".z_schedule"));
    }
    if (const auto it = j.find("augmentation"); it != j.end()) {
        c.augmentation = augmentation_from_string(as<std::string, ConfigError>(*it, where + ".augmentation"));
    }
    if (const auto it = j.find("weighting"); it != j.end()) {
        c.weighting = weighting_from_string(as<std::string, ConfigError>(*it, where + ".weighting"));
    }
    if (const auto it = j.find("scanning"); it != j.end()) {
        c.scanning = scan_config_from_json(*it, c.scanning);
    }
    c.validate();
    return c;
}

CascadeConfig load_config(const std::filesystem::path& path, const CascadeConfig& base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j, base);
}

json model_to_json(const SDFModel& m) {
    json levels = json::array();
    for (const auto& level : m.levels) {
        json slots = json::array();
        for (const auto& folds : level.forests) {
            json fs = json::array();
            for (const auto& f : folds) {
                fs.push_back(forest_to_json(f));
            }
            slots.push_back(fs);
        }
        levels.push_back({{"input_width", level.input_width}, {"base_width", level.base_width}, {"forests", slots}});
    }

    json scanning = nullptr;
    if (m.scanners.enabled()) {
        json forests = json::array();
        for (const auto& pair : m.scanners.forests) {
            json fs = json::array();
            for (const auto& f : pair) {
                fs.push_back(forest_to_json(f));
            }
            forests.push_back(fs);
        }
        scanning = {{"sizes", m.scanners.sizes}, {"forests", forests}};
    }

    json stats = json::array();
    for (const auto& level : m.metadata.qp_stats) {
        json slots = json::array();
        for (const auto& folds : level) {
            json fs = json::array();
            for (const auto& s : folds) {
                fs.push_back(qp_stats_to_json(s));
            }
            slots.push_back(fs);
        }
        stats.push_back(slots);
    }

    return {{"format_version", kFormatVersion},
            {"config", config_to_json(m.config)},
            {"d", m.d},
            {"scanning", scanning},
            {"levels", levels},
            {"metadata",
             {{"seed", m.metadata.seed},
              {"train_pair_count", m.metadata.train_pair_count},
              {"validation_trace", m.metadata.validation_trace},
              {"qp_stats", stats}}}};
}

SDFModel model_from_json(const json& j) {
    const std::string where = "model";
    const auto version = get_data<std::int64_t>(j, "format_version", where);
    if (version != kFormatVersion) {
        throw DataError("unsupported format_version " + std::to_string(version) + " (this build reads version " +
                        std::to_string(kFormatVersion) + ")");
    }

    SDFModel m;
    try {
        m.config = config_from_json(field<DataError>(j, "config", where));
    } catch (const ConfigError& e) {
        throw DataError(std::string("model config: ") + e.what());
    }
    m.d = get_data<std::size_t>(j, "d", where);

    m.scanners.config = m.config.scanning;
    if (const auto& scan = field<DataError>(j, "scanning", where); !scan.is_null()) {
        m.scanners.d = m.d;
        for (const auto& v : array_field(scan, "sizes", where + ".scanning")) {
            m.scanners.sizes.push_back(as<std::size_t, DataError>(v, where + ".scanning.sizes[]"));
        }
        const auto& forests = array_field(scan, "forests", where + ".scanning");
        for (std::size_t s = 0; s < forests.size(); ++s) {
            std::vector<Forest> pair;
            for (std::size_t k = 0; k < forests[s].size(); ++k) {
                pair.push_back(forest_from_json(forests[s][k], "scanning size " + std::to_string(s) + " forest " +
                                                                   std::to_string(k)));
            }
            m.scanners.forests.push_back(std::move(pair));
        }
    }

    const auto& levels = array_field(j, "levels", where);
    for (std::size_t q = 0; q < levels.size(); ++q) {
        const auto at = where + ".levels[" + std::to_string(q) + "]";
        Level level;
        level.input_width = get_data<std::size_t>(levels[q], "input_width", at);
        level.base_width = get_data<std::size_t>(levels[q], "base_width", at);
        level.augmentation = m.config.augmentation;
        const auto& slots = array_field(levels[q], "forests", at);
        for (std::size_t k = 0; k < slots.size(); ++k) {
            if (!slots[k].is_array()) {
                throw DataError(at + ".forests[" + std::to_string(k) + "]: expected an array");
            }
            std::vector<Forest> folds;
            for (std::size_t f = 0; f < slots[k].size(); ++f) {
                folds.push_back(forest_from_json(slots[k][f], level_slot_fold(q, k, f)));
            }
            level.forests.push_back(std::move(folds));
        }
        m.levels.push_back(std::move(level));
    }

    const auto& meta = field<DataError>(j, "metadata", where);
    m.metadata.seed = get_data<std::uint64_t>(meta, "seed", where + ".metadata");
    m.metadata.train_pair_count = get_data<std::size_t>(meta, "train_pair_count", where + ".metadata");
    for (const auto& v : array_field(meta, "validation_trace", where + ".metadata")) {
        m.metadata.validation_trace.push_back(as<double, DataError>(v, where + ".metadata.validation_trace[]"));
    }
    for (const auto& level : array_field(meta, "qp_stats", where + ".metadata")) {
        std::vector<std::vector<QPStats>> slots;
        for (const auto& folds : level) {
            std::vector<QPStats> fs;
            for (const auto& s : folds) {
                fs.push_back(qp_stats_from_json(s, where + ".metadata.qp_stats"));
            }
            slots.push_back(std::move(fs));
        }
        m.metadata.qp_stats.push_back(std::move(slots));
    }

    m.validate();
    return m;
}

std::string dump_canonical(const json& j) { return j.dump(1, ' ') + "\n"; }

void save_model(const SDFModel& m, const std::filesystem::path& path) {
    const auto text = dump_canonical(model_to_json(m));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write model to " + path.string());
    }
    out << text;
    if (!out.flush()) {
        throw DataError("write failed for " + path.string());
    }
}

SDFModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open model " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("model " + path.string() + ": parse error: " + e.what());
    }
    return model_from_json(j);
}

} // namespace sdf
