#include "rnnevo/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

namespace rnnevo {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads keys from one object and rejects any it was not asked about.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw std::invalid_argument(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(path_ + "." + key + ": " + e.what());
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string path(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw std::invalid_argument(path_ + ": unknown key '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string granularity_name(UpdateGranularity g) {
    return g == UpdateGranularity::per_series ? "per_series" : "per_epoch";
}

UpdateGranularity parse_granularity(const std::string& name) {
    if (name == "per_series") return UpdateGranularity::per_series;
    if (name == "per_epoch") return UpdateGranularity::per_epoch;
    throw std::invalid_argument("unknown update granularity '" + name + "'");
}

}  // namespace

void RunConfig::check() const {
    if (target_column.empty()) throw std::invalid_argument("target column must be named");
    if (folds.k < 0 || folds.k == 1) throw std::invalid_argument("folds.k must be 0 (derived) or >= 2");
    if (folds.k == 0 && folds.fold_size < 1) throw std::invalid_argument("folds.fold_size must be >= 1");
    if (folds.repeats < 1) throw std::invalid_argument("folds.repeats must be >= 1");
    if (n_workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (progress_every < 0) throw std::invalid_argument("progress_every must be >= 0");
    if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
    islands.check();
    training.check();
    operators.check();
}

std::string run_type_label(std::span<const CellType> types) {
    std::vector<CellType> sorted(types.begin(), types.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.size() == kAllCellTypes.size()) return "all";
    const bool has_simple = !sorted.empty() && sorted.front() == CellType::simple;
    std::string label;
    for (auto t : sorted) {
        if (t == CellType::simple && sorted.size() > 1) continue;
        if (!label.empty()) label += '+';
        label += to_string(t);
    }
    if (has_simple && sorted.size() > 1) label += "+simple";
    return label;
}

std::optional<std::vector<CellType>> parse_run_type(std::string_view label) {
    if (label == "all") return std::vector<CellType>(kAllCellTypes.begin(), kAllCellTypes.end());
    std::vector<CellType> out;
    std::size_t pos = 0;
    while (pos <= label.size()) {
        auto end = label.find('+', pos);
        if (end == std::string_view::npos) end = label.size();
        const auto t = parse_cell_type(label.substr(pos, end - pos));
        if (!t || std::find(out.begin(), out.end(), *t) != out.end()) return std::nullopt;
        out.push_back(*t);
        pos = end + 1;
    }
    return out;
}

std::vector<std::string> standard_run_types() {
    std::vector<std::string> out;
    for (const char* suffix : {"", "+simple"}) {
        for (auto t : kAllCellTypes) {
            if (t != CellType::simple) out.push_back(std::string(to_string(t)) + suffix);
        }
    }
    out.push_back("all");
    return out;
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["version"] = kRunConfigVersion;
    j["data"] = c.data_paths;
    j["target"] = c.target_column;
    j["normalize"] = c.normalize == NormalizeMode::minmax ? "minmax" : "none";
    j["folds"] = {{"k", c.folds.k}, {"fold_size", c.folds.fold_size}, {"repeats", c.folds.repeats}};
    j["islands"] = {{"count", c.islands.n_islands},
                    {"population", c.islands.population_size},
                    {"budget", c.islands.generation_budget}};
    j["training"] = {{"learning_rate", c.training.learning_rate},
                     {"momentum", c.training.nesterov_mu},
                     {"clip", c.training.clip_threshold},
                     {"boost", c.training.boost_threshold},
                     {"epochs", c.training.epochs},
                     {"forget_bias", c.training.lstm_forget_bias_offset},
                     {"granularity", granularity_name(c.training.granularity)},
                     {"shuffle", c.training.shuffle_series}};
    ordered_json weights;
    for (std::size_t k = 0; k < kMutationOpCount; ++k) {
        weights[std::string(to_string(static_cast<MutationOp>(k)))] = c.operators.mutation_weights[k];
    }
    j["operators"] = {{"run_type", run_type_label(c.operators.allowed_cell_types)},
                      {"mutation_weights", weights},
                      {"intra_crossover", c.operators.p_intra_crossover},
                      {"mutation", c.operators.p_mutation},
                      {"inter_crossover", c.operators.p_inter_crossover},
                      {"max_skip", c.operators.max_skip},
                      {"r_min", c.operators.crossover_r_min},
                      {"r_max", c.operators.crossover_r_max},
                      {"max_retries", c.operators.max_retries}};
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.n_workers;
    j["progress_every"] = c.progress_every;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    Section top(j, "config");
    int version = kRunConfigVersion;
    top.get("version", version);
    if (version != kRunConfigVersion) {
        throw std::invalid_argument("config version " + std::to_string(version) + " is not supported (expected " +
                                    std::to_string(kRunConfigVersion) + ")");
    }
    top.get("data", c.data_paths);
    top.get("target", c.target_column);
    std::string normalize = "minmax";
    top.get("normalize", normalize);
    c.normalize = parse_normalize_mode(normalize);
    if (const auto* f = top.child("folds")) {
        Section s(*f, top.path("folds"));
        s.get("k", c.folds.k);
        s.get("fold_size", c.folds.fold_size);
        s.get("repeats", c.folds.repeats);
        s.finish();
    }
    if (const auto* i = top.child("islands")) {
        Section s(*i, top.path("islands"));
        s.get("count", c.islands.n_islands);
        s.get("population", c.islands.population_size);
        s.get("budget", c.islands.generation_budget);
        s.finish();
    }
    if (const auto* t = top.child("training")) {
        Section s(*t, top.path("training"));
        s.get("learning_rate", c.training.learning_rate);
        s.get("momentum", c.training.nesterov_mu);
        s.get("clip", c.training.clip_threshold);
        s.get("boost", c.training.boost_threshold);
        s.get("epochs", c.training.epochs);
        s.get("forget_bias", c.training.lstm_forget_bias_offset);
        std::string g = granularity_name(c.training.granularity);
        s.get("granularity", g);
        c.training.granularity = parse_granularity(g);
        s.get("shuffle", c.training.shuffle_series);
        s.finish();
    }
    if (const auto* o = top.child("operators")) {
        Section s(*o, top.path("operators"));
        std::string run_type;
        s.get("run_type", run_type);
        std::vector<std::string> cell_types;
        s.get("cell_types", cell_types);
        if (!run_type.empty() && !cell_types.empty()) {
            throw std::invalid_argument("operators: give either run_type or cell_types, not both");
        }
        if (!run_type.empty()) {
            const auto types = parse_run_type(run_type);
            if (!types) throw std::invalid_argument("operators.run_type: unknown run type '" + run_type + "'");
            c.operators.allowed_cell_types = *types;
        }
        if (!cell_types.empty()) {
            c.operators.allowed_cell_types.clear();
            for (const auto& name : cell_types) {
                const auto t = parse_cell_type(name);
                if (!t) throw std::invalid_argument("operators.cell_types: unknown cell type '" + name + "'");
                c.operators.allowed_cell_types.push_back(*t);
            }
        }
        if (const auto* w = s.child("mutation_weights")) {
            if (!w->is_object()) throw std::invalid_argument("operators.mutation_weights: expected an object");
            for (const auto& [name, value] : w->items()) {
                const auto op = parse_mutation_op(name);
                if (!op) throw std::invalid_argument("operators.mutation_weights: unknown operator '" + name + "'");
                c.operators.weight(*op) = value.get<double>();
            }
        }
        s.get("intra_crossover", c.operators.p_intra_crossover);
        s.get("mutation", c.operators.p_mutation);
        s.get("inter_crossover", c.operators.p_inter_crossover);
        s.get("max_skip", c.operators.max_skip);
        s.get("r_min", c.operators.crossover_r_min);
        s.get("r_max", c.operators.crossover_r_max);
        s.get("max_retries", c.operators.max_retries);
        s.finish();
    }
    top.get("seed", c.seed);
    top.get("output_dir", c.output_dir);
    top.get("workers", c.n_workers);
    top.get("progress_every", c.progress_every);
    top.finish();
    c.check();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return run_config_from_json(j);
}

void save_run_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(config).dump(2) << '\n';
}

void apply_environment(RunConfig& config) {
    const char* dir = std::getenv(kOutputDirEnv);
    if (dir && *dir) config.output_dir = dir;
}

}  // namespace rnnevo
