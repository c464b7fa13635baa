#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rnnevo/data.hpp"
#include "rnnevo/evolution.hpp"
#include "rnnevo/islands.hpp"
#include "rnnevo/trainer.hpp"

namespace rnnevo {

inline constexpr int kRunConfigVersion = 1;
inline constexpr const char* kOutputDirEnv = "RNNEVO_OUTPUT_DIR";

struct FoldSettings {
    int k = 0;          // 0: derive from fold_size
    int fold_size = 2;  // files per validation fold
    int repeats = 1;
};

struct RunConfig {
    std::vector<std::string> data_paths;
    std::string target_column = "target";
    NormalizeMode normalize = NormalizeMode::minmax;
    FoldSettings folds;
    IslandConfig islands;
    TrainingConfig training;
    OperatorConfig operators;
    std::uint64_t seed = 1;
    std::string output_dir = "rnnevo-out";
    int n_workers = 1;
    std::int64_t progress_every = 0;  // 0 disables progress lines

    /// Throws std::invalid_argument when an invariant does not hold.
    void check() const;
};

/// Label of a cell-type set: "lstm", "lstm+simple", "all" (every type), or
/// the sorted names joined by '+' for other sets.
std::string run_type_label(std::span<const CellType> types);
std::optional<std::vector<CellType>> parse_run_type(std::string_view label);

/// The eleven standard run types: each memory cell alone, each memory cell
/// with simple neurons, and all types together.
std::vector<std::string> standard_run_types();

nlohmann::ordered_json to_json(const RunConfig& config);

/// Missing keys keep their defaults; unknown keys and version mismatches
/// throw std::invalid_argument.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

/// Replaces output_dir with $RNNEVO_OUTPUT_DIR when it is set and non-empty.
void apply_environment(RunConfig& config);

}  // namespace rnnevo
