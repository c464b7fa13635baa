#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rnnevo/config.hpp"
#include "rnnevo/data.hpp"
#include "rnnevo/runtime.hpp"
#include "rnnevo/stats.hpp"

namespace rnnevo {

/// Seed of one (fold, repeat) run.
std::uint64_t run_seed(std::uint64_t base, int fold, int repeat);

FoldPlan plan_folds(const RunConfig& config, std::size_t n_files);

/// Normalized training/validation frames of one fold plus its persistence
/// baseline on the validation files (training files when there are none).
struct PreparedFold {
    EvaluationData data;
    double persistence_mse = 0.0;
};

PreparedFold prepare_fold(const RunConfig& config, const std::vector<TimeSeriesFile>& files, const FoldPlan& plan,
                          int fold);

struct RunResult {
    RunStats stats;
    RunReport report;
    RnnGenome seed;  // the genome every island was bootstrapped from
};

RunResult execute_run(const RunConfig& config, const PreparedFold& prepared, int fold, int repeat,
                      const std::optional<RnnGenome>& seed_genome = std::nullopt, std::ostream* progress = nullptr);

/// <output_dir>/<run type>/fold<F>-repeat<R>
std::string run_directory(const RunConfig& config, int fold, int repeat);

/// Writes config.json, stats.json, events.jsonl, schedule.txt, seed.genome,
/// best.genome and trajectory.csv into `dir`.
void write_run_outputs(const RunConfig& config, const RunResult& result, const std::string& dir);

struct ExperimentResult {
    std::vector<RunStats> runs;
    std::vector<std::string> failures;  // one message per failed run
};

/// Every (fold, repeat) run in order; a failing run is recorded and the
/// experiment moves on. Also writes summary tables into output_dir.
ExperimentResult run_experiment(const RunConfig& config, std::ostream* progress = nullptr,
                                const std::optional<RnnGenome>& seed_genome = std::nullopt);

std::vector<TimeSeriesFile> load_files(const std::vector<std::string>& paths);

struct ReplayCheck {
    bool identical = false;  // event log and populations both match
    RunReport report;
};

/// Re-executes a run directory's schedule and compares against its saved
/// event log and best genome.
ReplayCheck replay_run(const std::string& run_dir);

}  // namespace rnnevo
