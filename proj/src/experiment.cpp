#include "rnnevo/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rnnevo {

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::uint64_t run_seed(std::uint64_t base, int fold, int repeat) {
    return derive_seed(base, static_cast<std::uint64_t>(fold), static_cast<std::uint64_t>(repeat));
}

FoldPlan plan_folds(const RunConfig& config, std::size_t n_files) {
    if (config.folds.k > 0) return make_folds(n_files, config.folds.k, config.seed, config.folds.repeats);
    return make_folds_by_size(n_files, static_cast<std::size_t>(config.folds.fold_size), config.seed,
                              config.folds.repeats);
}

PreparedFold prepare_fold(const RunConfig& config, const std::vector<TimeSeriesFile>& files, const FoldPlan& plan,
                          int fold) {
    const auto training = plan.training_files(fold);
    const auto validation = plan.validation_files(fold);
    const auto set = build_series_set(files, training, config.target_column, config.normalize);
    PreparedFold out;
    out.data = make_evaluation_data(set, training, validation);
    const auto at = std::find(set.input_columns.begin(), set.input_columns.end(), config.target_column);
    const auto column = static_cast<std::size_t>(at - set.input_columns.begin());
    out.persistence_mse =
        persistence_mse(out.data.validation.empty() ? out.data.training : out.data.validation, column);
    return out;
}

RunResult execute_run(const RunConfig& config, const PreparedFold& prepared, int fold, int repeat,
                      const std::optional<RnnGenome>& seed_genome, std::ostream* progress) {
    const auto seed = run_seed(config.seed, fold, repeat);
    RunState state(config.islands, config.operators, static_cast<int>(prepared.data.n_inputs),
                   static_cast<int>(prepared.data.n_outputs), seed, seed_genome);
    auto seed_copy = state.seed();
    const auto evaluate = make_trainer_evaluator(prepared.data, config.training);
    RuntimeOptions options;
    options.n_workers = config.n_workers;
    options.progress = config.progress_every > 0 ? progress : nullptr;
    options.progress_every = config.progress_every;
    auto report = run(std::move(state), evaluate, seed, options);

    RunStats stats = describe_best(report.state.best_genome());
    stats.run_type = run_type_label(config.operators.allowed_cell_types);
    stats.fold = fold;
    stats.repeat = repeat;
    stats.seed = seed;
    stats.generated = report.state.generated_count();
    stats.inserted = report.state.inserted_count();
    stats.diverged = report.state.diverged_count();
    stats.failed = report.state.failed_count();
    stats.persistence_mse = prepared.persistence_mse;
    return {std::move(stats), std::move(report), std::move(seed_copy)};
}

std::string run_directory(const RunConfig& config, int fold, int repeat) {
    return config.output_dir + "/" + run_type_label(config.operators.allowed_cell_types) + "/fold" +
           std::to_string(fold) + "-repeat" + std::to_string(repeat);
}

void write_run_outputs(const RunConfig& config, const RunResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_run_config(config, dir + "/config.json");
    save_run_stats(result.stats, dir + "/stats.json");
    result.report.state.log().write(dir + "/events.jsonl");
    result.report.schedule.write(dir + "/schedule.txt");
    save_genome(result.seed, dir + "/seed.genome");
    save_genome(result.report.state.best_genome(), dir + "/best.genome");
    write_text(dir + "/trajectory.csv", plot_data(result.report.state.log()));
}

std::vector<TimeSeriesFile> load_files(const std::vector<std::string>& paths) {
    if (paths.empty()) throw std::invalid_argument("no data files given");
    std::vector<TimeSeriesFile> files;
    for (const auto& p : paths) files.push_back(load_csv(p));
    return files;
}

ExperimentResult run_experiment(const RunConfig& config, std::ostream* progress,
                                const std::optional<RnnGenome>& seed_genome) {
    config.check();
    const auto files = load_files(config.data_paths);
    const auto plan = plan_folds(config, files.size());
    std::filesystem::create_directories(config.output_dir);
    save_run_config(config, config.output_dir + "/config.json");

    ExperimentResult result;
    for (int fold = 0; fold < plan.k; ++fold) {
        std::optional<PreparedFold> prepared;
        for (int repeat = 0; repeat < config.folds.repeats; ++repeat) {
            const auto where = "fold " + std::to_string(fold) + " repeat " + std::to_string(repeat);
            try {
                if (!prepared) prepared = prepare_fold(config, files, plan, fold);
                if (progress) *progress << "run " << where << '\n' << std::flush;
                auto run = execute_run(config, *prepared, fold, repeat, seed_genome, progress);
                write_run_outputs(config, run, run_directory(config, fold, repeat));
                if (progress) {
                    *progress << "run " << where << " best " << run.stats.best_mse << " persistence "
                              << *run.stats.persistence_mse << '\n'
                              << std::flush;
                }
                result.runs.push_back(std::move(run.stats));
            } catch (const std::exception& e) {
                result.failures.push_back(where + ": " + e.what());
                if (progress) *progress << "run " << where << " failed: " << e.what() << '\n' << std::flush;
            }
        }
    }
    if (!result.runs.empty()) emit_tables(aggregate(result.runs), config.output_dir, "table");
    return result;
}

ReplayCheck replay_run(const std::string& run_dir) {
    const auto config = load_run_config(run_dir + "/config.json");
    const auto stats = load_run_stats(run_dir + "/stats.json");
    const auto schedule = Schedule::read(run_dir + "/schedule.txt");
    const auto seed_genome = load_genome(run_dir + "/seed.genome");
    const auto files = load_files(config.data_paths);
    const auto plan = plan_folds(config, files.size());
    const auto prepared = prepare_fold(config, files, plan, stats.fold);
    RunState state(config.islands, config.operators, static_cast<int>(prepared.data.n_inputs),
                   static_cast<int>(prepared.data.n_outputs), stats.seed, seed_genome);
    const auto evaluate = make_trainer_evaluator(prepared.data, config.training);
    ReplayCheck check{false, replay(std::move(state), schedule, evaluate, stats.seed)};
    const auto saved_best = load_genome(run_dir + "/best.genome");
    check.identical = check.report.state.log().to_jsonl() == read_text(run_dir + "/events.jsonl") &&
                      check.report.state.best_genome() == saved_best;
    return check;
}

}  // namespace rnnevo
