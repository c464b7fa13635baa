// Command line front end: evolve, stats, rank, fixtures, replay, inspect.

#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rnnevo/config.hpp"
#include "rnnevo/experiment.hpp"
#include "rnnevo/stats.hpp"

using namespace rnnevo;

namespace {

struct EvolveFlags {
    std::string config_path;
    std::vector<std::string> data;
    std::optional<std::string> target, run_type, cell_types, output, normalize, granularity;
    std::optional<int> islands, population, epochs, fold_size, folds, repeats, workers, max_skip;
    std::optional<std::int64_t> budget, progress_every;
    std::optional<double> learning_rate;
    std::optional<std::uint64_t> seed;
    std::string save_genome, load_genome, write_config;
};

RunConfig resolve(const EvolveFlags& f) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
    apply_environment(c);
    if (!f.data.empty()) c.data_paths = f.data;
    if (f.target) c.target_column = *f.target;
    if (f.normalize) c.normalize = parse_normalize_mode(*f.normalize);
    if (f.run_type) {
        const auto types = parse_run_type(*f.run_type);
        if (!types) throw std::invalid_argument("unknown run type '" + *f.run_type + "'");
        c.operators.allowed_cell_types = *types;
    }
    if (f.cell_types) {
        std::vector<CellType> types;
        std::stringstream ss(*f.cell_types);
        for (std::string name; std::getline(ss, name, ',');) {
            const auto t = parse_cell_type(name);
            if (!t) throw std::invalid_argument("unknown cell type '" + name + "'");
            types.push_back(*t);
        }
        c.operators.allowed_cell_types = types;
    }
    if (f.islands) c.islands.n_islands = *f.islands;
    if (f.population) c.islands.population_size = *f.population;
    if (f.budget) c.islands.generation_budget = *f.budget;
    if (f.epochs) c.training.epochs = *f.epochs;
    if (f.learning_rate) c.training.learning_rate = *f.learning_rate;
    if (f.granularity) {
        if (*f.granularity == "per_series") {
            c.training.granularity = UpdateGranularity::per_series;
        } else if (*f.granularity == "per_epoch") {
            c.training.granularity = UpdateGranularity::per_epoch;
        } else {
            throw std::invalid_argument("unknown granularity '" + *f.granularity + "'");
        }
    }
    if (f.max_skip) c.operators.max_skip = *f.max_skip;
    if (f.fold_size) {
        c.folds.fold_size = *f.fold_size;
        c.folds.k = 0;
    }
    if (f.folds) c.folds.k = *f.folds;
    if (f.repeats) c.folds.repeats = *f.repeats;
    if (f.workers) c.n_workers = *f.workers;
    if (f.seed) c.seed = *f.seed;
    if (f.output) c.output_dir = *f.output;
    if (f.progress_every) c.progress_every = *f.progress_every;
    c.check();
    return c;
}

int cmd_evolve(const EvolveFlags& f) {
    const auto config = resolve(f);
    if (!f.write_config.empty()) {
        save_run_config(config, f.write_config);
        return 0;
    }
    std::optional<RnnGenome> seed;
    if (!f.load_genome.empty()) seed = load_genome(f.load_genome);
    const auto result = run_experiment(config, &std::cerr, seed);
    for (const auto& s : result.runs) {
        std::cout << s.run_type << " fold " << s.fold << " repeat " << s.repeat << " best_mse " << s.best_mse
                  << " persistence_mse " << s.persistence_mse.value_or(std::numeric_limits<double>::quiet_NaN())
                  << "\n";
    }
    if (!f.save_genome.empty() && !result.runs.empty()) {
        const RunStats* best = &result.runs.front();
        for (const auto& s : result.runs) {
            if (s.best_mse < best->best_mse) best = &s;
        }
        std::filesystem::copy_file(run_directory(config, best->fold, best->repeat) + "/best.genome", f.save_genome,
                                   std::filesystem::copy_options::overwrite_existing);
    }
    for (const auto& msg : result.failures) std::cerr << "failed: " << msg << "\n";
    return result.failures.empty() ? 0 : 1;
}

int cmd_stats(const std::string& dir, std::string out) {
    const auto runs = collect_run_stats(dir);
    if (runs.empty()) throw std::invalid_argument("no stats.json files under " + dir);
    const auto report = aggregate(runs);
    if (out.empty()) out = dir;
    emit_tables(report, out, "table");
    std::cout << table_csv(report);
    return 0;
}

int cmd_rank(const std::vector<std::string>& dirs, std::string out, bool population) {
    std::vector<AggregateReport> reports;
    for (const auto& d : dirs) {
        const auto runs = collect_run_stats(d);
        if (runs.empty()) throw std::invalid_argument("no stats.json files under " + d);
        reports.push_back(aggregate(runs));
    }
    const auto ranking = deviation_ranking(reports, population ? StddevKind::population : StddevKind::sample);
    if (out.empty()) out = ".";
    emit_ranking(ranking, out, "ranking");
    std::cout << ranking_csv(ranking);
    return 0;
}

int cmd_fixtures(const std::string& out, const FixtureSpec& spec) {
    std::filesystem::create_directories(out);
    for (const auto& f : generate_fixture(spec)) {
        const auto path = out + "/" + f.name + ".csv";
        write_csv(f, path);
        std::cout << path << "\n";
    }
    return 0;
}

int cmd_replay(const std::string& run_dir) {
    const auto check = replay_run(run_dir);
    std::cout << (check.identical ? "identical" : "different") << "\n";
    return check.identical ? 0 : 1;
}

int cmd_inspect(const std::string& path) {
    const auto g = load_genome(path);
    std::cout << dump(g);
    const auto violations = validate(g);
    for (const auto& v : violations) std::cout << "violation " << to_string(v.kind) << ": " << v.detail << "\n";
    return violations.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolves recurrent networks with memory cells for time-series prediction"};
    app.require_subcommand(1);

    EvolveFlags ef;
    auto* evolve = app.add_subcommand("evolve", "Run repeated k-fold evolution experiments");
    evolve->add_option("--config", ef.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
    evolve->add_option("--data", ef.data, "CSV files (override the config)");
    evolve->add_option("--target", ef.target, "Column to predict one step ahead");
    evolve->add_option("--normalize", ef.normalize, "minmax or none");
    evolve->add_option("--run-type", ef.run_type, "e.g. lstm, lstm+simple, all");
    evolve->add_option("--cell-types", ef.cell_types, "Comma-separated cell types");
    evolve->add_option("--islands", ef.islands);
    evolve->add_option("--population", ef.population, "Members per island");
    evolve->add_option("--budget", ef.budget, "Genomes generated per run");
    evolve->add_option("--epochs", ef.epochs, "Training epochs per genome");
    evolve->add_option("--learning-rate", ef.learning_rate);
    evolve->add_option("--granularity", ef.granularity, "per_series or per_epoch");
    evolve->add_option("--max-skip", ef.max_skip, "Largest recurrent time skip");
    evolve->add_option("--fold-size", ef.fold_size, "Validation files per fold");
    evolve->add_option("--folds", ef.folds, "Number of folds (overrides --fold-size)");
    evolve->add_option("--repeats", ef.repeats);
    evolve->add_option("--workers", ef.workers);
    evolve->add_option("--seed", ef.seed);
    evolve->add_option("--output", ef.output, "Output directory (default: config, then $RNNEVO_OUTPUT_DIR)");
    evolve->add_option("--progress-every", ef.progress_every, "Status line every N evaluations (0: off)");
    evolve->add_option("--save-genome", ef.save_genome, "Copy the best genome of the experiment here");
    evolve->add_option("--load-genome", ef.load_genome, "Bootstrap islands from this genome")
        ->check(CLI::ExistingFile);
    evolve->add_option("--write-config", ef.write_config, "Write the resolved configuration and exit");

    std::string stats_dir, stats_out;
    auto* stats = app.add_subcommand("stats", "Aggregate run statistics into tables");
    stats->add_option("dir", stats_dir, "Experiment output directory")->required()->check(CLI::ExistingDirectory);
    stats->add_option("--out", stats_out, "Where to write table.csv/json (default: dir)");

    std::vector<std::string> rank_dirs;
    std::string rank_out;
    bool rank_population = false;
    auto* rank = app.add_subcommand("rank", "Rank run types by deviation from the mean MSE");
    rank->add_option("dirs", rank_dirs, "One experiment directory per prediction parameter")
        ->required()
        ->check(CLI::ExistingDirectory);
    rank->add_option("--out", rank_out, "Where to write ranking.csv/json (default: .)");
    rank->add_flag("--population-stddev", rank_population, "Use the population standard deviation");

    std::string fixtures_out = "fixtures";
    FixtureSpec spec;
    auto* fixtures = app.add_subcommand("fixtures", "Write synthetic multivariate series");
    fixtures->add_option("--out", fixtures_out);
    fixtures->add_option("--files", spec.files);
    fixtures->add_option("--rows", spec.rows);
    fixtures->add_option("--columns", spec.columns);
    fixtures->add_option("--seed", spec.seed);

    std::string replay_dir;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded schedule and compare the outcome");
    replay_cmd->add_option("run_dir", replay_dir)->required()->check(CLI::ExistingDirectory);

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Print and validate a saved genome");
    inspect->add_option("genome", inspect_path)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*evolve) return cmd_evolve(ef);
        if (*stats) return cmd_stats(stats_dir, stats_out);
        if (*rank) return cmd_rank(rank_dirs, rank_out, rank_population);
        if (*fixtures) return cmd_fixtures(fixtures_out, spec);
        if (*replay_cmd) return cmd_replay(replay_dir);
        if (*inspect) return cmd_inspect(inspect_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
