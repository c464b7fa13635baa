#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rnnevo/genome.hpp"
#include "rnnevo/islands.hpp"

namespace rnnevo {

/// One finished run, described by its best genome.
struct RunStats {
    std::string run_type;
    int fold = 0;
    int repeat = 0;
    std::uint64_t seed = 0;
    double best_mse = 0.0;
    std::int64_t edges = 0;            // enabled feed-forward edges
    std::int64_t recurrent_edges = 0;  // enabled recurrent edges
    std::int64_t hidden_nodes = 0;     // enabled hidden nodes
    std::int64_t memory_cells = 0;     // enabled hidden nodes that are not simple
    std::int64_t simple_neurons = 0;   // enabled simple hidden nodes
    std::array<std::int64_t, kAllCellTypes.size()> cell_counts{};
    std::int64_t generated = 0;
    std::int64_t inserted = 0;
    std::int64_t diverged = 0;
    std::int64_t failed = 0;
    std::optional<double> persistence_mse;  // baseline on the validation files

    bool operator==(const RunStats&) const = default;
};

RunStats describe_best(const RnnGenome& best);

nlohmann::ordered_json to_json(const RunStats& stats);
RunStats run_stats_from_json(const nlohmann::json& j);
void save_run_stats(const RunStats& stats, const std::string& path);
RunStats load_run_stats(const std::string& path);

/// Every stats.json below `dir`, ordered by path.
std::vector<RunStats> collect_run_stats(const std::string& dir);

/// Sample Pearson coefficient by the two-pass formula. Empty when the
/// lengths differ, n < 2, either side is constant or any value is not finite.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

struct Summary {
    double min = 0.0;
    double avg = 0.0;
    double max = 0.0;
    std::optional<double> corr;  // against best MSE; absent for MSE itself

    bool operator==(const Summary&) const = default;
};

struct RunTypeRow {
    std::string run_type;
    std::size_t runs = 0;
    Summary mse;
    Summary edges;
    Summary recurrent_edges;
    Summary memory_cells;
    Summary simple_neurons;

    bool operator==(const RunTypeRow&) const = default;
};

/// One table: a row per run type, in first-seen order.
struct AggregateReport {
    std::vector<RunTypeRow> rows;

    const RunTypeRow* find(std::string_view run_type) const;
    bool operator==(const AggregateReport&) const = default;
};

AggregateReport aggregate(std::span<const RunStats> runs);

enum class StddevKind { sample, population };

struct RankEntry {
    std::string run_type;
    double score = 0.0;

    bool operator==(const RankEntry&) const = default;
};

/// z-scores of `metrics` against their mean and standard deviation, sorted
/// ascending (stable). All scores are 0 when the metrics are all equal.
std::vector<RankEntry> zscore_ranking(std::span<const std::string> labels, std::span<const double> metrics,
                                      StddevKind kind = StddevKind::sample);

/// Mean score per run type across several rankings (one per prediction
/// parameter), sorted ascending. Every ranking must hold the same types.
std::vector<RankEntry> combine_rankings(std::span<const std::vector<RankEntry>> rankings);

struct Ranking {
    std::vector<RankEntry> best;   // by minimum MSE
    std::vector<RankEntry> avg;    // by mean MSE
    std::vector<RankEntry> worst;  // by maximum MSE

    bool operator==(const Ranking&) const = default;
};

Ranking deviation_ranking(const AggregateReport& report, StddevKind kind = StddevKind::sample);

/// Combined ranking over several parameters' reports.
Ranking deviation_ranking(std::span<const AggregateReport> reports, StddevKind kind = StddevKind::sample);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json. Throws on an empty report.
void emit_tables(const AggregateReport& report, const std::string& dir, const std::string& stem);
AggregateReport read_table_json(const std::string& path);
std::string table_csv(const AggregateReport& report);

void emit_ranking(const Ranking& ranking, const std::string& dir, const std::string& stem);
std::string ranking_csv(const Ranking& ranking);

/// "evaluated,best_mse" rows: one initial row, then one per insertion with
/// the number of evaluations so far and the global best after it.
std::string plot_data(const EventLog& log);

}  // namespace rnnevo
