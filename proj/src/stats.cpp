#include "rnnevo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rnnevo {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt(double v) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << v;
    return out.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

Summary summarize(std::span<const double> values, std::optional<std::span<const double>> mse) {
    Summary s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.avg = sum / static_cast<double>(values.size());
    if (mse) s.corr = pearson(values, *mse);
    return s;
}

ordered_json summary_json(const Summary& s, bool with_corr) {
    ordered_json j{{"min", s.min}, {"avg", s.avg}, {"max", s.max}};
    if (with_corr) j["corr"] = optional_number(s.corr);
    return j;
}

Summary summary_from_json(const json& j) {
    Summary s;
    s.min = j.at("min").get<double>();
    s.avg = j.at("avg").get<double>();
    s.max = j.at("max").get<double>();
    s.corr = read_optional(j, "corr");
    return s;
}

constexpr std::array<const char*, 4> kCountColumns{"edges", "recurrent_edges", "memory_cells", "simple_neurons"};

std::array<const Summary*, 4> count_summaries(const RunTypeRow& r) {
    return {&r.edges, &r.recurrent_edges, &r.memory_cells, &r.simple_neurons};
}

std::array<Summary*, 4> count_summaries(RunTypeRow& r) {
    return {&r.edges, &r.recurrent_edges, &r.memory_cells, &r.simple_neurons};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

RunStats describe_best(const RnnGenome& best) {
    RunStats s;
    s.best_mse = best.fitness.value_or(std::numeric_limits<double>::infinity());
    s.edges = static_cast<std::int64_t>(best.enabled_edge_count());
    s.recurrent_edges = static_cast<std::int64_t>(best.enabled_recurrent_edge_count());
    for (const auto& n : best.nodes) {
        if (n.kind != NodeKind::hidden || !n.enabled) continue;
        ++s.hidden_nodes;
        ++s.cell_counts[static_cast<std::size_t>(n.cell_type)];
        if (n.cell_type == CellType::simple) {
            ++s.simple_neurons;
        } else {
            ++s.memory_cells;
        }
    }
    return s;
}

ordered_json to_json(const RunStats& s) {
    ordered_json cells;
    for (auto t : kAllCellTypes) cells[std::string(to_string(t))] = s.cell_counts[static_cast<std::size_t>(t)];
    ordered_json j;
    j["run_type"] = s.run_type;
    j["fold"] = s.fold;
    j["repeat"] = s.repeat;
    j["seed"] = s.seed;
    j["best_mse"] = optional_number(std::isfinite(s.best_mse) ? std::optional(s.best_mse) : std::nullopt);
    j["edges"] = s.edges;
    j["recurrent_edges"] = s.recurrent_edges;
    j["hidden_nodes"] = s.hidden_nodes;
    j["memory_cells"] = s.memory_cells;
    j["simple_neurons"] = s.simple_neurons;
    j["cell_counts"] = cells;
    j["generated"] = s.generated;
    j["inserted"] = s.inserted;
    j["diverged"] = s.diverged;
    j["failed"] = s.failed;
    j["persistence_mse"] = optional_number(s.persistence_mse);
    return j;
}

RunStats run_stats_from_json(const json& j) {
    RunStats s;
    s.run_type = j.at("run_type").get<std::string>();
    s.fold = j.at("fold").get<int>();
    s.repeat = j.at("repeat").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.best_mse = read_optional(j, "best_mse").value_or(std::numeric_limits<double>::infinity());
    s.edges = j.at("edges").get<std::int64_t>();
    s.recurrent_edges = j.at("recurrent_edges").get<std::int64_t>();
    s.hidden_nodes = j.at("hidden_nodes").get<std::int64_t>();
    s.memory_cells = j.at("memory_cells").get<std::int64_t>();
    s.simple_neurons = j.at("simple_neurons").get<std::int64_t>();
    for (auto t : kAllCellTypes) {
        s.cell_counts[static_cast<std::size_t>(t)] = j.at("cell_counts").at(std::string(to_string(t))).get<std::int64_t>();
    }
    s.generated = j.at("generated").get<std::int64_t>();
    s.inserted = j.at("inserted").get<std::int64_t>();
    s.diverged = j.at("diverged").get<std::int64_t>();
    s.failed = j.at("failed").get<std::int64_t>();
    s.persistence_mse = read_optional(j, "persistence_mse");
    return s;
}

void save_run_stats(const RunStats& stats, const std::string& path) { write_text(path, to_json(stats).dump(2) + "\n"); }

RunStats load_run_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    try {
        return run_stats_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::vector<RunStats> collect_run_stats(const std::string& dir) {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() == "stats.json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<RunStats> out;
    for (const auto& p : paths) out.push_back(load_run_stats(p.string()));
    return out;
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n != ys.size() || n < 2) return std::nullopt;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) return std::nullopt;
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const RunTypeRow* AggregateReport::find(std::string_view run_type) const {
    for (const auto& r : rows) {
        if (r.run_type == run_type) return &r;
    }
    return nullptr;
}

AggregateReport aggregate(std::span<const RunStats> runs) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const RunStats*>> groups;
    for (const auto& r : runs) {
        auto& g = groups[r.run_type];
        if (g.empty()) order.push_back(r.run_type);
        g.push_back(&r);
    }
    AggregateReport report;
    for (const auto& type : order) {
        const auto& g = groups[type];
        std::vector<double> mse;
        std::array<std::vector<double>, 4> counts;
        for (const auto* r : g) {
            mse.push_back(r->best_mse);
            counts[0].push_back(static_cast<double>(r->edges));
            counts[1].push_back(static_cast<double>(r->recurrent_edges));
            counts[2].push_back(static_cast<double>(r->memory_cells));
            counts[3].push_back(static_cast<double>(r->simple_neurons));
        }
        RunTypeRow row;
        row.run_type = type;
        row.runs = g.size();
        row.mse = summarize(mse, std::nullopt);
        const auto targets = count_summaries(row);
        for (std::size_t c = 0; c < counts.size(); ++c) {
            *targets[c] = summarize(counts[c], std::span<const double>(mse));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<RankEntry> zscore_ranking(std::span<const std::string> labels, std::span<const double> metrics,
                                      StddevKind kind) {
    const std::size_t n = metrics.size();
    if (labels.size() != n) throw std::invalid_argument("zscore_ranking: label and metric counts differ");
    if (n < 2) throw std::invalid_argument("zscore_ranking needs at least two run types");
    double sum = 0.0;
    for (double m : metrics) sum += m;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double m : metrics) ss += (m - mean) * (m - mean);
    const double denom = kind == StddevKind::sample ? static_cast<double>(n - 1) : static_cast<double>(n);
    const double sd = std::sqrt(ss / denom);
    std::vector<RankEntry> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({labels[i], sd > 0.0 ? (metrics[i] - mean) / sd : 0.0});
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
    return out;
}

std::vector<RankEntry> combine_rankings(std::span<const std::vector<RankEntry>> rankings) {
    if (rankings.empty()) throw std::invalid_argument("combine_rankings needs at least one ranking");
    std::vector<RankEntry> out = rankings.front();
    for (auto& e : out) {
        double sum = 0.0;
        for (const auto& r : rankings) {
            const auto it = std::find_if(r.begin(), r.end(), [&](const RankEntry& x) { return x.run_type == e.run_type; });
            if (it == r.end() || r.size() != out.size()) {
                throw std::invalid_argument("combine_rankings: run type '" + e.run_type + "' missing from a ranking");
            }
            sum += it->score;
        }
        e.score = sum / static_cast<double>(rankings.size());
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
    return out;
}

Ranking deviation_ranking(const AggregateReport& report, StddevKind kind) {
    std::vector<std::string> labels;
    std::vector<double> best, avg, worst;
    for (const auto& r : report.rows) {
        labels.push_back(r.run_type);
        best.push_back(r.mse.min);
        avg.push_back(r.mse.avg);
        worst.push_back(r.mse.max);
    }
    return {zscore_ranking(labels, best, kind), zscore_ranking(labels, avg, kind), zscore_ranking(labels, worst, kind)};
}

Ranking deviation_ranking(std::span<const AggregateReport> reports, StddevKind kind) {
    std::vector<std::vector<RankEntry>> best, avg, worst;
    for (const auto& rep : reports) {
        auto r = deviation_ranking(rep, kind);
        best.push_back(std::move(r.best));
        avg.push_back(std::move(r.avg));
        worst.push_back(std::move(r.worst));
    }
    return {combine_rankings(best), combine_rankings(avg), combine_rankings(worst)};
}

std::string table_csv(const AggregateReport& report) {
    std::string out = "run_type,runs,mse_min,mse_avg,mse_max";
    for (const char* c : kCountColumns) {
        for (const char* f : {"_min", "_avg", "_max", "_corr"}) out += std::string(",") + c + f;
    }
    out += '\n';
    for (const auto& r : report.rows) {
        out += r.run_type + "," + std::to_string(r.runs) + "," + fmt(r.mse.min) + "," + fmt(r.mse.avg) + "," +
               fmt(r.mse.max);
        for (const auto* s : count_summaries(r)) {
            out += "," + fmt(s->min) + "," + fmt(s->avg) + "," + fmt(s->max) + "," + fmt(s->corr);
        }
        out += '\n';
    }
    return out;
}

void emit_tables(const AggregateReport& report, const std::string& dir, const std::string& stem) {
    if (report.rows.empty()) throw std::invalid_argument("emit_tables: no run types to report");
    std::filesystem::create_directories(dir);
    ordered_json rows = ordered_json::array();
    for (const auto& r : report.rows) {
        ordered_json j{{"run_type", r.run_type}, {"runs", r.runs}, {"mse", summary_json(r.mse, false)}};
        const auto s = count_summaries(r);
        for (std::size_t c = 0; c < kCountColumns.size(); ++c) j[kCountColumns[c]] = summary_json(*s[c], true);
        rows.push_back(std::move(j));
    }
    write_text(dir + "/" + stem + ".json", ordered_json{{"rows", rows}}.dump(2) + "\n");
    write_text(dir + "/" + stem + ".csv", table_csv(report));
}

AggregateReport read_table_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    const auto j = json::parse(in);
    AggregateReport report;
    for (const auto& r : j.at("rows")) {
        RunTypeRow row;
        row.run_type = r.at("run_type").get<std::string>();
        row.runs = r.at("runs").get<std::size_t>();
        row.mse = summary_from_json(r.at("mse"));
        const auto s = count_summaries(row);
        for (std::size_t c = 0; c < kCountColumns.size(); ++c) *s[c] = summary_from_json(r.at(kCountColumns[c]));
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string ranking_csv(const Ranking& ranking) {
    std::string out = "rank,best_type,best_score,avg_type,avg_score,worst_type,worst_score\n";
    for (std::size_t i = 0; i < ranking.best.size(); ++i) {
        out += std::to_string(i + 1);
        for (const auto* col : {&ranking.best, &ranking.avg, &ranking.worst}) {
            out += "," + (*col)[i].run_type + "," + fmt((*col)[i].score);
        }
        out += '\n';
    }
    return out;
}

void emit_ranking(const Ranking& ranking, const std::string& dir, const std::string& stem) {
    std::filesystem::create_directories(dir);
    const auto column = [](const std::vector<RankEntry>& entries) {
        ordered_json a = ordered_json::array();
        for (const auto& e : entries) a.push_back({{"run_type", e.run_type}, {"score", e.score}});
        return a;
    };
    const ordered_json j{{"best", column(ranking.best)}, {"avg", column(ranking.avg)}, {"worst", column(ranking.worst)}};
    write_text(dir + "/" + stem + ".json", j.dump(2) + "\n");
    write_text(dir + "/" + stem + ".csv", ranking_csv(ranking));
}

std::string plot_data(const EventLog& log) {
    std::string out = "evaluated,best_mse\n";
    double best = std::numeric_limits<double>::infinity();
    std::int64_t evaluated = 0;
    out += "0," + fmt(best) + "\n";
    for (const auto& e : log.events()) {
        if (e.kind == EventKind::evaluated) ++evaluated;
        if (e.kind != EventKind::inserted) continue;
        best = std::min(best, e.fitness.value_or(best));
        out += std::to_string(evaluated) + "," + fmt(best) + "\n";
    }
    return out;
}

}  // namespace rnnevo
