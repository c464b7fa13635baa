#include "rnnevo/islands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rnnevo {

namespace {

constexpr std::array<std::string_view, 6> kEventNames{"generated", "evaluated", "inserted",
                                                      "rejected",  "discarded", "failed"};

double fitness_of(const RnnGenome& g) { return *g.fitness; }
double fitness_of(const MemberRecord& m) { return m.fitness; }
std::int64_t id_of(const RnnGenome& g) { return g.generation_id; }
std::int64_t id_of(const MemberRecord& m) { return m.genome; }

// Shared by the live islands and the log replay so both follow one rule.
template <typename T>
bool insert_sorted(std::vector<T>& members, std::size_t capacity, T item) {
    const auto before = [](const T& a, const T& b) {
        if (fitness_of(a) != fitness_of(b)) return fitness_of(a) < fitness_of(b);
        return id_of(a) < id_of(b);
    };
    if (members.size() >= capacity) {
        if (!(fitness_of(item) < fitness_of(members.back()))) return false;
        members.pop_back();
    }
    const auto at = std::upper_bound(members.begin(), members.end(), item, before);
    members.insert(at, std::move(item));
    return true;
}

}  // namespace

void IslandConfig::check() const {
    if (n_islands < 1) throw std::invalid_argument("n_islands must be at least 1");
    if (population_size < 1) throw std::invalid_argument("population_size must be at least 1");
    if (generation_budget < 0) throw std::invalid_argument("generation_budget must be non-negative");
}

std::string_view to_string(EventKind kind) { return kEventNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> parse_event_kind(std::string_view name) {
    for (std::size_t k = 0; k < kEventNames.size(); ++k) {
        if (kEventNames[k] == name) return static_cast<EventKind>(k);
    }
    return std::nullopt;
}

const Event& EventLog::append(EventKind kind, int island, std::int64_t genome, std::optional<double> fitness,
                              std::string detail) {
    events_.push_back({events_.size(), kind, island, genome, fitness, std::move(detail)});
    return events_.back();
}

std::string EventLog::to_jsonl() const {
    std::string out;
    for (const auto& e : events_) {
        nlohmann::ordered_json j;
        j["seq"] = e.seq;
        j["event"] = to_string(e.kind);
        j["island"] = e.island;
        j["genome"] = e.genome;
        if (e.fitness) {
            if (std::isfinite(*e.fitness)) {
                j["fitness"] = *e.fitness;
            } else {
                j["fitness"] = nullptr;
                j["diverged"] = true;
            }
        }
        if (!e.detail.empty()) j["detail"] = e.detail;
        out += j.dump();
        out += '\n';
    }
    return out;
}

EventLog EventLog::from_jsonl(std::string_view text) {
    EventLog log;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Event e;
            e.seq = j.at("seq").get<std::uint64_t>();
            const auto kind = parse_event_kind(j.at("event").get<std::string>());
            if (!kind) throw std::invalid_argument("unknown event kind");
            e.kind = *kind;
            e.island = j.at("island").get<int>();
            e.genome = j.at("genome").get<std::int64_t>();
            if (j.contains("fitness")) {
                e.fitness = j["fitness"].is_null() ? std::numeric_limits<double>::infinity()
                                                   : j["fitness"].get<double>();
            }
            if (j.contains("detail")) e.detail = j["detail"].get<std::string>();
            log.events_.push_back(std::move(e));
        } catch (const std::exception& ex) {
            throw std::invalid_argument("event log line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return log;
}

void EventLog::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_jsonl();
}

EventLog EventLog::read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_jsonl(ss.str());
}

bool steady_state_insert(std::vector<RnnGenome>& members, std::size_t capacity, RnnGenome genome) {
    if (!genome.fitness) throw std::invalid_argument("cannot insert an unevaluated genome");
    return insert_sorted(members, capacity, std::move(genome));
}

RunState::RunState(IslandConfig islands, OperatorConfig operators, int n_inputs, int n_outputs, std::uint64_t seed,
                   std::optional<RnnGenome> seed_genome_in)
    : config_(islands), operators_(std::move(operators)), rng_(seed) {
    config_.check();
    operators_.check();
    if (seed_genome_in) {
        seed_ = std::move(*seed_genome_in);
        if (static_cast<int>(seed_.input_count()) != n_inputs || static_cast<int>(seed_.output_count()) != n_outputs) {
            throw std::invalid_argument("seed genome does not match the data's input/output counts");
        }
        registry_.absorb(seed_);
    } else {
        // Own generator so a run restarted from a saved seed draws the same stream.
        Rng init(seed ^ 0x5851f42d4c957f2dULL);
        seed_ = seed_genome(n_inputs, n_outputs, registry_, init);
    }
    seed_.fitness.reset();
    seed_.generation_id = -1;
    seed_.island_of_origin = -1;
    islands_.resize(static_cast<std::size_t>(config_.n_islands));
    bootstrap_issued_.assign(islands_.size(), 0);
}

std::optional<RnnGenome> RunState::bootstrap_child(int island) {
    auto& issued = bootstrap_issued_[static_cast<std::size_t>(island)];
    if (issued++ == 0) return seed_;
    EvolutionContext ctx{registry_, rng_, operators_};
    return mutate_once(seed_, ctx);
}

std::optional<WorkPiece> RunState::next_work() {
    if (exhausted()) return std::nullopt;
    for (int tries = 0; tries < config_.n_islands; ++tries) {
        const int island = cursor_;
        cursor_ = (cursor_ + 1) % config_.n_islands;
        const auto& members = islands_[static_cast<std::size_t>(island)];
        std::optional<RnnGenome> child;
        std::string detail;
        if (bootstrap_issued_[static_cast<std::size_t>(island)] < config_.population_size || members.empty()) {
            child = bootstrap_child(island);
            detail = "bootstrap";
        } else {
            EvolutionContext ctx{registry_, rng_, operators_};
            auto outcome = generate_child(islands_, static_cast<std::size_t>(island), ctx);
            child = std::move(outcome.child);
            detail = std::string(to_string(outcome.type));
            if (outcome.op) detail += ":" + std::string(to_string(*outcome.op));
        }
        if (!child) {
            ++discarded_;
            log_.append(EventKind::discarded, island, -1, std::nullopt, detail);
            continue;
        }
        child->fitness.reset();
        child->generation_id = generated_++;
        child->island_of_origin = island;
        log_.append(EventKind::generated, island, child->generation_id, std::nullopt, detail);
        return WorkPiece{std::move(*child), std::move(detail)};
    }
    throw std::runtime_error("child generation failed on every island");
}

InsertOutcome RunState::insert_result(RnnGenome trained) {
    if (!trained.fitness) throw std::invalid_argument("insert_result needs an evaluated genome");
    if (trained.island_of_origin < 0 || trained.island_of_origin >= config_.n_islands) {
        throw std::invalid_argument("insert_result: island_of_origin out of range");
    }
    const int island = trained.island_of_origin;
    const auto id = trained.generation_id;
    const double fitness = *trained.fitness;
    ++evaluated_;
    if (!std::isfinite(fitness)) ++diverged_;
    log_.append(EventKind::evaluated, island, id, fitness);
    const bool kept = steady_state_insert(islands_[static_cast<std::size_t>(island)],
                                          static_cast<std::size_t>(config_.population_size), std::move(trained));
    if (kept) {
        ++inserted_;
        log_.append(EventKind::inserted, island, id, fitness);
        return InsertOutcome::inserted;
    }
    ++rejected_;
    log_.append(EventKind::rejected, island, id, fitness);
    return InsertOutcome::rejected;
}

void RunState::record_failure(const RnnGenome& genome) {
    ++failed_;
    log_.append(EventKind::failed, genome.island_of_origin, genome.generation_id);
}

const RnnGenome& RunState::best_genome() const {
    const RnnGenome* best = nullptr;
    for (const auto& island : islands_) {
        if (!island.empty() && (!best || fitter(island.front(), *best))) best = &island.front();
    }
    if (!best) throw std::logic_error("no evaluated genome in any island");
    return *best;
}

std::optional<double> RunState::best_fitness() const {
    for (const auto& island : islands_) {
        if (!island.empty()) return best_genome().fitness;
    }
    return std::nullopt;
}

std::vector<std::vector<MemberRecord>> replay_islands(const EventLog& log, int n_islands, std::size_t capacity) {
    std::vector<std::vector<MemberRecord>> islands(static_cast<std::size_t>(n_islands));
    for (const auto& e : log.events()) {
        if (e.kind != EventKind::evaluated) continue;
        if (e.island < 0 || e.island >= n_islands || !e.fitness) {
            throw std::invalid_argument("replay_islands: malformed evaluated event");
        }
        insert_sorted(islands[static_cast<std::size_t>(e.island)], capacity, MemberRecord{*e.fitness, e.genome});
    }
    return islands;
}

std::vector<std::vector<MemberRecord>> member_records(std::span<const std::vector<RnnGenome>> islands) {
    std::vector<std::vector<MemberRecord>> out;
    for (const auto& island : islands) {
        auto& dst = out.emplace_back();
        for (const auto& g : island) dst.push_back({*g.fitness, g.generation_id});
    }
    return out;
}

}  // namespace rnnevo
