#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rnnevo/evolution.hpp"
#include "rnnevo/genome.hpp"

namespace rnnevo {

struct IslandConfig {
    int n_islands = 10;
    int population_size = 5;
    std::int64_t generation_budget = 2000;

    void check() const;
};

enum class EventKind { generated, evaluated, inserted, rejected, discarded, failed };
std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

/// One run-log record. `seq` is a logical clock (position in the log), not
/// wall time, so logs of identical runs compare byte for byte.
struct Event {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::generated;
    int island = -1;
    std::int64_t genome = -1;       // generation id
    std::optional<double> fitness;  // +inf for diverged genomes
    std::string detail;             // e.g. "mutation:add_node", "bootstrap"

    bool operator==(const Event&) const = default;
};

class EventLog {
public:
    const Event& append(EventKind kind, int island, std::int64_t genome, std::optional<double> fitness = {},
                        std::string detail = {});
    std::span<const Event> events() const { return events_; }
    std::size_t size() const { return events_.size(); }

    /// One JSON object per line. Non-finite fitness is written as null with
    /// "diverged": true.
    std::string to_jsonl() const;
    static EventLog from_jsonl(std::string_view text);
    void write(const std::string& path) const;
    static EventLog read(const std::string& path);

private:
    std::vector<Event> events_;
};

/// Steady-state insertion into a fitness-sorted pool: unconditional below
/// capacity, otherwise only when strictly better than the worst member, which
/// is then evicted. Returns whether the genome was kept.
bool steady_state_insert(std::vector<RnnGenome>& members, std::size_t capacity, RnnGenome genome);

struct WorkPiece {
    RnnGenome genome;  // generation_id and island_of_origin stamped
    std::string detail;
};

enum class InsertOutcome { inserted, rejected };

/// The master's population state. Owns the innovation registry and the
/// generative RNG; every call must come from one thread.
class RunState {
public:
    RunState(IslandConfig islands, OperatorConfig operators, int n_inputs, int n_outputs, std::uint64_t seed,
             std::optional<RnnGenome> seed_genome = std::nullopt);

    /// Next child to train, or nullopt once the budget has been handed out.
    /// Throws std::runtime_error if every island fails to generate in a row.
    std::optional<WorkPiece> next_work();

    /// Throws std::invalid_argument for unevaluated or foreign genomes.
    InsertOutcome insert_result(RnnGenome trained);

    /// Records a work item given up by the runtime.
    void record_failure(const RnnGenome& genome);

    /// Global best; ties go to the lower generation id. Throws when no
    /// island holds a member.
    const RnnGenome& best_genome() const;
    std::optional<double> best_fitness() const;

    std::span<const std::vector<RnnGenome>> islands() const { return islands_; }
    const IslandConfig& island_config() const { return config_; }
    const RnnGenome& seed() const { return seed_; }
    const InnovationRegistry& registry() const { return registry_; }
    const EventLog& log() const { return log_; }

    std::int64_t generated_count() const { return generated_; }
    std::int64_t inserted_count() const { return inserted_; }
    std::int64_t rejected_count() const { return rejected_; }
    std::int64_t discarded_count() const { return discarded_; }
    std::int64_t evaluated_count() const { return evaluated_; }
    std::int64_t failed_count() const { return failed_; }
    std::int64_t diverged_count() const { return diverged_; }
    int cursor() const { return cursor_; }
    bool exhausted() const { return generated_ >= config_.generation_budget; }

private:
    std::optional<RnnGenome> bootstrap_child(int island);

    IslandConfig config_;
    OperatorConfig operators_;
    InnovationRegistry registry_;
    Rng rng_;
    RnnGenome seed_;
    std::vector<std::vector<RnnGenome>> islands_;
    std::vector<int> bootstrap_issued_;
    EventLog log_;
    std::int64_t generated_ = 0;
    std::int64_t inserted_ = 0;
    std::int64_t rejected_ = 0;
    std::int64_t discarded_ = 0;
    std::int64_t evaluated_ = 0;
    std::int64_t failed_ = 0;
    std::int64_t diverged_ = 0;
    int cursor_ = 0;
};

/// Fitness and generation id of an island member, as recovered from a log.
struct MemberRecord {
    double fitness = 0.0;
    std::int64_t genome = -1;

    bool operator==(const MemberRecord&) const = default;
};

/// Rebuilds the final island populations from the evaluated events of a log
/// by applying the insertion rule sequentially.
std::vector<std::vector<MemberRecord>> replay_islands(const EventLog& log, int n_islands, std::size_t capacity);

std::vector<std::vector<MemberRecord>> member_records(std::span<const std::vector<RnnGenome>> islands);

}  // namespace rnnevo
