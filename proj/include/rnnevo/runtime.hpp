#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rnnevo/data.hpp"
#include "rnnevo/islands.hpp"
#include "rnnevo/trainer.hpp"

namespace rnnevo {

/// splitmix64 finalizer over a combination of the inputs.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Unbounded blocking queue. pop() returns nullopt once closed and drained.
template <typename T>
class Channel {
public:
    void push(T value) {
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(value));
        }
        ready_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return !queue_.empty() || closed_; });
        if (queue_.empty()) return std::nullopt;
        T value = std::move(queue_.front());
        queue_.pop_front();
        return value;
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        ready_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<T> queue_;
    bool closed_ = false;
};

struct WorkItem {
    std::uint64_t work_id = 0;
    RnnGenome genome;
    std::uint64_t training_seed = 0;
    int attempt = 0;
};

struct WorkResult {
    std::uint64_t work_id = 0;
    RnnGenome genome;  // fitness set; +inf when training diverged
    double seconds = 0.0;
    int worker = -1;
};

/// Trains one genome and returns it with fitness set. May throw; the
/// runtime then reissues the item once before giving up on it.
using Evaluator = std::function<RnnGenome(const RnnGenome& genome, std::uint64_t seed)>;

/// Evaluator backed by the BPTT trainer; `data` must outlive it.
Evaluator make_trainer_evaluator(const EvaluationData& data, TrainingConfig config);

/// The master's decisions in order. Replaying them against a fresh RunState
/// with a deterministic evaluator reproduces the run.
struct ScheduleStep {
    enum class Kind { generate, integrate, fail };
    Kind kind = Kind::generate;
    std::uint64_t work_id = 0;

    bool operator==(const ScheduleStep&) const = default;
};

struct Schedule {
    std::vector<ScheduleStep> steps;

    std::string to_text() const;
    static Schedule from_text(std::string_view text);
    void write(const std::string& path) const;
    static Schedule read(const std::string& path);

    bool operator==(const Schedule&) const = default;
};

struct RuntimeOptions {
    int n_workers = 1;
    std::ostream* progress = nullptr;  // one status line every progress_every integrations
    std::int64_t progress_every = 100;
};

struct RunReport {
    RunState state;
    Schedule schedule;
    double seconds = 0.0;
    std::vector<std::int64_t> completed_per_worker;
    std::int64_t issued = 0;  // work items handed to workers, reissues included
    std::int64_t completed = 0;
    std::int64_t failed_attempts = 0;
};

/// Master/worker run: workers pull one item at a time, the master integrates
/// results in arrival order until every generated item is integrated or
/// failed.
RunReport run(RunState state, const Evaluator& evaluate, std::uint64_t seed, const RuntimeOptions& options);

/// Single-threaded equivalent of run() with one worker.
RunReport run_sequential(RunState state, const Evaluator& evaluate, std::uint64_t seed,
                         const RuntimeOptions& options = {});

/// Re-executes a recorded schedule; evaluation of an item happens when its
/// integrate step is reached.
RunReport replay(RunState state, const Schedule& schedule, const Evaluator& evaluate, std::uint64_t seed);

}  // namespace rnnevo
