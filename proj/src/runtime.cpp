#include "rnnevo/runtime.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

namespace rnnevo {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report_progress(const RunState& state, const RuntimeOptions& options) {
    if (!options.progress || options.progress_every <= 0) return;
    const auto done = state.evaluated_count() + state.failed_count();
    if (done == 0 || done % options.progress_every != 0) return;
    auto& out = *options.progress;
    out << "evaluated " << state.evaluated_count() << "/" << state.island_config().generation_budget << " inserted "
        << state.inserted_count() << " failed " << state.failed_count() << " best ";
    if (const auto best = state.best_fitness()) {
        out << *best;
    } else {
        out << "none";
    }
    out << '\n' << std::flush;
}

WorkItem make_item(std::uint64_t work_id, WorkPiece piece, std::uint64_t seed) {
    const auto gen = static_cast<std::uint64_t>(piece.genome.generation_id);
    return {work_id, std::move(piece.genome), derive_seed(seed, gen), 0};
}

// The evaluator owns training; identity fields always come from the item.
RnnGenome evaluate_item(const Evaluator& evaluate, const WorkItem& item) {
    auto g = evaluate(item.genome, item.training_seed);
    if (!g.fitness) throw std::runtime_error("evaluator returned a genome without fitness");
    g.generation_id = item.genome.generation_id;
    g.island_of_origin = item.genome.island_of_origin;
    return g;
}

struct Request {
    int worker;
};
struct Done {
    WorkResult result;
};
struct Failed {
    std::uint64_t work_id;
    int worker;
    std::string what;
};
using Message = std::variant<Request, Done, Failed>;

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

Evaluator make_trainer_evaluator(const EvaluationData& data, TrainingConfig config) {
    config.check();
    return [&data, config](const RnnGenome& genome, std::uint64_t seed) {
        return train(genome, data.training, data.validation, config, seed).genome;
    };
}

std::string Schedule::to_text() const {
    std::string out;
    for (const auto& s : steps) {
        switch (s.kind) {
            case ScheduleStep::Kind::generate: out += "generate " + std::to_string(s.work_id) + "\n"; break;
            case ScheduleStep::Kind::integrate: out += "integrate " + std::to_string(s.work_id) + "\n"; break;
            case ScheduleStep::Kind::fail: out += "fail " + std::to_string(s.work_id) + "\n"; break;
        }
    }
    return out;
}

Schedule Schedule::from_text(std::string_view text) {
    Schedule schedule;
    std::istringstream in{std::string(text)};
    std::string word;
    std::uint64_t id = 0;
    std::size_t line = 0;
    while (in >> word) {
        ++line;
        if (!(in >> id)) throw std::invalid_argument("schedule line " + std::to_string(line) + ": missing work id");
        ScheduleStep step{ScheduleStep::Kind::generate, id};
        if (word == "integrate") {
            step.kind = ScheduleStep::Kind::integrate;
        } else if (word == "fail") {
            step.kind = ScheduleStep::Kind::fail;
        } else if (word != "generate") {
            throw std::invalid_argument("schedule line " + std::to_string(line) + ": unknown step '" + word + "'");
        }
        schedule.steps.push_back(step);
    }
    return schedule;
}

void Schedule::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_text();
}

Schedule Schedule::read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

RunReport run(RunState state, const Evaluator& evaluate, std::uint64_t seed, const RuntimeOptions& options) {
    if (options.n_workers < 1) throw std::invalid_argument("n_workers must be at least 1");
    const auto t0 = Clock::now();
    const auto n = static_cast<std::size_t>(options.n_workers);
    RunReport report{std::move(state), {}, 0.0, std::vector<std::int64_t>(n, 0)};
    auto& st = report.state;

    Channel<Message> inbox;
    std::vector<Channel<WorkItem>> mailboxes(n);
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
        workers.emplace_back([&, w] {
            const int id = static_cast<int>(w);
            inbox.push(Request{id});
            while (auto item = mailboxes[w].pop()) {
                const auto started = Clock::now();
                try {
                    auto g = evaluate_item(evaluate, *item);
                    inbox.push(Done{WorkResult{item->work_id, std::move(g), seconds_since(started), id}});
                } catch (const std::exception& e) {
                    inbox.push(Failed{item->work_id, id, e.what()});
                } catch (...) {
                    inbox.push(Failed{item->work_id, id, "unknown failure"});
                }
            }
        });
    }

    std::map<std::uint64_t, WorkItem> in_flight;
    std::deque<WorkItem> reissue;
    std::uint64_t next_id = 0;

    // Hands the worker its next item; false when nothing is left to give.
    const auto dispatch = [&](int worker) {
        WorkItem item;
        if (!reissue.empty()) {
            item = std::move(reissue.front());
            reissue.pop_front();
            ++item.attempt;
        } else {
            auto piece = st.next_work();
            if (!piece) return false;
            item = make_item(next_id++, std::move(*piece), seed);
            report.schedule.steps.push_back({ScheduleStep::Kind::generate, item.work_id});
        }
        in_flight[item.work_id] = item;
        ++report.issued;
        mailboxes[static_cast<std::size_t>(worker)].push(std::move(item));
        return true;
    };

    const auto shutdown = [&] {
        for (auto& m : mailboxes) m.close();
        for (auto& t : workers) t.join();
    };

    try {
        while (!(st.exhausted() && in_flight.empty() && reissue.empty())) {
            auto msg = inbox.pop();
            if (auto* r = std::get_if<Request>(&*msg)) {
                dispatch(r->worker);
            } else if (auto* d = std::get_if<Done>(&*msg)) {
                auto& res = d->result;
                in_flight.erase(res.work_id);
                ++report.completed;
                ++report.completed_per_worker[static_cast<std::size_t>(res.worker)];
                report.schedule.steps.push_back({ScheduleStep::Kind::integrate, res.work_id});
                st.insert_result(std::move(res.genome));
                report_progress(st, options);
                dispatch(res.worker);
            } else if (auto* f = std::get_if<Failed>(&*msg)) {
                ++report.failed_attempts;
                auto it = in_flight.find(f->work_id);
                if (it->second.attempt == 0) {
                    reissue.push_back(std::move(it->second));
                    in_flight.erase(it);
                } else {
                    st.record_failure(it->second.genome);
                    in_flight.erase(it);
                    report.schedule.steps.push_back({ScheduleStep::Kind::fail, f->work_id});
                    report_progress(st, options);
                }
                dispatch(f->worker);
            }
        }
    } catch (...) {
        shutdown();
        throw;
    }
    shutdown();
    report.seconds = seconds_since(t0);
    return report;
}

RunReport run_sequential(RunState state, const Evaluator& evaluate, std::uint64_t seed,
                         const RuntimeOptions& options) {
    const auto t0 = Clock::now();
    RunReport report{std::move(state), {}, 0.0, std::vector<std::int64_t>(1, 0)};
    auto& st = report.state;
    std::uint64_t next_id = 0;
    while (auto piece = st.next_work()) {
        const auto item = make_item(next_id++, std::move(*piece), seed);
        report.schedule.steps.push_back({ScheduleStep::Kind::generate, item.work_id});
        std::optional<RnnGenome> trained;
        for (int attempt = 0; attempt < 2 && !trained; ++attempt) {
            ++report.issued;
            try {
                trained = evaluate_item(evaluate, item);
            } catch (...) {
                ++report.failed_attempts;
            }
        }
        if (trained) {
            ++report.completed;
            ++report.completed_per_worker[0];
            report.schedule.steps.push_back({ScheduleStep::Kind::integrate, item.work_id});
            st.insert_result(std::move(*trained));
        } else {
            st.record_failure(item.genome);
            report.schedule.steps.push_back({ScheduleStep::Kind::fail, item.work_id});
        }
        report_progress(st, options);
    }
    report.seconds = seconds_since(t0);
    return report;
}

RunReport replay(RunState state, const Schedule& schedule, const Evaluator& evaluate, std::uint64_t seed) {
    const auto t0 = Clock::now();
    RunReport report{std::move(state), schedule, 0.0, std::vector<std::int64_t>(1, 0)};
    auto& st = report.state;
    std::map<std::uint64_t, WorkItem> pending;
    std::uint64_t next_id = 0;
    for (const auto& step : schedule.steps) {
        switch (step.kind) {
            case ScheduleStep::Kind::generate: {
                if (step.work_id != next_id) throw std::invalid_argument("replay: work ids out of order");
                auto piece = st.next_work();
                if (!piece) throw std::invalid_argument("replay: schedule generates past the budget");
                pending.emplace(next_id, make_item(next_id, std::move(*piece), seed));
                ++next_id;
                break;
            }
            case ScheduleStep::Kind::integrate:
            case ScheduleStep::Kind::fail: {
                auto it = pending.find(step.work_id);
                if (it == pending.end()) throw std::invalid_argument("replay: unknown or repeated work id");
                if (step.kind == ScheduleStep::Kind::integrate) {
                    ++report.issued;
                    ++report.completed;
                    st.insert_result(evaluate_item(evaluate, it->second));
                } else {
                    st.record_failure(it->second.genome);
                }
                pending.erase(it);
                break;
            }
        }
    }
    report.completed_per_worker[0] = report.completed;
    report.seconds = seconds_since(t0);
    return report;
}

}  // namespace rnnevo
