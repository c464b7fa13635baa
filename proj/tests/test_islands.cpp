#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "rnnevo/islands.hpp"
#include "rnnevo/runtime.hpp"

using namespace rnnevo;

namespace {

RnnGenome with_fitness(double f, std::int64_t id = 0) {
    RnnGenome g;
    g.fitness = f;
    g.generation_id = id;
    return g;
}

std::vector<double> fitnesses(const std::vector<RnnGenome>& members) {
    std::vector<double> out;
    for (const auto& g : members) out.push_back(*g.fitness);
    return out;
}

// Deterministic stand-in for training: fitness from the work seed.
RnnGenome pseudo_train(const RnnGenome& g, std::uint64_t seed) {
    auto out = g;
    out.fitness = static_cast<double>(derive_seed(seed, 1) >> 11) * 0x1.0p-53;
    return out;
}

}  // namespace

TEST(SteadyStateInsert, EvictsWorst) {
    std::vector<RnnGenome> m{with_fitness(0.5), with_fitness(0.7), with_fitness(0.9)};
    EXPECT_TRUE(steady_state_insert(m, 3, with_fitness(0.6)));
    EXPECT_EQ(fitnesses(m), (std::vector<double>{0.5, 0.6, 0.7}));
}

TEST(SteadyStateInsert, TieWithWorstRejected) {
    std::vector<RnnGenome> m{with_fitness(0.5), with_fitness(0.7), with_fitness(0.9)};
    EXPECT_FALSE(steady_state_insert(m, 3, with_fitness(0.9)));
    EXPECT_EQ(fitnesses(m), (std::vector<double>{0.5, 0.7, 0.9}));
}

TEST(SteadyStateInsert, DivergedFillsButNeverDisplaces) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<RnnGenome> m{with_fitness(0.5)};
    EXPECT_TRUE(steady_state_insert(m, 2, with_fitness(inf)));
    EXPECT_FALSE(steady_state_insert(m, 2, with_fitness(inf)));
    EXPECT_TRUE(steady_state_insert(m, 2, with_fitness(3.0)));
    EXPECT_EQ(fitnesses(m), (std::vector<double>{0.5, 3.0}));
    EXPECT_THROW(steady_state_insert(m, 2, RnnGenome{}), std::invalid_argument);
}

TEST(SteadyStateInsert, RandomTracesKeepSortedCapacityAndMonotoneBest) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trace = 0; trace < 200; ++trace) {
        const std::size_t cap = 1 + rng() % 6;
        std::vector<RnnGenome> m;
        std::vector<double> all;  // oracle: best `cap` distinct arrivals, in the strict-improvement sense
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 60; ++k) {
            const double f = std::floor(u(rng) * 20) / 20;  // coarse grid to force ties
            steady_state_insert(m, cap, with_fitness(f, k));
            ASSERT_LE(m.size(), cap);
            ASSERT_TRUE(std::is_sorted(m.begin(), m.end(), [](const auto& a, const auto& b) { return *a.fitness < *b.fitness; }));
            ASSERT_LE(*m.front().fitness, best);
            best = *m.front().fitness;
            all.push_back(f);
        }
        std::sort(all.begin(), all.end());
        ASSERT_EQ(*m.front().fitness, all.front());
    }
}

TEST(EventLog, JsonLinesRoundTrip) {
    EventLog log;
    log.append(EventKind::generated, 2, 7, std::nullopt, "mutation:add_node");
    log.append(EventKind::evaluated, 2, 7, 0.1 + 0.2);
    log.append(EventKind::evaluated, 1, 8, std::numeric_limits<double>::infinity());
    log.append(EventKind::discarded, 0, -1);
    const auto text = log.to_jsonl();
    EXPECT_NE(text.find("\"diverged\":true"), std::string::npos);
    const auto back = EventLog::from_jsonl(text);
    ASSERT_EQ(back.size(), 4u);
    EXPECT_TRUE(std::equal(back.events().begin(), back.events().end(), log.events().begin()));
    EXPECT_EQ(back.to_jsonl(), text);
    EXPECT_THROW(EventLog::from_jsonl("{\"seq\":0}\n"), std::invalid_argument);
}

TEST(RunState, BootstrapFillsEachIslandFromTheSeed) {
    IslandConfig ic{3, 4, 100};
    RunState st(ic, {}, 3, 1, 5);
    std::map<int, int> per_island;
    for (int k = 0; k < 12; ++k) {
        auto w = st.next_work();
        ASSERT_TRUE(w);
        EXPECT_EQ(w->detail, "bootstrap");
        EXPECT_EQ(w->genome.island_of_origin, k % 3);
        EXPECT_EQ(w->genome.generation_id, k);
        EXPECT_TRUE(is_valid(w->genome));
        if (per_island[w->genome.island_of_origin]++ == 0) {
            EXPECT_EQ(w->genome.nodes, st.seed().nodes);
            EXPECT_EQ(w->genome.edges, st.seed().edges);
        }
    }
    // Islands are still empty (nothing trained yet), so bootstrap continues.
    EXPECT_EQ(st.next_work()->detail, "bootstrap");
}

TEST(RunState, RoundRobinOverTwentyCalls) {
    IslandConfig ic{10, 5, 2000};
    RunState st(ic, {}, 2, 1, 1);
    std::vector<int> visits(10, 0);
    for (int k = 0; k < 20; ++k) {
        auto w = st.next_work();
        ++visits[static_cast<std::size_t>(w->genome.island_of_origin)];
        st.insert_result(pseudo_train(w->genome, static_cast<std::uint64_t>(k)));
    }
    EXPECT_EQ(visits, std::vector<int>(10, 2));
}

TEST(RunState, BudgetGivesExactlyThatManyChildren) {
    IslandConfig ic{10, 5, 2000};
    RunState st(ic, {}, 3, 1, 2);
    std::int64_t handed = 0;
    while (auto w = st.next_work()) {
        ++handed;
        st.insert_result(pseudo_train(w->genome, static_cast<std::uint64_t>(handed)));
    }
    EXPECT_EQ(handed, 2000);
    EXPECT_EQ(st.generated_count(), 2000);
    EXPECT_EQ(st.evaluated_count(), 2000);
    EXPECT_FALSE(st.next_work());
    for (const auto& island : st.islands()) EXPECT_EQ(island.size(), 5u);
    EXPECT_EQ(st.inserted_count() + st.rejected_count(), 2000);
}

TEST(RunState, InsertRejectsBadInput) {
    RunState st({2, 5, 10}, {}, 2, 1, 3);
    auto w = st.next_work();
    EXPECT_THROW(st.insert_result(w->genome), std::invalid_argument);
    auto g = pseudo_train(w->genome, 1);
    g.island_of_origin = 7;
    EXPECT_THROW(st.insert_result(g), std::invalid_argument);
}

TEST(RunState, BestGenome) {
    RunState st({3, 5, 10}, {}, 2, 1, 3);
    EXPECT_THROW(st.best_genome(), std::logic_error);
    EXPECT_FALSE(st.best_fitness());
    const std::vector<double> table{0.4, 0.2, 0.7, 0.2, 0.9};
    for (std::size_t k = 0; k < table.size(); ++k) {
        auto w = st.next_work();
        w->genome.fitness = table[k];
        st.insert_result(w->genome);
        if (k == 0) EXPECT_EQ(st.best_genome().generation_id, 0);
    }
    EXPECT_EQ(*st.best_genome().fitness, 0.2);
    EXPECT_EQ(st.best_genome().generation_id, 1);  // tie with id 3 goes to the older genome
}

TEST(RunState, LoadedSeedGenomeIsUsed) {
    InnovationRegistry reg;
    Rng rng(4);
    auto seed = seed_genome(3, 1, reg, rng);
    RunState st({2, 2, 10}, {}, 3, 1, 9, seed);
    EXPECT_EQ(st.seed().edges, seed.edges);
    EXPECT_THROW(RunState({2, 2, 10}, {}, 4, 1, 9, seed), std::invalid_argument);
}

TEST(RunState, TraceInvariantsAndLogReplay) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        IslandConfig ic{4, 5, 400};
        RunState st(ic, {}, 3, 1, seed);
        std::vector<double> best(4, std::numeric_limits<double>::infinity());
        std::vector<RnnGenome> held;
        std::mt19937_64 order(seed);
        std::uint64_t k = 0;
        // Hold a few items back to insert out of generation order.
        while (auto w = st.next_work()) {
            held.push_back(pseudo_train(w->genome, seed * 1000 + k++));
            while (held.size() > 3 || (st.exhausted() && !held.empty())) {
                const auto pick = order() % held.size();
                st.insert_result(held[pick]);
                held.erase(held.begin() + static_cast<std::ptrdiff_t>(pick));
                for (std::size_t i = 0; i < 4; ++i) {
                    const auto& island = st.islands()[i];
                    ASSERT_LE(island.size(), 5u);
                    if (island.empty()) continue;
                    ASSERT_LE(*island.front().fitness, best[i]);
                    best[i] = *island.front().fitness;
                }
            }
        }
        EXPECT_EQ(replay_islands(st.log(), 4, 5), member_records(st.islands()));
        double log_min = std::numeric_limits<double>::infinity();
        for (const auto& e : st.log().events()) {
            if (e.kind == EventKind::inserted) log_min = std::min(log_min, *e.fitness);
        }
        EXPECT_EQ(*st.best_genome().fitness, log_min);
    }
}
