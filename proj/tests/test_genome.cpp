#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "rnnevo/genome.hpp"
#include "support.hpp"

using namespace rnnevo;
using rnnevo::testing::random_genome;
using rnnevo::testing::RandomGenomeSpec;

namespace {

bool has_violation(const RnnGenome& g, ViolationKind kind) {
    const auto v = validate(g);
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

// Transitive closure over enabled connections by repeated path extension,
// then element membership on some input -> element -> output path.
ReachableSet closure_oracle(const RnnGenome& g) {
    const std::size_t n = g.nodes.size();
    auto idx = [&](InnovationId id) {
        for (std::size_t i = 0; i < n; ++i) {
            if (g.nodes[i].innovation_id == id) return i;
        }
        return n;
    };
    std::vector<std::vector<bool>> path(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) path[i][i] = g.nodes[i].enabled;
    auto link = [&](InnovationId s, InnovationId t, bool enabled) {
        const auto a = idx(s), b = idx(t);
        if (enabled && g.nodes[a].enabled && g.nodes[b].enabled) path[a][b] = true;
    };
    for (const auto& e : g.edges) link(e.source, e.target, e.enabled);
    for (const auto& e : g.recurrent_edges) link(e.source, e.target, e.enabled);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (path[i][k] && path[k][j]) path[i][j] = true;
            }
        }
    }
    auto from_input = [&](std::size_t v) {
        for (std::size_t i = 0; i < n; ++i) {
            if (g.nodes[i].kind == NodeKind::input && path[i][v]) return true;
        }
        return false;
    };
    auto to_output = [&](std::size_t v) {
        for (std::size_t o = 0; o < n; ++o) {
            if (g.nodes[o].kind == NodeKind::output && path[v][o]) return true;
        }
        return false;
    };
    ReachableSet out;
    for (std::size_t v = 0; v < n; ++v) {
        if (from_input(v) && to_output(v)) out.nodes.insert(g.nodes[v].innovation_id);
    }
    auto edge_ok = [&](InnovationId s, InnovationId t, bool enabled) {
        const auto a = idx(s), b = idx(t);
        return enabled && g.nodes[a].enabled && g.nodes[b].enabled && from_input(a) && to_output(b);
    };
    for (const auto& e : g.edges) {
        if (edge_ok(e.source, e.target, e.enabled)) out.edges.insert(e.innovation_id);
    }
    for (const auto& e : g.recurrent_edges) {
        if (edge_ok(e.source, e.target, e.enabled)) out.recurrent_edges.insert(e.innovation_id);
    }
    return out;
}

}  // namespace

TEST(Reachability, DirectPath) {
    InnovationRegistry reg;
    Rng rng(1);
    const auto g = seed_genome(1, 1, reg, rng);
    const auto r = reachable_set(g);
    EXPECT_EQ(r.nodes.size(), 2u);
    EXPECT_EQ(r.edges.size(), 1u);
}

TEST(Reachability, DeadEndHiddenNodeExcluded) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(1, 1, reg, rng);
    NodeGene h;
    h.innovation_id = reg.new_hidden_node();
    h.depth = 0.5;
    g.nodes.push_back(h);
    const auto in = g.nodes[0].innovation_id, out = g.nodes[1].innovation_id;
    g.edges.push_back({reg.edge(in, h.innovation_id), in, h.innovation_id, 0.1, true});
    g.edges.push_back({reg.edge(h.innovation_id, out), h.innovation_id, out, 0.1, false});
    const auto r = reachable_set(g);
    EXPECT_FALSE(r.nodes.count(h.innovation_id));
    EXPECT_EQ(r.edges.size(), 1u);
}

TEST(Reachability, RecurrentOnlyPathCounts) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(1, 1, reg, rng);
    NodeGene h;
    h.innovation_id = reg.new_hidden_node();
    h.depth = 0.5;
    g.nodes.push_back(h);
    const auto in = g.nodes[0].innovation_id, out = g.nodes[1].innovation_id;
    g.edges.push_back({reg.edge(in, h.innovation_id), in, h.innovation_id, 0.1, true});
    g.recurrent_edges.push_back({reg.recurrent_edge(h.innovation_id, out, 2), h.innovation_id, out, 2, 0.1, true});
    EXPECT_TRUE(reachable_set(g).nodes.count(h.innovation_id));
}

TEST(Reachability, AgreesWithClosureOracle) {
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        InnovationRegistry reg;
        RandomGenomeSpec spec;
        spec.inputs = 1 + static_cast<int>(rng() % 3);
        spec.outputs = 1 + static_cast<int>(rng() % 2);
        spec.hidden = static_cast<int>(rng() % 7);
        spec.edge_probability = 0.3;
        spec.recurrent_edges = static_cast<int>(rng() % 5);
        spec.disable_probability = 0.2;
        const auto g = random_genome(spec, reg, rng);
        ASSERT_LE(g.nodes.size(), 12u);
        ASSERT_EQ(reachable_set(g), closure_oracle(g)) << dump(g);
    }
}

TEST(Validate, SeedIsValid) {
    InnovationRegistry reg;
    Rng rng(1);
    EXPECT_TRUE(is_valid(seed_genome(3, 2, reg, rng)));
}

TEST(Validate, DisabledSoleEdgeMakesOutputUnreachable) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(1, 1, reg, rng);
    g.edges[0].enabled = false;
    EXPECT_TRUE(has_violation(g, ViolationKind::unreachable_output));
}

TEST(Validate, DuplicateRecurrentTriple) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(1, 1, reg, rng);
    const auto in = g.nodes[0].innovation_id, out = g.nodes[1].innovation_id;
    g.recurrent_edges.push_back({100, in, out, 3, 0.1, true});
    g.recurrent_edges.push_back({101, in, out, 3, 0.2, true});
    EXPECT_TRUE(has_violation(g, ViolationKind::duplicate_recurrent_triple));
}

TEST(Validate, DepthOrderAndDuplicates) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(1, 1, reg, rng);
    const auto in = g.nodes[0].innovation_id, out = g.nodes[1].innovation_id;
    auto bad = g;
    bad.edges.push_back({50, out, in, 0.1, true});
    EXPECT_TRUE(has_violation(bad, ViolationKind::depth_order));
    bad = g;
    bad.nodes.push_back(g.nodes[0]);
    EXPECT_TRUE(has_violation(bad, ViolationKind::duplicate_node_id));
    bad = g;
    bad.recurrent_edges.push_back({60, out, out, 11, 0.1, true});
    EXPECT_TRUE(has_violation(bad, ViolationKind::bad_time_skip));
    bad = g;
    bad.nodes[0].params = CellParams(CellType::gru);
    EXPECT_FALSE(is_valid(bad));
    bad = g;
    bad.edges[0].weight = std::nan("");
    EXPECT_TRUE(has_violation(bad, ViolationKind::non_finite_value));
}

TEST(Seed, Counts) {
    InnovationRegistry reg;
    Rng rng(1);
    const auto g = seed_genome(26, 1, reg, rng);
    EXPECT_EQ(g.nodes.size(), 27u);
    EXPECT_EQ(g.edges.size(), 26u);
    EXPECT_TRUE(g.recurrent_edges.empty());
    const auto small = seed_genome(1, 1, reg, rng);
    EXPECT_EQ(small.nodes.size(), 2u);
    EXPECT_EQ(small.edges.size(), 1u);
    EXPECT_THROW(seed_genome(0, 1, reg, rng), std::invalid_argument);
}

TEST(Seed, WeightsUniformOnHalfInterval) {
    InnovationRegistry reg;
    double sum = 0.0, sq = 0.0, lo = 1.0, hi = -1.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        Rng rng(static_cast<std::uint64_t>(s));
        const double w = seed_genome(1, 1, reg, rng).edges[0].weight;
        sum += w;
        sq += w * w;
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    EXPECT_LT(std::abs(sum / n), 0.01);
    EXPECT_NEAR(sq / n, 1.0 / 12.0, 0.005);
    EXPECT_GE(lo, -0.5);
    EXPECT_LE(hi, 0.5);
}

TEST(Seed, SharesInputOutputInnovations) {
    InnovationRegistry reg;
    Rng rng(1);
    const auto a = seed_genome(3, 1, reg, rng);
    const auto b = seed_genome(3, 1, reg, rng);
    for (std::size_t i = 0; i < a.nodes.size(); ++i) EXPECT_EQ(a.nodes[i].innovation_id, b.nodes[i].innovation_id);
    for (std::size_t i = 0; i < a.edges.size(); ++i) EXPECT_EQ(a.edges[i].innovation_id, b.edges[i].innovation_id);
}

TEST(Registry, SameEventSameId) {
    InnovationRegistry reg;
    EXPECT_EQ(reg.edge(1, 2), reg.edge(1, 2));
    EXPECT_NE(reg.edge(1, 2), reg.edge(2, 1));
    EXPECT_EQ(reg.recurrent_edge(1, 2, 3), reg.recurrent_edge(1, 2, 3));
    EXPECT_NE(reg.recurrent_edge(1, 2, 3), reg.recurrent_edge(1, 2, 4));
    EXPECT_NE(reg.new_hidden_node(), reg.new_hidden_node());
}

TEST(Registry, AbsorbAvoidsCollisions) {
    InnovationRegistry a;
    Rng rng(5);
    RandomGenomeSpec spec;
    const auto g = random_genome(spec, a, rng);
    InnovationRegistry b;
    b.absorb(g);
    EXPECT_GE(b.next_node_id(), a.next_node_id());
    const auto fresh = b.new_hidden_node();
    EXPECT_EQ(g.find_node(fresh), nullptr);
    EXPECT_EQ(b.edge(g.edges[0].source, g.edges[0].target), g.edges[0].innovation_id);
}

TEST(Serialize, RoundTripSeed) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(2, 1, reg, rng);
    EXPECT_EQ(deserialize(serialize(g)), g);
    g.fitness = 0.125;
    g.generation_id = 17;
    g.island_of_origin = 3;
    EXPECT_EQ(deserialize(serialize(g)), g);
}

TEST(Serialize, RoundTripRandomCorpusWithAllCellTypes) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        InnovationRegistry reg;
        RandomGenomeSpec spec;
        spec.hidden = 8;
        spec.disable_probability = 0.1;
        auto g = random_genome(spec, reg, rng);
        if (trial % 2) g.fitness = static_cast<double>(trial) / 7.0;
        ASSERT_EQ(deserialize(serialize(g)), g);
    }
}

TEST(Serialize, TruncatedStreamFailsWithOffset) {
    InnovationRegistry reg;
    Rng rng(1);
    const auto bytes = serialize(seed_genome(2, 1, reg, rng));
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, bytes.size() / 2, bytes.size() - 1}) {
        const std::span<const std::uint8_t> part(bytes.data(), cut);
        try {
            (void)deserialize(part);
            FAIL() << "no error for cut " << cut;
        } catch (const DecodeError& e) {
            EXPECT_LE(e.offset(), cut);
        }
    }
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(deserialize(bad), DecodeError);
    bad = bytes;
    bad.push_back(0);
    EXPECT_THROW(deserialize(bad), DecodeError);
}

TEST(Dump, OneLinePerElement) {
    InnovationRegistry reg;
    Rng rng(1);
    const auto g = seed_genome(2, 1, reg, rng);
    const auto text = dump(g);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);  // header + 3 nodes + 2 edges
}
