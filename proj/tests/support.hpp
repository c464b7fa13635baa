#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rnnevo/data.hpp"
#include "rnnevo/evolution.hpp"
#include "rnnevo/genome.hpp"

namespace rnnevo::testing {

struct RandomGenomeSpec {
    int inputs = 3;
    int outputs = 1;
    int hidden = 4;
    double edge_probability = 0.5;
    int recurrent_edges = 3;
    int max_skip = 3;
    double disable_probability = 0.0;
    std::vector<CellType> cell_types{kAllCellTypes.begin(), kAllCellTypes.end()};
};

inline void randomize_params(NodeGene& node, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (double& v : node.params.values()) v = u(rng);
}

/// Random DAG over depth-ordered nodes plus random recurrent edges. Not
/// guaranteed valid; callers that need validity filter with is_valid.
inline RnnGenome random_genome(const RandomGenomeSpec& spec, InnovationRegistry& registry, Rng& rng) {
    auto g = seed_genome(spec.inputs, spec.outputs, registry, rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    for (int h = 0; h < spec.hidden; ++h) {
        NodeGene n;
        n.innovation_id = registry.new_hidden_node();
        n.kind = NodeKind::hidden;
        n.cell_type = spec.cell_types[rng() % spec.cell_types.size()];
        n.params = CellParams(n.cell_type);
        n.depth = 0.05 + 0.9 * unit(rng);
        randomize_params(n, rng);
        g.nodes.push_back(n);
    }
    for (auto& n : g.nodes) {
        if (n.kind == NodeKind::output) randomize_params(n, rng);
    }
    g.edges.clear();
    for (const auto& a : g.nodes) {
        for (const auto& b : g.nodes) {
            if (a.depth >= b.depth) continue;
            const bool io_pair = a.kind == NodeKind::input && b.kind == NodeKind::output;
            if (unit(rng) < spec.edge_probability || (io_pair && spec.hidden == 0)) {
                EdgeGene e;
                e.source = a.innovation_id;
                e.target = b.innovation_id;
                e.innovation_id = registry.edge(e.source, e.target);
                e.weight = weight(rng);
                g.edges.push_back(e);
            }
        }
    }
    std::vector<const NodeGene*> targets;
    for (const auto& n : g.nodes) {
        if (n.kind != NodeKind::input) targets.push_back(&n);
    }
    for (int r = 0; r < spec.recurrent_edges; ++r) {
        const auto& src = g.nodes[rng() % g.nodes.size()];
        const auto& dst = *targets[rng() % targets.size()];
        const int skip = 1 + static_cast<int>(rng() % static_cast<unsigned>(spec.max_skip));
        if (g.has_recurrent_edge(src.innovation_id, dst.innovation_id, skip)) continue;
        RecurrentEdgeGene e;
        e.source = src.innovation_id;
        e.target = dst.innovation_id;
        e.time_skip = skip;
        e.innovation_id = registry.recurrent_edge(e.source, e.target, skip);
        e.weight = weight(rng);
        g.recurrent_edges.push_back(e);
    }
    if (spec.disable_probability > 0.0) {
        for (auto& n : g.nodes) {
            if (n.kind != NodeKind::output && unit(rng) < spec.disable_probability) n.enabled = false;
        }
        for (auto& e : g.edges) {
            if (unit(rng) < spec.disable_probability) e.enabled = false;
        }
        for (auto& e : g.recurrent_edges) {
            if (unit(rng) < spec.disable_probability) e.enabled = false;
        }
    }
    return g;
}

/// Keeps drawing until the genome validates.
inline RnnGenome random_valid_genome(const RandomGenomeSpec& spec, InnovationRegistry& registry, Rng& rng) {
    for (;;) {
        auto g = random_genome(spec, registry, rng);
        if (is_valid(g)) return g;
    }
}

inline Frames random_frames(std::size_t count, std::size_t n_inputs, std::size_t n_outputs, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Frames f;
    f.count = count;
    f.n_inputs = n_inputs;
    f.n_outputs = n_outputs;
    for (std::size_t i = 0; i < count * n_inputs; ++i) f.inputs.push_back(u(rng));
    for (std::size_t i = 0; i < count * n_outputs; ++i) f.targets.push_back(u(rng));
    return f;
}

/// A varied pool of valid genomes grown from one seed by random operators
/// (split edge included) and crossovers, with random fitness values.
inline std::vector<RnnGenome> grow_pool(EvolutionContext& ctx, int n_inputs, std::size_t size, int steps) {
    std::vector<RnnGenome> pool{seed_genome(n_inputs, 1, ctx.registry, ctx.rng)};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    pool.front().fitness = u(ctx.rng);
    for (int s = 0; s < steps; ++s) {
        const auto& parent = pool[ctx.rng() % pool.size()];
        OpResult r;
        if (u(ctx.rng) < 0.2 && pool.size() > 1) {
            r = crossover(parent, pool[ctx.rng() % pool.size()], ctx);
        } else {
            r = apply_mutation(static_cast<MutationOp>(ctx.rng() % kMutationOpCount), parent, ctx);
        }
        if (r.status != OpStatus::ok) continue;
        r.child->fitness = u(ctx.rng);
        r.child->generation_id = s;
        if (pool.size() < size) {
            pool.push_back(std::move(*r.child));
        } else {
            pool[ctx.rng() % pool.size()] = std::move(*r.child);
        }
    }
    return pool;
}

/// Pearson chi-square statistic of observed counts against equal expectation.
inline double chi_square_uniform(const std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    const double expected = total / static_cast<double>(counts.size());
    double chi = 0.0;
    for (double c : counts) chi += (c - expected) * (c - expected) / expected;
    return chi;
}

/// Relative error with an absolute floor, as used by the gradient checks.
inline bool gradient_close(double analytic, double numeric, double rel = 1e-4, double floor = 1e-7) {
    const double diff = std::abs(analytic - numeric);
    if (diff <= floor) return true;
    return diff / std::max(std::abs(analytic), std::abs(numeric)) <= rel;
}

}  // namespace rnnevo::testing
