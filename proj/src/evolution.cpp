#include "rnnevo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace rnnevo {

namespace {

constexpr std::array<std::string_view, kMutationOpCount> kOpNames = {
    "disable_edge", "enable_edge", "split_edge",  "add_edge",   "add_recurrent_edge", "enable_node",
    "disable_node", "add_node",    "split_node",  "merge_node", "clone"};

std::size_t pick(std::size_t n, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Uniform on the open interval (0, 1).
double open_unit(Rng& rng) {
    for (;;) {
        const double d = unit(rng);
        if (d > 0.0) return d;
    }
}

int random_skip(int max_skip, Rng& rng) { return std::uniform_int_distribution<int>(1, max_skip)(rng); }

RnnGenome fresh_child(const RnnGenome& parent) {
    RnnGenome child = parent;
    child.fitness.reset();
    child.generation_id = -1;
    return child;
}

OpResult finish(RnnGenome child, const EvolutionContext& ctx) {
    if (!is_valid(child, ctx.config.max_skip)) return {OpStatus::discarded, std::nullopt};
    return {OpStatus::ok, std::move(child)};
}

std::unordered_map<InnovationId, std::size_t> node_index(const RnnGenome& g) {
    std::unordered_map<InnovationId, std::size_t> idx;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) idx.emplace(g.nodes[i].innovation_id, i);
    return idx;
}

NodeGene new_hidden_node(double depth, EvolutionContext& ctx, const SampleStats& weights) {
    NodeGene n;
    n.innovation_id = ctx.registry.new_hidden_node();
    n.kind = NodeKind::hidden;
    const auto& types = ctx.config.allowed_cell_types;
    n.cell_type = types[pick(types.size(), ctx.rng)];
    n.params = CellParams(n.cell_type);
    for (double& v : n.params.values()) v = draw_new_weight(weights, ctx.rng);
    n.depth = depth;
    n.forget_bias_pending = n.cell_type == CellType::lstm;
    return n;
}

void push_edge(RnnGenome& g, EvolutionContext& ctx, InnovationId src, InnovationId dst, double weight) {
    g.edges.push_back({ctx.registry.edge(src, dst), src, dst, weight, true});
}

void push_recurrent(RnnGenome& g, EvolutionContext& ctx, InnovationId src, InnovationId dst, int skip, double weight) {
    g.recurrent_edges.push_back({ctx.registry.recurrent_edge(src, dst, skip), src, dst, skip, weight, true});
}

SampleStats weight_stats(const RnnGenome& g) {
    const auto w = g.all_weights();
    return sample_stats(w);
}

int draw_count(const SampleStats& s, Rng& rng, int lo) {
    double v = s.mean;
    if (s.stddev > 0.0) v = std::normal_distribution<double>(s.mean, s.stddev)(rng);
    const double r = std::round(v);
    if (!(r >= lo)) return lo;
    return static_cast<int>(std::min(r, 1e6));
}

// Random subset of size k (k <= pool size), order of `pool` preserved.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k, Rng& rng) {
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + pick(pool.size() - i, rng)]);
    pool.resize(k);
    return pool;
}

struct EdgeRef {
    bool recurrent;
    std::size_t index;
};

}  // namespace

std::string_view to_string(MutationOp op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<MutationOp> parse_mutation_op(std::string_view name) {
    for (std::size_t i = 0; i < kOpNames.size(); ++i) {
        if (kOpNames[i] == name) return static_cast<MutationOp>(i);
    }
    return std::nullopt;
}

std::string_view to_string(GenerationType type) {
    switch (type) {
        case GenerationType::intra_crossover: return "intra_crossover";
        case GenerationType::mutation: return "mutation";
        case GenerationType::inter_crossover: return "inter_crossover";
    }
    return "?";
}

void OperatorConfig::check() const {
    double sum = 0.0;
    for (double w : mutation_weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("mutation probabilities must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("mutation probabilities must sum to 1");
    for (double p : {p_intra_crossover, p_mutation, p_inter_crossover}) {
        if (!(p >= 0.0)) throw std::invalid_argument("generation probabilities must be non-negative");
    }
    if (std::abs(p_intra_crossover + p_mutation + p_inter_crossover - 1.0) > 1e-9) {
        throw std::invalid_argument("generation probabilities must sum to 1");
    }
    if (allowed_cell_types.empty()) throw std::invalid_argument("allowed_cell_types must not be empty");
    if (max_skip < 1) throw std::invalid_argument("max_skip must be >= 1");
    if (!(crossover_r_min <= crossover_r_max)) throw std::invalid_argument("crossover r range is empty");
    if (max_retries < 1) throw std::invalid_argument("max_retries must be >= 1");
}

SampleStats sample_stats(std::span<const double> xs) {
    SampleStats s;
    s.count = xs.size();
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
    return s;
}

double draw_new_weight(const SampleStats& parent_weights, Rng& rng) {
    if (parent_weights.count < 2) return std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    if (parent_weights.stddev == 0.0) return parent_weights.mean;
    return std::normal_distribution<double>(parent_weights.mean, parent_weights.stddev)(rng);
}

double recurrent_probability(const RnnGenome& genome) {
    const auto ff = static_cast<double>(genome.enabled_edge_count());
    const auto re = static_cast<double>(genome.enabled_recurrent_edge_count());
    return ff + re == 0.0 ? 0.0 : re / (ff + re);
}

DegreeStats degree_stats(const RnnGenome& g) {
    const auto idx = node_index(g);
    std::vector<double> in(g.nodes.size(), 0.0), out(g.nodes.size(), 0.0), rin(g.nodes.size(), 0.0);
    auto live = [&](InnovationId s, InnovationId t, bool enabled) {
        return enabled && g.nodes[idx.at(s)].enabled && g.nodes[idx.at(t)].enabled;
    };
    for (const auto& e : g.edges) {
        if (!live(e.source, e.target, e.enabled)) continue;
        out[idx.at(e.source)] += 1.0;
        in[idx.at(e.target)] += 1.0;
    }
    for (const auto& e : g.recurrent_edges) {
        if (live(e.source, e.target, e.enabled)) rin[idx.at(e.target)] += 1.0;
    }
    std::vector<double> ins, outs, rins;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        if (!n.enabled) continue;
        if (n.kind != NodeKind::input) {
            ins.push_back(in[i]);
            rins.push_back(rin[i]);
        }
        if (n.kind != NodeKind::output) outs.push_back(out[i]);
    }
    return {sample_stats(ins), sample_stats(outs), sample_stats(rins)};
}

OpResult disable_edge(const RnnGenome& parent, EvolutionContext& ctx) {
    std::vector<EdgeRef> pool;
    for (std::size_t i = 0; i < parent.edges.size(); ++i) {
        if (parent.edges[i].enabled) pool.push_back({false, i});
    }
    for (std::size_t i = 0; i < parent.recurrent_edges.size(); ++i) {
        if (parent.recurrent_edges[i].enabled) pool.push_back({true, i});
    }
    if (pool.empty()) return OpResult::not_applicable();
    const auto ref = pool[pick(pool.size(), ctx.rng)];
    auto child = fresh_child(parent);
    if (ref.recurrent) {
        child.recurrent_edges[ref.index].enabled = false;
    } else {
        child.edges[ref.index].enabled = false;
    }
    return finish(std::move(child), ctx);
}

OpResult enable_edge(const RnnGenome& parent, EvolutionContext& ctx) {
    std::vector<EdgeRef> pool;
    for (std::size_t i = 0; i < parent.edges.size(); ++i) {
        if (!parent.edges[i].enabled) pool.push_back({false, i});
    }
    for (std::size_t i = 0; i < parent.recurrent_edges.size(); ++i) {
        if (!parent.recurrent_edges[i].enabled) pool.push_back({true, i});
    }
    if (pool.empty()) return OpResult::not_applicable();
    const auto ref = pool[pick(pool.size(), ctx.rng)];
    auto child = fresh_child(parent);
    if (ref.recurrent) {
        child.recurrent_edges[ref.index].enabled = true;
    } else {
        child.edges[ref.index].enabled = true;
    }
    return finish(std::move(child), ctx);
}

OpResult split_edge(const RnnGenome& parent, EvolutionContext& ctx) {
    std::vector<EdgeRef> pool;
    for (std::size_t i = 0; i < parent.edges.size(); ++i) {
        if (parent.edges[i].enabled) pool.push_back({false, i});
    }
    for (std::size_t i = 0; i < parent.recurrent_edges.size(); ++i) {
        if (parent.recurrent_edges[i].enabled) pool.push_back({true, i});
    }
    if (pool.empty()) return OpResult::not_applicable();
    const auto ref = pool[pick(pool.size(), ctx.rng)];
    auto child = fresh_child(parent);
    const auto stats = weight_stats(parent);
    const InnovationId src = ref.recurrent ? child.recurrent_edges[ref.index].source : child.edges[ref.index].source;
    const InnovationId dst = ref.recurrent ? child.recurrent_edges[ref.index].target : child.edges[ref.index].target;
    double depth = 0.5 * (child.find_node(src)->depth + child.find_node(dst)->depth);
    // A recurrent edge between the output layer and itself has no interior
    // midpoint.
    if (!(depth > 0.0 && depth < 1.0)) depth = open_unit(ctx.rng);
    auto node = new_hidden_node(depth, ctx, stats);
    const auto id = node.innovation_id;
    child.nodes.push_back(std::move(node));
    if (ref.recurrent) {
        auto& e = child.recurrent_edges[ref.index];
        e.enabled = false;
        const int skip = e.time_skip;
        push_recurrent(child, ctx, src, id, skip, draw_new_weight(stats, ctx.rng));
        push_recurrent(child, ctx, id, dst, skip, draw_new_weight(stats, ctx.rng));
    } else {
        child.edges[ref.index].enabled = false;
        push_edge(child, ctx, src, id, draw_new_weight(stats, ctx.rng));
        push_edge(child, ctx, id, dst, draw_new_weight(stats, ctx.rng));
    }
    return finish(std::move(child), ctx);
}

OpResult add_edge(const RnnGenome& parent, EvolutionContext& ctx) {
    std::unordered_set<std::uint64_t> present;
    auto key = [](std::size_t a, std::size_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; };
    const auto idx = node_index(parent);
    for (const auto& e : parent.edges) present.insert(key(idx.at(e.source), idx.at(e.target)));
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t a = 0; a < parent.nodes.size(); ++a) {
        const auto& na = parent.nodes[a];
        if (!na.enabled || na.kind == NodeKind::output) continue;
        for (std::size_t b = 0; b < parent.nodes.size(); ++b) {
            const auto& nb = parent.nodes[b];
            if (!nb.enabled || nb.kind == NodeKind::input || !(na.depth < nb.depth)) continue;
            if (!present.count(key(a, b))) pool.emplace_back(a, b);
        }
    }
    if (pool.empty()) return OpResult::not_applicable();
    const auto [a, b] = pool[pick(pool.size(), ctx.rng)];
    auto child = fresh_child(parent);
    push_edge(child, ctx, parent.nodes[a].innovation_id, parent.nodes[b].innovation_id,
              draw_new_weight(weight_stats(parent), ctx.rng));
    return finish(std::move(child), ctx);
}

OpResult add_recurrent_edge(const RnnGenome& parent, EvolutionContext& ctx) {
    const int max_skip = ctx.config.max_skip;
    const auto idx = node_index(parent);
    std::unordered_map<std::uint64_t, std::vector<bool>> used;
    auto key = [](std::size_t a, std::size_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; };
    for (const auto& e : parent.recurrent_edges) {
        auto& v = used[key(idx.at(e.source), idx.at(e.target))];
        v.resize(static_cast<std::size_t>(max_skip) + 1, false);
        if (e.time_skip >= 1 && e.time_skip <= max_skip) v[static_cast<std::size_t>(e.time_skip)] = true;
    }
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t a = 0; a < parent.nodes.size(); ++a) {
        if (!parent.nodes[a].enabled) continue;
        for (std::size_t b = 0; b < parent.nodes.size(); ++b) {
            const auto& nb = parent.nodes[b];
            if (!nb.enabled || nb.kind == NodeKind::input) continue;
            const auto it = used.find(key(a, b));
            if (it == used.end() || std::count(it->second.begin() + 1, it->second.end(), false) > 0) {
                pool.emplace_back(a, b);
            }
        }
    }
    if (pool.empty()) return OpResult::not_applicable();
    const auto [a, b] = pool[pick(pool.size(), ctx.rng)];
    std::vector<int> free;
    const auto it = used.find(key(a, b));
    for (int k = 1; k <= max_skip; ++k) {
        if (it == used.end() || !it->second[static_cast<std::size_t>(k)]) free.push_back(k);
    }
    const int skip = free[pick(free.size(), ctx.rng)];
    auto child = fresh_child(parent);
    push_recurrent(child, ctx, parent.nodes[a].innovation_id, parent.nodes[b].innovation_id, skip,
                   draw_new_weight(weight_stats(parent), ctx.rng));
    return finish(std::move(child), ctx);
}

OpResult enable_node(const RnnGenome& parent, EvolutionContext& ctx) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < parent.nodes.size(); ++i) {
        if (!parent.nodes[i].enabled) pool.push_back(i);
    }
    if (pool.empty()) return OpResult::not_applicable();
    auto child = fresh_child(parent);
    auto& node = child.nodes[pool[pick(pool.size(), ctx.rng)]];
    node.enabled = true;
    const auto id = node.innovation_id;
    for (auto& e : child.edges) {
        if (e.source == id || e.target == id) e.enabled = true;
    }
    for (auto& e : child.recurrent_edges) {
        if (e.source == id || e.target == id) e.enabled = true;
    }
    return finish(std::move(child), ctx);
}

OpResult disable_node(const RnnGenome& parent, EvolutionContext& ctx) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < parent.nodes.size(); ++i) {
        if (parent.nodes[i].enabled && parent.nodes[i].kind != NodeKind::output) pool.push_back(i);
    }
    if (pool.empty()) return OpResult::not_applicable();
    auto child = fresh_child(parent);
    auto& node = child.nodes[pool[pick(pool.size(), ctx.rng)]];
    node.enabled = false;
    const auto id = node.innovation_id;
    for (auto& e : child.edges) {
        if (e.source == id || e.target == id) e.enabled = false;
    }
    for (auto& e : child.recurrent_edges) {
        if (e.source == id || e.target == id) e.enabled = false;
    }
    return finish(std::move(child), ctx);
}

OpResult add_node(const RnnGenome& parent, EvolutionContext& ctx) {
    const double depth = open_unit(ctx.rng);
    std::vector<InnovationId> lower, upper;
    for (const auto& n : parent.nodes) {
        if (!n.enabled) continue;
        if (n.depth < depth && n.kind != NodeKind::output) lower.push_back(n.innovation_id);
        if (n.depth > depth && n.kind != NodeKind::input) upper.push_back(n.innovation_id);
    }
    if (lower.empty() || upper.empty()) return OpResult::not_applicable();
    const auto degrees = degree_stats(parent);
    const auto weights = weight_stats(parent);
    const double p_rec = recurrent_probability(parent);
    const auto n_in = std::min<std::size_t>(static_cast<std::size_t>(draw_count(degrees.in, ctx.rng, 1)), lower.size());
    const auto n_out = std::min<std::size_t>(static_cast<std::size_t>(draw_count(degrees.out, ctx.rng, 1)), upper.size());

    auto child = fresh_child(parent);
    auto node = new_hidden_node(depth, ctx, weights);
    const auto id = node.innovation_id;
    child.nodes.push_back(std::move(node));
    std::set<std::tuple<InnovationId, InnovationId, int>> rec_used;
    auto connect = [&](InnovationId src, InnovationId dst) {
        if (unit(ctx.rng) < p_rec) {
            const int skip = random_skip(ctx.config.max_skip, ctx.rng);
            if (rec_used.insert({src, dst, skip}).second) {
                push_recurrent(child, ctx, src, dst, skip, draw_new_weight(weights, ctx.rng));
            }
        } else {
            push_edge(child, ctx, src, dst, draw_new_weight(weights, ctx.rng));
        }
    };
    for (auto src : sample_without_replacement(lower, n_in, ctx.rng)) connect(src, id);
    for (auto dst : sample_without_replacement(upper, n_out, ctx.rng)) connect(id, dst);

    std::vector<InnovationId> sources;
    for (const auto& n : parent.nodes) {
        if (n.enabled) sources.push_back(n.innovation_id);
    }
    sources.push_back(id);
    const int n_rec = draw_count(degrees.recurrent_in, ctx.rng, 0);
    for (int k = 0; k < n_rec; ++k) {
        const auto src = sources[pick(sources.size(), ctx.rng)];
        const int skip = random_skip(ctx.config.max_skip, ctx.rng);
        if (rec_used.insert({src, id, skip}).second) {
            push_recurrent(child, ctx, src, id, skip, draw_new_weight(weights, ctx.rng));
        }
    }
    return finish(std::move(child), ctx);
}

OpResult split_node(const RnnGenome& parent, EvolutionContext& ctx) {
    const auto idx = node_index(parent);
    auto live = [&](InnovationId other, bool enabled) { return enabled && parent.nodes[idx.at(other)].enabled; };
    struct Incident {
        std::vector<EdgeRef> in, out, self;
    };
    std::vector<std::pair<std::size_t, Incident>> pool;
    for (std::size_t i = 0; i < parent.nodes.size(); ++i) {
        const auto& n = parent.nodes[i];
        if (!n.enabled || n.kind != NodeKind::hidden) continue;
        Incident inc;
        for (std::size_t k = 0; k < parent.edges.size(); ++k) {
            const auto& e = parent.edges[k];
            if (e.target == n.innovation_id && live(e.source, e.enabled)) inc.in.push_back({false, k});
            if (e.source == n.innovation_id && live(e.target, e.enabled)) inc.out.push_back({false, k});
        }
        for (std::size_t k = 0; k < parent.recurrent_edges.size(); ++k) {
            const auto& e = parent.recurrent_edges[k];
            if (!e.enabled) continue;
            if (e.source == n.innovation_id && e.target == n.innovation_id) {
                inc.self.push_back({true, k});
            } else if (e.target == n.innovation_id && live(e.source, true)) {
                inc.in.push_back({true, k});
            } else if (e.source == n.innovation_id && live(e.target, true)) {
                inc.out.push_back({true, k});
            }
        }
        if (!inc.in.empty() && !inc.out.empty()) pool.emplace_back(i, std::move(inc));
    }
    if (pool.empty()) return OpResult::not_applicable();
    const auto& [ni, inc] = pool[pick(pool.size(), ctx.rng)];

    auto child = fresh_child(parent);
    const auto old_id = parent.nodes[ni].innovation_id;
    std::array<InnovationId, 2> ids{};
    for (auto& id : ids) {
        NodeGene n = parent.nodes[ni];
        n.innovation_id = ctx.registry.new_hidden_node();
        n.forget_bias_pending = false;
        id = n.innovation_id;
        child.nodes.push_back(n);
    }
    // Partition: each side gets at least one edge; a single edge goes to both.
    auto partition = [&](const std::vector<EdgeRef>& edges) {
        std::vector<std::vector<int>> sides(edges.size());
        if (edges.size() == 1) {
            sides[0] = {0, 1};
            return sides;
        }
        std::vector<std::size_t> order(edges.size());
        std::iota(order.begin(), order.end(), 0);
        order = sample_without_replacement(order, order.size(), ctx.rng);
        sides[order[0]] = {0};
        sides[order[1]] = {1};
        for (std::size_t k = 2; k < order.size(); ++k) sides[order[k]] = {static_cast<int>(pick(2, ctx.rng))};
        return sides;
    };
    auto rewire = [&](const EdgeRef& ref, InnovationId new_id, bool incoming) {
        if (ref.recurrent) {
            const auto& e = parent.recurrent_edges[ref.index];
            push_recurrent(child, ctx, incoming ? e.source : new_id, incoming ? new_id : e.target, e.time_skip, e.weight);
        } else {
            const auto& e = parent.edges[ref.index];
            push_edge(child, ctx, incoming ? e.source : new_id, incoming ? new_id : e.target, e.weight);
        }
    };
    const auto in_sides = partition(inc.in);
    for (std::size_t k = 0; k < inc.in.size(); ++k) {
        for (int s : in_sides[k]) rewire(inc.in[k], ids[static_cast<std::size_t>(s)], true);
    }
    const auto out_sides = partition(inc.out);
    for (std::size_t k = 0; k < inc.out.size(); ++k) {
        for (int s : out_sides[k]) rewire(inc.out[k], ids[static_cast<std::size_t>(s)], false);
    }
    for (const auto& ref : inc.self) {
        const auto& e = parent.recurrent_edges[ref.index];
        for (auto id : ids) push_recurrent(child, ctx, id, id, e.time_skip, e.weight);
    }
    child.nodes[ni].enabled = false;
    for (auto& e : child.edges) {
        if (e.source == old_id || e.target == old_id) e.enabled = false;
    }
    for (auto& e : child.recurrent_edges) {
        if (e.source == old_id || e.target == old_id) e.enabled = false;
    }
    return finish(std::move(child), ctx);
}

OpResult merge_node(const RnnGenome& parent, EvolutionContext& ctx) {
    std::vector<std::size_t> hidden;
    for (std::size_t i = 0; i < parent.nodes.size(); ++i) {
        if (parent.nodes[i].enabled && parent.nodes[i].kind == NodeKind::hidden) hidden.push_back(i);
    }
    if (hidden.size() < 2) return OpResult::not_applicable();
    const auto pair = sample_without_replacement(hidden, 2, ctx.rng);
    const auto& a = parent.nodes[pair[0]];
    const auto& b = parent.nodes[pair[1]];
    const auto ida = a.innovation_id, idb = b.innovation_id;
    auto merged_end = [&](InnovationId id) { return id == ida || id == idb; };
    const double depth = 0.5 * (a.depth + b.depth);
    const auto idx = node_index(parent);

    auto child = fresh_child(parent);
    auto node = new_hidden_node(depth, ctx, weight_stats(parent));
    const auto m = node.innovation_id;
    child.nodes.push_back(std::move(node));

    // Union of the pair's live connections; parallel duplicates average.
    std::map<std::pair<InnovationId, InnovationId>, std::pair<double, int>> ff;
    std::map<std::tuple<InnovationId, InnovationId, int>, std::pair<double, int>> rec;
    for (const auto& e : parent.edges) {
        if (!e.enabled) continue;
        const bool from = merged_end(e.source), to = merged_end(e.target);
        if (from == to) continue;  // unrelated, or between the merged pair
        const auto other = from ? e.target : e.source;
        const auto& on = parent.nodes[idx.at(other)];
        if (!on.enabled) continue;
        if (to && !(on.depth < depth)) continue;
        if (from && !(on.depth > depth)) continue;
        auto& slot = ff[from ? std::make_pair(m, other) : std::make_pair(other, m)];
        slot.first += e.weight;
        slot.second += 1;
    }
    for (const auto& e : parent.recurrent_edges) {
        if (!e.enabled) continue;
        const bool from = merged_end(e.source), to = merged_end(e.target);
        if (!from && !to) continue;
        const auto src = from ? m : e.source;
        const auto dst = to ? m : e.target;
        if (!parent.nodes[idx.at(from ? e.target : e.source)].enabled && !(from && to)) continue;
        auto& slot = rec[{src, dst, e.time_skip}];
        slot.first += e.weight;
        slot.second += 1;
    }
    for (const auto& [k, v] : ff) push_edge(child, ctx, k.first, k.second, v.first / v.second);
    for (const auto& [k, v] : rec) {
        push_recurrent(child, ctx, std::get<0>(k), std::get<1>(k), std::get<2>(k), v.first / v.second);
    }
    for (auto i : pair) child.nodes[i].enabled = false;
    for (auto& e : child.edges) {
        if (merged_end(e.source) || merged_end(e.target)) e.enabled = false;
    }
    for (auto& e : child.recurrent_edges) {
        if (merged_end(e.source) || merged_end(e.target)) e.enabled = false;
    }
    return finish(std::move(child), ctx);
}

OpResult clone(const RnnGenome& parent, EvolutionContext& ctx) { return finish(fresh_child(parent), ctx); }

OpResult apply_mutation(MutationOp op, const RnnGenome& parent, EvolutionContext& ctx) {
    switch (op) {
        case MutationOp::disable_edge: return disable_edge(parent, ctx);
        case MutationOp::enable_edge: return enable_edge(parent, ctx);
        case MutationOp::split_edge: return split_edge(parent, ctx);
        case MutationOp::add_edge: return add_edge(parent, ctx);
        case MutationOp::add_recurrent_edge: return add_recurrent_edge(parent, ctx);
        case MutationOp::enable_node: return enable_node(parent, ctx);
        case MutationOp::disable_node: return disable_node(parent, ctx);
        case MutationOp::add_node: return add_node(parent, ctx);
        case MutationOp::split_node: return split_node(parent, ctx);
        case MutationOp::merge_node: return merge_node(parent, ctx);
        case MutationOp::clone: return clone(parent, ctx);
    }
    return OpResult::not_applicable();
}

OpResult crossover(const RnnGenome& fit, const RnnGenome& less_fit, EvolutionContext& ctx) {
    std::size_t local_visits = 0;
    std::size_t& visits = ctx.crossover_visits ? *ctx.crossover_visits : local_visits;
    const auto fit_reach = reachability(fit, &visits);
    const auto less_reach = reachability(less_fit, &visits);
    const double r_lo = ctx.config.crossover_r_min, r_hi = ctx.config.crossover_r_max;
    auto draw_r = [&] { return r_lo + (r_hi - r_lo) * unit(ctx.rng); };
    auto blend = [](double w1, double w2, double r) { return r * (w2 - w1) + w1; };

    auto index_of = [&](const auto& genes, auto id_of) {
        std::unordered_map<InnovationId, std::size_t> m;
        m.reserve(genes.size());
        for (std::size_t i = 0; i < genes.size(); ++i) {
            m.emplace(id_of(genes[i]), i);
            ++visits;
        }
        return m;
    };
    const auto node_id = [](const NodeGene& n) { return n.innovation_id; };
    const auto edge_id = [](const auto& e) { return e.innovation_id; };
    const auto fit_nodes = index_of(fit.nodes, node_id);
    const auto less_nodes = index_of(less_fit.nodes, node_id);
    const auto fit_edges = index_of(fit.edges, edge_id);
    const auto less_edges = index_of(less_fit.edges, edge_id);
    const auto fit_rec = index_of(fit.recurrent_edges, edge_id);
    const auto less_rec = index_of(less_fit.recurrent_edges, edge_id);

    RnnGenome child;
    std::unordered_map<InnovationId, std::size_t> have_nodes;
    std::unordered_set<InnovationId> have_edges, have_rec;

    auto take_node = [&](const NodeGene& n, bool reachable, const std::unordered_map<InnovationId, std::size_t>& other,
                         const RnnGenome& other_genome, bool from_fit) {
        ++visits;
        if (!reachable && n.kind == NodeKind::hidden) return;
        const auto [pos, inserted] = have_nodes.emplace(n.innovation_id, child.nodes.size());
        if (!inserted) {
            if (reachable) child.nodes[pos->second].enabled = true;
            return;
        }
        NodeGene c = n;
        if (reachable) c.enabled = true;
        const auto it = other.find(n.innovation_id);
        if (it != other.end()) {
            const auto& o = other_genome.nodes[it->second];
            if (o.cell_type == n.cell_type) {
                const double r = draw_r();
                const auto& w1 = from_fit ? n.params : o.params;
                const auto& w2 = from_fit ? o.params : n.params;
                for (std::size_t k = 0; k < c.params.size(); ++k) c.params[k] = blend(w1[k], w2[k], r);
            }
        }
        child.nodes.push_back(c);
    };
    for (std::size_t i = 0; i < fit.nodes.size(); ++i) take_node(fit.nodes[i], fit_reach.nodes[i], less_nodes, less_fit, true);
    for (std::size_t i = 0; i < less_fit.nodes.size(); ++i) {
        take_node(less_fit.nodes[i], less_reach.nodes[i], fit_nodes, fit, false);
    }

    auto take_edges = [&](const auto& genes, const std::vector<bool>& reach, const auto& other_map, const auto& other_genes,
                          bool from_fit, auto& out, std::unordered_set<InnovationId>& have) {
        for (std::size_t i = 0; i < genes.size(); ++i) {
            ++visits;
            if (!reach[i]) continue;
            auto e = genes[i];
            if (!have.insert(e.innovation_id).second) continue;
            e.enabled = true;
            const auto it = other_map.find(e.innovation_id);
            if (it != other_map.end()) {
                const double r = draw_r();
                const double w_other = other_genes[it->second].weight;
                e.weight = from_fit ? blend(e.weight, w_other, r) : blend(w_other, e.weight, r);
            }
            out.push_back(e);
        }
    };
    take_edges(fit.edges, fit_reach.edges, less_edges, less_fit.edges, true, child.edges, have_edges);
    take_edges(less_fit.edges, less_reach.edges, fit_edges, fit.edges, false, child.edges, have_edges);
    take_edges(fit.recurrent_edges, fit_reach.recurrent_edges, less_rec, less_fit.recurrent_edges, true,
               child.recurrent_edges, have_rec);
    take_edges(less_fit.recurrent_edges, less_reach.recurrent_edges, fit_rec, fit.recurrent_edges, false,
               child.recurrent_edges, have_rec);
    return finish(std::move(child), ctx);
}

bool fitter(const RnnGenome& a, const RnnGenome& b) {
    const double fa = a.fitness.value_or(std::numeric_limits<double>::infinity());
    const double fb = b.fitness.value_or(std::numeric_limits<double>::infinity());
    if (a.fitness.has_value() != b.fitness.has_value()) return a.fitness.has_value();
    if (fa != fb) return fa < fb;
    return a.generation_id < b.generation_id;
}

namespace {

MutationOp draw_op(const OperatorConfig& cfg, Rng& rng) {
    std::discrete_distribution<std::size_t> d(cfg.mutation_weights.begin(), cfg.mutation_weights.end());
    return static_cast<MutationOp>(d(rng));
}

}  // namespace

GenerationOutcome generate_child(std::span<const std::vector<RnnGenome>> islands, std::size_t target,
                                 EvolutionContext& ctx) {
    const auto& cfg = ctx.config;
    if (target >= islands.size()) throw std::out_of_range("target island out of range");
    const auto& members = islands[target];
    if (members.empty()) throw std::invalid_argument("generate_child needs a non-empty target island");

    const RnnGenome* best_other = nullptr;
    for (std::size_t i = 0; i < islands.size(); ++i) {
        if (i == target) continue;
        for (const auto& g : islands[i]) {
            if (best_other == nullptr || fitter(g, *best_other)) best_other = &g;
        }
    }

    GenerationOutcome out;
    const double u = unit(ctx.rng);
    if (u < cfg.p_intra_crossover) {
        out.type = GenerationType::intra_crossover;
    } else if (u < cfg.p_intra_crossover + cfg.p_mutation) {
        out.type = GenerationType::mutation;
    } else {
        out.type = GenerationType::inter_crossover;
    }
    if (out.type == GenerationType::intra_crossover && members.size() < 2) out.type = GenerationType::mutation;
    if (out.type == GenerationType::inter_crossover && best_other == nullptr) out.type = GenerationType::mutation;

    std::optional<MutationOp> op;
    for (out.attempts = 1; out.attempts <= cfg.max_retries; ++out.attempts) {
        OpResult r;
        switch (out.type) {
            case GenerationType::mutation: {
                if (!op) op = draw_op(cfg, ctx.rng);
                r = apply_mutation(*op, members[pick(members.size(), ctx.rng)], ctx);
                break;
            }
            case GenerationType::intra_crossover: {
                const auto two = sample_without_replacement(
                    [&] {
                        std::vector<std::size_t> v(members.size());
                        std::iota(v.begin(), v.end(), 0);
                        return v;
                    }(),
                    2, ctx.rng);
                const auto& p = members[two[0]];
                const auto& q = members[two[1]];
                r = fitter(q, p) ? crossover(q, p, ctx) : crossover(p, q, ctx);
                break;
            }
            case GenerationType::inter_crossover: {
                const auto& p = members[pick(members.size(), ctx.rng)];
                r = fitter(*best_other, p) ? crossover(*best_other, p, ctx) : crossover(p, *best_other, ctx);
                break;
            }
        }
        if (r.status == OpStatus::ok) {
            out.child = std::move(r.child);
            out.op = op;
            return out;
        }
        if (r.status == OpStatus::not_applicable) op.reset();
    }
    out.attempts = cfg.max_retries;
    out.op = op;
    return out;
}

std::optional<RnnGenome> mutate_once(const RnnGenome& parent, EvolutionContext& ctx) {
    auto weights = ctx.config.mutation_weights;
    weights[static_cast<std::size_t>(MutationOp::clone)] = 0.0;
    if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) return std::nullopt;
    std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
    std::optional<MutationOp> op;
    for (int attempt = 0; attempt < ctx.config.max_retries; ++attempt) {
        if (!op) op = static_cast<MutationOp>(d(ctx.rng));
        auto r = apply_mutation(*op, parent, ctx);
        if (r.status == OpStatus::ok) return std::move(r.child);
        if (r.status == OpStatus::not_applicable) op.reset();
    }
    return std::nullopt;
}

}  // namespace rnnevo
