#include "rnnevo/genome.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace rnnevo {

std::string_view to_string(CellType type) {
    switch (type) {
        case CellType::simple: return "simple";
        case CellType::delta_rnn: return "delta_rnn";
        case CellType::gru: return "gru";
        case CellType::lstm: return "lstm";
        case CellType::mgu: return "mgu";
        case CellType::ugrnn: return "ugrnn";
    }
    return "unknown";
}

std::optional<CellType> parse_cell_type(std::string_view name) {
    for (CellType t : kAllCellTypes) {
        if (to_string(t) == name) return t;
    }
    if (name == "delta" || name == "delta-rnn") return CellType::delta_rnn;
    return std::nullopt;
}

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::input: return "input";
        case NodeKind::output: return "output";
        case NodeKind::hidden: return "hidden";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// RnnGenome

const NodeGene* RnnGenome::find_node(InnovationId id) const {
    for (const auto& n : nodes) {
        if (n.innovation_id == id) return &n;
    }
    return nullptr;
}

NodeGene* RnnGenome::find_node(InnovationId id) {
    for (auto& n : nodes) {
        if (n.innovation_id == id) return &n;
    }
    return nullptr;
}

std::size_t RnnGenome::input_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes.begin(), nodes.end(), [](const NodeGene& n) { return n.kind == NodeKind::input; }));
}

std::size_t RnnGenome::output_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes.begin(), nodes.end(), [](const NodeGene& n) { return n.kind == NodeKind::output; }));
}

std::size_t RnnGenome::hidden_node_count(bool enabled_only) const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [&](const NodeGene& n) {
        return n.kind == NodeKind::hidden && (!enabled_only || n.enabled);
    }));
}

std::size_t RnnGenome::enabled_edge_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [](const EdgeGene& e) { return e.enabled; }));
}

std::size_t RnnGenome::enabled_recurrent_edge_count() const {
    return static_cast<std::size_t>(std::count_if(
        recurrent_edges.begin(), recurrent_edges.end(),
        [](const RecurrentEdgeGene& e) { return e.enabled; }));
}

std::size_t RnnGenome::cell_type_count(CellType type, bool enabled_only) const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [&](const NodeGene& n) {
        return n.kind == NodeKind::hidden && n.cell_type == type && (!enabled_only || n.enabled);
    }));
}

bool RnnGenome::has_edge(InnovationId source, InnovationId target) const {
    return std::any_of(edges.begin(), edges.end(), [&](const EdgeGene& e) {
        return e.source == source && e.target == target;
    });
}

bool RnnGenome::has_recurrent_edge(InnovationId source, InnovationId target, int skip) const {
    return std::any_of(recurrent_edges.begin(), recurrent_edges.end(), [&](const RecurrentEdgeGene& e) {
        return e.source == source && e.target == target && e.time_skip == skip;
    });
}

std::vector<double> RnnGenome::all_weights() const {
    std::vector<double> out;
    for (const auto& e : edges) out.push_back(e.weight);
    for (const auto& e : recurrent_edges) out.push_back(e.weight);
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::input) continue;
        auto v = n.params.values();
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// InnovationRegistry

InnovationId InnovationRegistry::input_node(int index) {
    auto [it, inserted] = io_nodes_.try_emplace({NodeKind::input, index}, next_node_);
    if (inserted) ++next_node_;
    return it->second;
}

InnovationId InnovationRegistry::output_node(int index) {
    auto [it, inserted] = io_nodes_.try_emplace({NodeKind::output, index}, next_node_);
    if (inserted) ++next_node_;
    return it->second;
}

InnovationId InnovationRegistry::new_hidden_node() { return next_node_++; }

InnovationId InnovationRegistry::edge(InnovationId source, InnovationId target) {
    auto [it, inserted] = edges_.try_emplace({source, target}, next_edge_);
    if (inserted) ++next_edge_;
    return it->second;
}

InnovationId InnovationRegistry::recurrent_edge(InnovationId source, InnovationId target, int time_skip) {
    auto [it, inserted] = recurrent_edges_.try_emplace({source, target, time_skip}, next_recurrent_);
    if (inserted) ++next_recurrent_;
    return it->second;
}

void InnovationRegistry::absorb(const RnnGenome& genome) {
    for (const auto& n : genome.nodes) {
        if (n.kind != NodeKind::hidden) io_nodes_.try_emplace({n.kind, n.io_index}, n.innovation_id);
        next_node_ = std::max(next_node_, n.innovation_id + 1);
    }
    for (const auto& e : genome.edges) {
        edges_.try_emplace({e.source, e.target}, e.innovation_id);
        next_edge_ = std::max(next_edge_, e.innovation_id + 1);
    }
    for (const auto& e : genome.recurrent_edges) {
        recurrent_edges_.try_emplace({e.source, e.target, e.time_skip}, e.innovation_id);
        next_recurrent_ = std::max(next_recurrent_, e.innovation_id + 1);
    }
}

// ---------------------------------------------------------------------------
// Reachability

ReachabilityFlags reachability(const RnnGenome& genome, std::size_t* visits) {
    const std::size_t n_nodes = genome.nodes.size();
    ReachabilityFlags flags{std::vector<bool>(n_nodes, false),
                            std::vector<bool>(genome.edges.size(), false),
                            std::vector<bool>(genome.recurrent_edges.size(), false)};

    std::unordered_map<InnovationId, std::size_t> index;
    index.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) index.emplace(genome.nodes[i].innovation_id, i);

    // Adjacency over enabled connections, as (neighbor index) lists.
    std::vector<std::vector<std::size_t>> out_adj(n_nodes), in_adj(n_nodes);
    auto link = [&](InnovationId s, InnovationId t, bool enabled) {
        if (visits) ++*visits;
        if (!enabled) return;
        auto si = index.find(s);
        auto ti = index.find(t);
        if (si == index.end() || ti == index.end()) return;
        if (!genome.nodes[si->second].enabled || !genome.nodes[ti->second].enabled) return;
        out_adj[si->second].push_back(ti->second);
        in_adj[ti->second].push_back(si->second);
    };
    for (const auto& e : genome.edges) link(e.source, e.target, e.enabled);
    for (const auto& e : genome.recurrent_edges) link(e.source, e.target, e.enabled);

    auto sweep = [&](NodeKind start_kind, const std::vector<std::vector<std::size_t>>& adj) {
        std::vector<bool> seen(n_nodes, false);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const auto& n = genome.nodes[i];
            if (n.kind == start_kind && n.enabled) {
                seen[i] = true;
                stack.push_back(i);
            }
        }
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            if (visits) ++*visits;
            for (std::size_t nb : adj[cur]) {
                if (!seen[nb]) {
                    seen[nb] = true;
                    stack.push_back(nb);
                }
            }
        }
        return seen;
    };
    const auto forward = sweep(NodeKind::input, out_adj);
    const auto backward = sweep(NodeKind::output, in_adj);

    for (std::size_t i = 0; i < n_nodes; ++i) flags.nodes[i] = forward[i] && backward[i];

    auto edge_reachable = [&](InnovationId s, InnovationId t, bool enabled) {
        if (visits) ++*visits;
        if (!enabled) return false;
        auto si = index.find(s);
        auto ti = index.find(t);
        if (si == index.end() || ti == index.end()) return false;
        return forward[si->second] && backward[ti->second] && genome.nodes[ti->second].enabled;
    };
    for (std::size_t i = 0; i < genome.edges.size(); ++i) {
        const auto& e = genome.edges[i];
        flags.edges[i] = edge_reachable(e.source, e.target, e.enabled);
    }
    for (std::size_t i = 0; i < genome.recurrent_edges.size(); ++i) {
        const auto& e = genome.recurrent_edges[i];
        flags.recurrent_edges[i] = edge_reachable(e.source, e.target, e.enabled);
    }
    return flags;
}

ReachableSet reachable_set(const RnnGenome& genome) {
    const auto flags = reachability(genome);
    ReachableSet out;
    for (std::size_t i = 0; i < genome.nodes.size(); ++i) {
        if (flags.nodes[i]) out.nodes.insert(genome.nodes[i].innovation_id);
    }
    for (std::size_t i = 0; i < genome.edges.size(); ++i) {
        if (flags.edges[i]) out.edges.insert(genome.edges[i].innovation_id);
    }
    for (std::size_t i = 0; i < genome.recurrent_edges.size(); ++i) {
        if (flags.recurrent_edges[i]) out.recurrent_edges.insert(genome.recurrent_edges[i].innovation_id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::duplicate_node_id: return "duplicate_node_id";
        case ViolationKind::duplicate_edge_id: return "duplicate_edge_id";
        case ViolationKind::duplicate_recurrent_edge_id: return "duplicate_recurrent_edge_id";
        case ViolationKind::missing_endpoint: return "missing_endpoint";
        case ViolationKind::bad_node_depth: return "bad_node_depth";
        case ViolationKind::bad_io_cell_type: return "bad_io_cell_type";
        case ViolationKind::depth_order: return "depth_order";
        case ViolationKind::duplicate_edge_pair: return "duplicate_edge_pair";
        case ViolationKind::duplicate_recurrent_triple: return "duplicate_recurrent_triple";
        case ViolationKind::bad_time_skip: return "bad_time_skip";
        case ViolationKind::recurrent_into_input: return "recurrent_into_input";
        case ViolationKind::non_finite_value: return "non_finite_value";
        case ViolationKind::unreachable_output: return "unreachable_output";
    }
    return "unknown";
}

std::vector<Violation> validate(const RnnGenome& genome, int max_skip) {
    std::vector<Violation> out;
    auto report = [&](ViolationKind kind, auto&&... parts) {
        std::ostringstream os;
        (os << ... << parts);
        out.push_back({kind, os.str()});
    };

    std::unordered_map<InnovationId, const NodeGene*> by_id;
    for (const auto& n : genome.nodes) {
        if (!by_id.emplace(n.innovation_id, &n).second) {
            report(ViolationKind::duplicate_node_id, "node ", n.innovation_id);
        }
        switch (n.kind) {
            case NodeKind::input:
                if (n.depth != 0.0) report(ViolationKind::bad_node_depth, "input ", n.innovation_id, " depth ", n.depth);
                break;
            case NodeKind::output:
                if (n.depth != 1.0) report(ViolationKind::bad_node_depth, "output ", n.innovation_id, " depth ", n.depth);
                break;
            case NodeKind::hidden:
                if (!(n.depth > 0.0 && n.depth < 1.0)) {
                    report(ViolationKind::bad_node_depth, "hidden ", n.innovation_id, " depth ", n.depth);
                }
                break;
        }
        if (n.kind != NodeKind::hidden && n.cell_type != CellType::simple) {
            report(ViolationKind::bad_io_cell_type, "node ", n.innovation_id);
        }
        if (n.params.type() != n.cell_type) {
            report(ViolationKind::bad_io_cell_type, "node ", n.innovation_id, " parameter block mismatch");
        }
        for (double v : n.params.values()) {
            if (!std::isfinite(v)) report(ViolationKind::non_finite_value, "node ", n.innovation_id);
        }
    }

    std::unordered_set<InnovationId> edge_ids;
    std::set<std::pair<InnovationId, InnovationId>> pairs;
    for (const auto& e : genome.edges) {
        if (!edge_ids.insert(e.innovation_id).second) report(ViolationKind::duplicate_edge_id, "edge ", e.innovation_id);
        if (!pairs.emplace(e.source, e.target).second) {
            report(ViolationKind::duplicate_edge_pair, "edge ", e.source, "->", e.target);
        }
        if (!std::isfinite(e.weight)) report(ViolationKind::non_finite_value, "edge ", e.innovation_id);
        auto s = by_id.find(e.source);
        auto t = by_id.find(e.target);
        if (s == by_id.end() || t == by_id.end()) {
            report(ViolationKind::missing_endpoint, "edge ", e.innovation_id);
            continue;
        }
        if (!(s->second->depth < t->second->depth)) {
            report(ViolationKind::depth_order, "edge ", e.innovation_id, " ", s->second->depth, " -> ", t->second->depth);
        }
    }

    std::unordered_set<InnovationId> rec_ids;
    std::set<std::tuple<InnovationId, InnovationId, int>> triples;
    for (const auto& e : genome.recurrent_edges) {
        if (!rec_ids.insert(e.innovation_id).second) {
            report(ViolationKind::duplicate_recurrent_edge_id, "recurrent edge ", e.innovation_id);
        }
        if (!triples.emplace(e.source, e.target, e.time_skip).second) {
            report(ViolationKind::duplicate_recurrent_triple, "recurrent ", e.source, "->", e.target, " skip ", e.time_skip);
        }
        if (e.time_skip < 1 || e.time_skip > max_skip) {
            report(ViolationKind::bad_time_skip, "recurrent edge ", e.innovation_id, " skip ", e.time_skip);
        }
        if (!std::isfinite(e.weight)) report(ViolationKind::non_finite_value, "recurrent edge ", e.innovation_id);
        auto s = by_id.find(e.source);
        auto t = by_id.find(e.target);
        if (s == by_id.end() || t == by_id.end()) {
            report(ViolationKind::missing_endpoint, "recurrent edge ", e.innovation_id);
            continue;
        }
        if (t->second->kind == NodeKind::input) {
            report(ViolationKind::recurrent_into_input, "recurrent edge ", e.innovation_id);
        }
    }

    const auto flags = reachability(genome);
    for (std::size_t i = 0; i < genome.nodes.size(); ++i) {
        const auto& n = genome.nodes[i];
        if (n.kind == NodeKind::output && n.enabled && !flags.nodes[i]) {
            report(ViolationKind::unreachable_output, "output ", n.innovation_id);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Seeding

RnnGenome seed_genome(int n_inputs, int n_outputs, InnovationRegistry& registry, Rng& rng) {
    if (n_inputs < 1 || n_outputs < 1) {
        throw std::invalid_argument("seed_genome needs at least one input and one output");
    }
    std::uniform_real_distribution<double> uniform(-0.5, 0.5);
    RnnGenome g;
    for (int i = 0; i < n_inputs; ++i) {
        NodeGene n;
        n.innovation_id = registry.input_node(i);
        n.kind = NodeKind::input;
        n.depth = 0.0;
        n.io_index = i;
        g.nodes.push_back(n);
    }
    for (int o = 0; o < n_outputs; ++o) {
        NodeGene n;
        n.innovation_id = registry.output_node(o);
        n.kind = NodeKind::output;
        n.depth = 1.0;
        n.io_index = o;
        n.params[simple::bias] = uniform(rng);
        g.nodes.push_back(n);
    }
    for (int i = 0; i < n_inputs; ++i) {
        for (int o = 0; o < n_outputs; ++o) {
            EdgeGene e;
            e.source = g.nodes[static_cast<std::size_t>(i)].innovation_id;
            e.target = g.nodes[static_cast<std::size_t>(n_inputs + o)].innovation_id;
            e.innovation_id = registry.edge(e.source, e.target);
            e.weight = uniform(rng);
            g.edges.push_back(e);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Serialization

DecodeError::DecodeError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

namespace {

class Writer {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
    }
    void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* what) {
        if (pos_ + sizeof(T) > bytes_.size()) throw DecodeError(std::string("truncated stream reading ") + what, pos_);
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        T value;
        std::memcpy(&value, raw, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

constexpr std::string_view kMagic = "RNNG";

}  // namespace

std::vector<std::uint8_t> serialize(const RnnGenome& genome) {
    Writer w;
    w.put_bytes(kMagic);
    w.put<std::uint32_t>(kGenomeFormatVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(genome.nodes.size()));
    for (const auto& n : genome.nodes) {
        w.put<std::int64_t>(n.innovation_id);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(n.kind));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(n.cell_type));
        w.put<double>(n.depth);
        w.put<std::uint8_t>(n.enabled ? 1 : 0);
        w.put<std::int32_t>(n.io_index);
        w.put<std::uint8_t>(n.forget_bias_pending ? 1 : 0);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(n.params.size()));
        for (double v : n.params.values()) w.put<double>(v);
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(genome.edges.size()));
    for (const auto& e : genome.edges) {
        w.put<std::int64_t>(e.innovation_id);
        w.put<std::int64_t>(e.source);
        w.put<std::int64_t>(e.target);
        w.put<double>(e.weight);
        w.put<std::uint8_t>(e.enabled ? 1 : 0);
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(genome.recurrent_edges.size()));
    for (const auto& e : genome.recurrent_edges) {
        w.put<std::int64_t>(e.innovation_id);
        w.put<std::int64_t>(e.source);
        w.put<std::int64_t>(e.target);
        w.put<std::int32_t>(e.time_skip);
        w.put<double>(e.weight);
        w.put<std::uint8_t>(e.enabled ? 1 : 0);
    }
    w.put<std::uint8_t>(genome.fitness.has_value() ? 1 : 0);
    w.put<double>(genome.fitness.value_or(0.0));
    w.put<std::int64_t>(genome.generation_id);
    w.put<std::int32_t>(genome.island_of_origin);
    return w.take();
}

RnnGenome deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    for (char c : kMagic) {
        if (r.get<std::uint8_t>("magic") != static_cast<std::uint8_t>(c)) throw DecodeError("bad magic", r.pos() - 1);
    }
    const auto version = r.get<std::uint32_t>("version");
    if (version != kGenomeFormatVersion) throw DecodeError("unsupported version " + std::to_string(version), r.pos() - 4);

    auto get_bool = [&](const char* what) {
        const auto v = r.get<std::uint8_t>(what);
        if (v > 1) throw DecodeError(std::string("invalid flag for ") + what, r.pos() - 1);
        return v == 1;
    };

    RnnGenome g;
    const auto n_nodes = r.get<std::uint32_t>("node count");
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
        NodeGene n;
        n.innovation_id = r.get<std::int64_t>("node id");
        const auto kind = r.get<std::uint8_t>("node kind");
        if (kind > 2) throw DecodeError("invalid node kind", r.pos() - 1);
        n.kind = static_cast<NodeKind>(kind);
        const auto cell = r.get<std::uint8_t>("cell type");
        if (cell >= kAllCellTypes.size()) throw DecodeError("invalid cell type", r.pos() - 1);
        n.cell_type = static_cast<CellType>(cell);
        n.depth = r.get<double>("depth");
        n.enabled = get_bool("node enabled");
        n.io_index = r.get<std::int32_t>("io index");
        n.forget_bias_pending = get_bool("bias pending");
        n.params = CellParams(n.cell_type);
        const auto count = r.get<std::uint8_t>("parameter count");
        if (count != n.params.size()) throw DecodeError("parameter count does not match cell type", r.pos() - 1);
        for (std::size_t k = 0; k < count; ++k) n.params[k] = r.get<double>("parameter");
        g.nodes.push_back(n);
    }
    const auto n_edges = r.get<std::uint32_t>("edge count");
    for (std::uint32_t i = 0; i < n_edges; ++i) {
        EdgeGene e;
        e.innovation_id = r.get<std::int64_t>("edge id");
        e.source = r.get<std::int64_t>("edge source");
        e.target = r.get<std::int64_t>("edge target");
        e.weight = r.get<double>("edge weight");
        e.enabled = get_bool("edge enabled");
        g.edges.push_back(e);
    }
    const auto n_rec = r.get<std::uint32_t>("recurrent edge count");
    for (std::uint32_t i = 0; i < n_rec; ++i) {
        RecurrentEdgeGene e;
        e.innovation_id = r.get<std::int64_t>("recurrent edge id");
        e.source = r.get<std::int64_t>("recurrent edge source");
        e.target = r.get<std::int64_t>("recurrent edge target");
        e.time_skip = r.get<std::int32_t>("time skip");
        e.weight = r.get<double>("recurrent edge weight");
        e.enabled = get_bool("recurrent edge enabled");
        g.recurrent_edges.push_back(e);
    }
    const bool has_fitness = get_bool("fitness flag");
    const double fitness = r.get<double>("fitness");
    if (has_fitness) g.fitness = fitness;
    g.generation_id = r.get<std::int64_t>("generation id");
    g.island_of_origin = r.get<std::int32_t>("island");
    if (!r.done()) throw DecodeError("trailing bytes", r.pos());
    return g;
}

void save_genome(const RnnGenome& genome, const std::string& path) {
    const auto bytes = serialize(genome);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

RnnGenome load_genome(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::string dump(const RnnGenome& genome) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "genome generation=" << genome.generation_id << " island=" << genome.island_of_origin << " fitness=";
    if (genome.fitness) {
        os << *genome.fitness;
    } else {
        os << "unevaluated";
    }
    os << '\n';
    for (const auto& n : genome.nodes) {
        os << "node " << n.innovation_id << ' ' << to_string(n.kind) << ' ' << to_string(n.cell_type)
           << " depth=" << n.depth << (n.enabled ? " enabled" : " disabled");
        if (n.io_index >= 0) os << " slot=" << n.io_index;
        os << " params=[";
        for (std::size_t k = 0; k < n.params.size(); ++k) os << (k ? "," : "") << n.params[k];
        os << "]\n";
    }
    for (const auto& e : genome.edges) {
        os << "edge " << e.innovation_id << ' ' << e.source << "->" << e.target << " w=" << e.weight
           << (e.enabled ? " enabled" : " disabled") << '\n';
    }
    for (const auto& e : genome.recurrent_edges) {
        os << "recurrent " << e.innovation_id << ' ' << e.source << "->" << e.target << " skip=" << e.time_skip
           << " w=" << e.weight << (e.enabled ? " enabled" : " disabled") << '\n';
    }
    return os.str();
}

}  // namespace rnnevo
