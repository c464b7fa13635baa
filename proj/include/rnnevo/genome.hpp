#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "rnnevo/cell_params.hpp"

namespace rnnevo {

using Rng = std::mt19937_64;
using InnovationId = std::int64_t;

inline constexpr int kDefaultMaxSkip = 10;

enum class NodeKind : std::uint8_t { input, output, hidden };

std::string_view to_string(NodeKind kind);

struct NodeGene {
    InnovationId innovation_id = -1;
    NodeKind kind = NodeKind::hidden;
    CellType cell_type = CellType::simple;
    double depth = 0.5;
    bool enabled = true;
    // Column (input) or target (output) slot; -1 for hidden nodes.
    int io_index = -1;
    // Set on LSTM nodes created by a mutation; the trainer applies the forget
    // gate bias offset once and clears it.
    bool forget_bias_pending = false;
    CellParams params;

    bool operator==(const NodeGene&) const = default;
};

struct EdgeGene {
    InnovationId innovation_id = -1;
    InnovationId source = -1;
    InnovationId target = -1;
    double weight = 0.0;
    bool enabled = true;

    bool operator==(const EdgeGene&) const = default;
};

struct RecurrentEdgeGene {
    InnovationId innovation_id = -1;
    InnovationId source = -1;
    InnovationId target = -1;
    int time_skip = 1;
    double weight = 0.0;
    bool enabled = true;

    bool operator==(const RecurrentEdgeGene&) const = default;
};

struct RnnGenome {
    std::vector<NodeGene> nodes;
    std::vector<EdgeGene> edges;
    std::vector<RecurrentEdgeGene> recurrent_edges;
    // Validation MSE; empty until the genome has been trained.
    std::optional<double> fitness;
    std::int64_t generation_id = -1;
    int island_of_origin = -1;

    bool operator==(const RnnGenome&) const = default;

    const NodeGene* find_node(InnovationId id) const;
    NodeGene* find_node(InnovationId id);

    std::size_t input_count() const;
    std::size_t output_count() const;
    std::size_t hidden_node_count(bool enabled_only = true) const;
    std::size_t enabled_edge_count() const;
    std::size_t enabled_recurrent_edge_count() const;
    std::size_t cell_type_count(CellType type, bool enabled_only = true) const;

    bool has_edge(InnovationId source, InnovationId target) const;
    bool has_recurrent_edge(InnovationId source, InnovationId target, int skip) const;

    /// Every trainable scalar: edge weights, recurrent edge weights and the
    /// parameter blocks of non-input nodes.
    std::vector<double> all_weights() const;
};

/// Issues innovation numbers for one run. Input and output nodes are keyed
/// by slot so every seed genome shares them; hidden nodes are always fresh;
/// edges are keyed by their endpoints (and skip for recurrent edges) so that
/// identical structural additions in different genomes align in crossover.
class InnovationRegistry {
public:
    InnovationId input_node(int index);
    InnovationId output_node(int index);
    InnovationId new_hidden_node();
    InnovationId edge(InnovationId source, InnovationId target);
    InnovationId recurrent_edge(InnovationId source, InnovationId target, int time_skip);

    /// Records every id and signature of an externally created genome so later
    /// events neither collide with nor duplicate them.
    void absorb(const RnnGenome& genome);

    InnovationId next_node_id() const { return next_node_; }
    InnovationId next_edge_id() const { return next_edge_; }
    InnovationId next_recurrent_edge_id() const { return next_recurrent_; }

private:
    InnovationId next_node_ = 0;
    InnovationId next_edge_ = 0;
    InnovationId next_recurrent_ = 0;
    std::map<std::pair<NodeKind, int>, InnovationId> io_nodes_;
    std::map<std::pair<InnovationId, InnovationId>, InnovationId> edges_;
    std::map<std::tuple<InnovationId, InnovationId, int>, InnovationId> recurrent_edges_;
};

struct ReachableSet {
    std::set<InnovationId> nodes;
    std::set<InnovationId> edges;
    std::set<InnovationId> recurrent_edges;

    bool operator==(const ReachableSet&) const = default;
};

/// Per-position reachability flags aligned with the genome's gene vectors.
struct ReachabilityFlags {
    std::vector<bool> nodes;
    std::vector<bool> edges;
    std::vector<bool> recurrent_edges;
};

/// An element is reachable when it lies on a path of enabled nodes and edges
/// from an enabled input to an enabled output. Recurrent edges count as
/// connectivity. Runs in O(nodes + edges); `visits` (if given) is incremented
/// once per element touched.
ReachabilityFlags reachability(const RnnGenome& genome, std::size_t* visits = nullptr);
ReachableSet reachable_set(const RnnGenome& genome);

enum class ViolationKind {
    duplicate_node_id,
    duplicate_edge_id,
    duplicate_recurrent_edge_id,
    missing_endpoint,
    bad_node_depth,
    bad_io_cell_type,
    depth_order,
    duplicate_edge_pair,
    duplicate_recurrent_triple,
    bad_time_skip,
    recurrent_into_input,
    non_finite_value,
    unreachable_output,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string detail;
};

std::vector<Violation> validate(const RnnGenome& genome, int max_skip = kDefaultMaxSkip);
inline bool is_valid(const RnnGenome& genome, int max_skip = kDefaultMaxSkip) {
    return validate(genome, max_skip).empty();
}

/// Inputs fully connected to outputs, no hidden nodes; weights and output
/// biases uniform in [-0.5, 0.5].
RnnGenome seed_genome(int n_inputs, int n_outputs, InnovationRegistry& registry, Rng& rng);

class DecodeError : public std::runtime_error {
public:
    DecodeError(const std::string& what, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Binary genome format, version 1 (all integers and doubles little-endian):
///   "RNNG" u32 version
///   u32 node count,  per node: i64 id, u8 kind, u8 cell, f64 depth, u8 enabled,
///                             i32 io_index, u8 bias_pending, u8 n, f64[n] params
///   u32 edge count,  per edge: i64 id, i64 src, i64 dst, f64 weight, u8 enabled
///   u32 rec count,   per edge: i64 id, i64 src, i64 dst, i32 skip, f64 weight, u8 enabled
///   u8 has_fitness, f64 fitness, i64 generation_id, i32 island
inline constexpr std::uint32_t kGenomeFormatVersion = 1;

std::vector<std::uint8_t> serialize(const RnnGenome& genome);
RnnGenome deserialize(std::span<const std::uint8_t> bytes);

void save_genome(const RnnGenome& genome, const std::string& path);
RnnGenome load_genome(const std::string& path);

/// One node or edge per line, for debugging.
std::string dump(const RnnGenome& genome);

}  // namespace rnnevo
