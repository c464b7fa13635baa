#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rnnevo/genome.hpp"

namespace rnnevo {

enum class MutationOp : std::size_t {
    disable_edge,
    enable_edge,
    split_edge,
    add_edge,
    add_recurrent_edge,
    enable_node,
    disable_node,
    add_node,
    split_node,
    merge_node,
    clone,
};

inline constexpr std::size_t kMutationOpCount = 11;
std::string_view to_string(MutationOp op);
std::optional<MutationOp> parse_mutation_op(std::string_view name);

enum class GenerationType : std::size_t { intra_crossover, mutation, inter_crossover };
std::string_view to_string(GenerationType type);

struct OperatorConfig {
    // Split edge is off by default; the other ten (clone included) share 10%.
    std::array<double, kMutationOpCount> mutation_weights{0.1, 0.1, 0.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    double p_intra_crossover = 0.2;
    double p_mutation = 0.7;
    double p_inter_crossover = 0.1;
    std::vector<CellType> allowed_cell_types{kAllCellTypes.begin(), kAllCellTypes.end()};
    int max_skip = kDefaultMaxSkip;
    double crossover_r_min = -0.5;
    double crossover_r_max = 1.5;
    int max_retries = 32;

    double& weight(MutationOp op) { return mutation_weights[static_cast<std::size_t>(op)]; }
    double weight(MutationOp op) const { return mutation_weights[static_cast<std::size_t>(op)]; }

    /// Throws std::invalid_argument when an invariant does not hold.
    void check() const;
};

/// Everything an operator may touch besides its parents. The registry is
/// only ever used from the master.
struct EvolutionContext {
    InnovationRegistry& registry;
    Rng& rng;
    const OperatorConfig& config;
    std::size_t* crossover_visits = nullptr;  // optional instrumentation
};

enum class OpStatus { ok, not_applicable, discarded };

struct OpResult {
    OpStatus status = OpStatus::not_applicable;
    std::optional<RnnGenome> child;

    static OpResult not_applicable() { return {OpStatus::not_applicable, std::nullopt}; }
};

/// Mean and population standard deviation of a sample.
struct SampleStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

SampleStats sample_stats(std::span<const double> xs);

/// Normal(mean, stddev) of the parent's weights; uniform [-0.5, 0.5] when the
/// parent has fewer than two weights.
double draw_new_weight(const SampleStats& parent_weights, Rng& rng);

/// Enabled recurrent edges over all enabled edges; 0 when there are none.
double recurrent_probability(const RnnGenome& genome);

struct DegreeStats {
    SampleStats in;            // enabled feed-forward in-degree of enabled non-input nodes
    SampleStats out;           // enabled feed-forward out-degree of enabled non-output nodes
    SampleStats recurrent_in;  // enabled recurrent in-degree of enabled non-input nodes
};

DegreeStats degree_stats(const RnnGenome& genome);

OpResult disable_edge(const RnnGenome& parent, EvolutionContext& ctx);
OpResult enable_edge(const RnnGenome& parent, EvolutionContext& ctx);
OpResult split_edge(const RnnGenome& parent, EvolutionContext& ctx);
OpResult add_edge(const RnnGenome& parent, EvolutionContext& ctx);
OpResult add_recurrent_edge(const RnnGenome& parent, EvolutionContext& ctx);
OpResult enable_node(const RnnGenome& parent, EvolutionContext& ctx);
OpResult disable_node(const RnnGenome& parent, EvolutionContext& ctx);
OpResult add_node(const RnnGenome& parent, EvolutionContext& ctx);
OpResult split_node(const RnnGenome& parent, EvolutionContext& ctx);
OpResult merge_node(const RnnGenome& parent, EvolutionContext& ctx);
OpResult clone(const RnnGenome& parent, EvolutionContext& ctx);

OpResult apply_mutation(MutationOp op, const RnnGenome& parent, EvolutionContext& ctx);

/// Child built from every element reachable in either parent plus all input
/// and output nodes. Elements present in both parents take
/// w = r * (w_less_fit - w_fit) + w_fit with one r per element drawn from
/// [crossover_r_min, crossover_r_max]; the rest copy their parent.
OpResult crossover(const RnnGenome& fit, const RnnGenome& less_fit, EvolutionContext& ctx);

/// Orders by ascending fitness (unevaluated last), then generation id.
bool fitter(const RnnGenome& a, const RnnGenome& b);

struct GenerationOutcome {
    std::optional<RnnGenome> child;
    GenerationType type = GenerationType::mutation;
    std::optional<MutationOp> op;  // for mutation children
    int attempts = 0;
};

/// Draws a generation type (with crossover folded into mutation when it is
/// impossible), picks parents from `islands[target]` (and the best genome of
/// the other islands for inter-island crossover), and retries up to
/// config.max_retries times. Not-applicable operators are redrawn; discarded
/// children retry the same operator.
GenerationOutcome generate_child(std::span<const std::vector<RnnGenome>> islands, std::size_t target,
                                 EvolutionContext& ctx);

/// Applies one randomly drawn structural mutation (clone excluded).
std::optional<RnnGenome> mutate_once(const RnnGenome& parent, EvolutionContext& ctx);

}  // namespace rnnevo
