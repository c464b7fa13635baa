#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rnnevo/cells.hpp"
#include "rnnevo/data.hpp"
#include "rnnevo/genome.hpp"

namespace rnnevo {

enum class UpdateGranularity {
    per_series,  // one update per training series per epoch
    per_epoch,   // gradients summed over all series, one update per epoch
};

struct TrainingConfig {
    double learning_rate = 0.001;
    double nesterov_mu = 0.9;
    double clip_threshold = 1.0;
    double boost_threshold = 0.05;
    int epochs = 10;
    double lstm_forget_bias_offset = 1.0;
    UpdateGranularity granularity = UpdateGranularity::per_series;
    bool shuffle_series = true;

    /// Throws std::invalid_argument when an invariant does not hold.
    void check() const;
};

struct TrainingOutcome {
    RnnGenome genome;  // trained weights; fitness set to validation_mse or +inf
    std::vector<double> train_mse;
    double validation_mse = 0.0;
    bool diverged = false;
};

/// A genome flattened for evaluation: reachable nodes in depth order with
/// every trainable scalar in one parameter vector.
class CompiledNetwork {
public:
    explicit CompiledNetwork(const RnnGenome& genome);

    std::size_t parameter_count() const { return n_params_; }
    std::size_t input_count() const { return n_inputs_; }
    std::size_t output_count() const { return n_outputs_; }
    std::size_t unit_count() const { return units_.size(); }

    std::vector<double> parameters() const { return initial_; }
    /// Copies `params` back into the matching genes of `genome`.
    void write_back(std::span<const double> params, RnnGenome& genome) const;

    struct Trace {
        std::vector<double> predictions;  // count x n_outputs
        // steps[unit][t]; input units store their value in `state`.
        std::vector<std::vector<CellStep>> steps;
    };

    Trace forward(const Frames& frames, std::span<const double> params) const;

    /// MSE over all frames and outputs; adds d(MSE)/d(params) into `grad`.
    double loss_and_gradient(const Frames& frames, std::span<const double> params, std::span<double> grad) const;

private:
    struct Incoming {
        std::size_t source;  // unit index
        std::size_t weight;  // parameter index
        int time_skip;       // 0 for feed-forward
    };
    struct Unit {
        InnovationId node_id;
        NodeKind kind;
        CellType cell_type;
        int io_index;
        std::size_t param_offset;
        std::vector<Incoming> feed_forward;
        std::vector<Incoming> recurrent;
    };

    CellParams unit_params(const Unit& unit, std::span<const double> params) const;
    void check_frames(const Frames& frames) const;

    std::vector<Unit> units_;
    std::vector<std::size_t> output_units_;  // indexed by output slot, npos if unreachable
    std::vector<std::pair<InnovationId, std::size_t>> edge_params_;
    std::vector<std::pair<InnovationId, std::size_t>> recurrent_params_;
    std::vector<double> initial_;
    std::size_t n_params_ = 0;
    std::size_t n_inputs_ = 0;
    std::size_t n_outputs_ = 0;
};

/// Predictions for every frame of `frames` (count x n_outputs).
std::vector<double> unroll_forward(const RnnGenome& genome, const Frames& frames);

/// Mean of squared differences; throws on empty or mismatched input.
double mse_loss(std::span<const double> predictions, std::span<const double> targets);

/// Rescales `grad` in place by its global L2 norm: down to `clip` above it,
/// up to `boost` when 0 < norm < boost. Returns the norm before rescaling.
double rescale_gradient(std::span<double> grad, double clip, double boost);

/// Nesterov momentum buffer, one velocity per parameter.
struct MomentumState {
    std::vector<double> velocity;
};

/// One Nesterov step: gradient at params + mu * v, rescaled, then
/// v <- mu * v - lr * g and params <- params + v. Returns the lookahead loss.
double nesterov_step(const CompiledNetwork& net, std::span<const Frames> series, std::span<double> params,
                     MomentumState& momentum, const TrainingConfig& config);

struct EpochResult {
    double loss = 0.0;  // frame-weighted mean of the losses seen during the epoch
    bool diverged = false;
};

/// One pass over `series`. On a non-finite loss or parameter the parameters
/// and momentum are restored to their values before the epoch.
EpochResult bptt_epoch(const CompiledNetwork& net, std::span<const Frames> series, std::span<double> params,
                       MomentumState& momentum, const TrainingConfig& config, Rng& rng);

/// Pooled MSE over every frame of every series.
double evaluate_mse(const CompiledNetwork& net, std::span<const Frames> series, std::span<const double> params);

/// Applies the pending LSTM forget-bias offsets, trains for config.epochs,
/// and scores on `validation`. Diverged genomes get +inf fitness.
TrainingOutcome train(const RnnGenome& genome, std::span<const Frames> training, std::span<const Frames> validation,
                      const TrainingConfig& config, std::uint64_t seed);

}  // namespace rnnevo
