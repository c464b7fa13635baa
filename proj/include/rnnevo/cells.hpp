#pragma once

#include <array>
#include <span>
#include <vector>

#include "rnnevo/cell_params.hpp"

namespace rnnevo {

double sigmoid(double v);

/// A source value together with the weight of the edge that delivers it.
struct WeightedInput {
    double value;
    double weight;
};

// Single-timestep forward functions. Every cell sees the weighted sum of its
// feed-forward inputs and the weighted sum of its recurrent inputs; gated
// cells scale those two sums per gate with their own scalars.

double forward_simple(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                      const CellParams& params);

double forward_delta(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                     double prev_state, const CellParams& params);

struct LstmOutput {
    double state;
    double cell;
};

LstmOutput forward_lstm(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                        double prev_cell, const CellParams& params);

double forward_gru(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                   double prev_state, const CellParams& params);

double forward_mgu(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                   double prev_state, const CellParams& params);

double forward_ugrnn(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                     double prev_state, const CellParams& params);

/// Everything the backward pass needs from one forward step of one unit.
struct CellStep {
    double ff_sum = 0.0;
    double rec_sum = 0.0;
    double prev_state = 0.0;
    double prev_cell = 0.0;
    double state = 0.0;
    double cell = 0.0;  // LSTM cell state c_j(t); unused otherwise
    // Gate activations in declaration order of the cell's gate enum, or for
    // the delta cell: {r_j, state proposal, e^v, e^w}.
    std::array<double, 4> gates{};
};

CellStep cell_forward(const CellParams& params, double ff_sum, double rec_sum, double prev_state,
                      double prev_cell);

struct StepGradient {
    double ff_sum = 0.0;
    double rec_sum = 0.0;
    double prev_state = 0.0;
    double prev_cell = 0.0;
};

/// Backpropagates dL/ds(t) (and dL/dc(t) for LSTM) through one stored step.
/// Parameter gradients are accumulated into `param_grad`, which must have the
/// cell's parameter count.
StepGradient cell_backward(const CellParams& params, const CellStep& step, double d_state, double d_cell,
                           std::span<double> param_grad);

// ---------------------------------------------------------------------------
// Unit-level unroll over a window, with inputs supplied as value sequences.

struct FeedForwardSource {
    double weight;
    std::vector<double> values;  // s_i(t) for t in [0, T)
};

struct RecurrentSource {
    double weight;
    int time_skip;
    std::vector<double> values;  // s_r(t) for t in [0, T); s_r(t) = 0 for t < 0
};

/// Stored activations of a unit across an unrolled window.
struct NodeActivationState {
    std::vector<CellStep> steps;
};

NodeActivationState unroll_unit(const CellParams& params, std::span<const FeedForwardSource> inputs,
                                std::span<const RecurrentSource> recurrent, std::size_t steps);

struct GradientBuffer {
    CellParams params;                               // dL/d(each cell parameter)
    std::vector<double> input_weights;               // dL/dw_ij
    std::vector<double> recurrent_weights;           // dL/dv_rjk
    std::vector<std::vector<double>> input_values;   // dL/ds_i(t)
    std::vector<std::vector<double>> recurrent_values;  // dL/ds_r(t), already shifted by the skip
};

/// Exact gradients of sum_t upstream[t] * s(t) with respect to every
/// parameter and every input of the unit, through its own state recurrence.
/// Throws std::invalid_argument if the stored state does not match the
/// inputs or upstream length.
GradientBuffer backward(const CellParams& params, const NodeActivationState& state,
                        std::span<const FeedForwardSource> inputs, std::span<const RecurrentSource> recurrent,
                        std::span<const double> upstream);

}  // namespace rnnevo
