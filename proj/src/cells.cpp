#include "rnnevo/cells.hpp"

#include <cmath>
#include <stdexcept>

namespace rnnevo {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

namespace {

double weighted_sum(std::span<const WeightedInput> xs) {
    double sum = 0.0;
    for (const auto& x : xs) sum += x.weight * x.value;
    return sum;
}

template <typename Gate>
double gate_pre(const CellParams& p, Gate g, double x, double h) {
    return p[gate_index(g, GatePart::input)] * x + p[gate_index(g, GatePart::recurrent)] * h +
           p[gate_index(g, GatePart::bias)];
}

// Accumulates the gradient of a gate pre-activation w*x + v*h + b.
template <typename Gate>
void gate_grad(const CellParams& p, Gate g, double d_pre, double x, double h, std::span<double> grad,
               StepGradient& out) {
    grad[gate_index(g, GatePart::input)] += d_pre * x;
    grad[gate_index(g, GatePart::recurrent)] += d_pre * h;
    grad[gate_index(g, GatePart::bias)] += d_pre;
    out.ff_sum += d_pre * p[gate_index(g, GatePart::input)];
    out.rec_sum += d_pre * p[gate_index(g, GatePart::recurrent)];
}

}  // namespace

CellStep cell_forward(const CellParams& p, double x, double h, double prev_state, double prev_cell) {
    CellStep s;
    s.ff_sum = x;
    s.rec_sum = h;
    s.prev_state = prev_state;
    s.prev_cell = prev_cell;
    switch (p.type()) {
        case CellType::simple:
            s.state = std::tanh(x + h + p[simple::bias]);
            break;
        case CellType::delta_rnn: {
            const double ew = x + h;
            const double ev = p[delta::memory] * prev_state;
            const double d1 = p[delta::alpha] * ev * ew;
            const double d2 = p[delta::beta1] * ev + p[delta::beta2] * ew;
            const double r = sigmoid(ew + p[delta::gate_bias]);
            const double proposal = std::tanh(d1 + d2 + p[delta::bias]);
            s.state = std::tanh((1.0 - r) * proposal + r * prev_state);
            s.gates = {r, proposal, ev, ew};
            break;
        }
        case CellType::lstm: {
            const double f = sigmoid(gate_pre(p, LstmGate::forget, x, h));
            const double i = sigmoid(gate_pre(p, LstmGate::input, x, h));
            const double c_hat = std::tanh(gate_pre(p, LstmGate::candidate, x, h));
            const double o = sigmoid(gate_pre(p, LstmGate::output, x, h));
            s.cell = f * prev_cell + i * c_hat;
            s.state = o * std::tanh(s.cell);
            s.gates = {f, i, c_hat, o};
            break;
        }
        case CellType::gru: {
            const double z = sigmoid(gate_pre(p, GruGate::update, x, h));
            const double r = sigmoid(gate_pre(p, GruGate::reset, x, h));
            const double proposal = std::tanh(p[gate_index(GruGate::candidate, GatePart::input)] * x +
                                              p[gate_index(GruGate::candidate, GatePart::recurrent)] * (r * h) +
                                              p[gate_index(GruGate::candidate, GatePart::bias)]);
            s.state = z * proposal + (1.0 - z) * prev_state;
            s.gates = {z, r, proposal, 0.0};
            break;
        }
        case CellType::mgu: {
            const double f = sigmoid(gate_pre(p, MguGate::forget, x, h));
            const double proposal = std::tanh(p[gate_index(MguGate::candidate, GatePart::input)] * x +
                                              p[gate_index(MguGate::candidate, GatePart::recurrent)] * (f * h) +
                                              p[gate_index(MguGate::candidate, GatePart::bias)]);
            s.state = f * proposal + (1.0 - f) * prev_state;
            s.gates = {f, proposal, 0.0, 0.0};
            break;
        }
        case CellType::ugrnn: {
            const double c = std::tanh(gate_pre(p, UgrnnGate::candidate, x, h));
            const double g = sigmoid(gate_pre(p, UgrnnGate::update, x, h));
            s.state = g * prev_state + (1.0 - g) * c;
            s.gates = {c, g, 0.0, 0.0};
            break;
        }
    }
    return s;
}

StepGradient cell_backward(const CellParams& p, const CellStep& s, double ds, double dc_next,
                           std::span<double> grad) {
    if (grad.size() != p.size()) throw std::invalid_argument("gradient buffer does not match cell parameters");
    StepGradient out;
    const double x = s.ff_sum;
    const double h = s.rec_sum;
    switch (p.type()) {
        case CellType::simple: {
            const double da = ds * (1.0 - s.state * s.state);
            grad[simple::bias] += da;
            out.ff_sum = da;
            out.rec_sum = da;
            break;
        }
        case CellType::delta_rnn: {
            const auto [r, proposal, ev, ew] = s.gates;
            const double du = ds * (1.0 - s.state * s.state);
            const double d_proposal = du * (1.0 - r);
            const double dr = du * (s.prev_state - proposal);
            double d_prev = du * r;
            const double da = d_proposal * (1.0 - proposal * proposal);  // into d1 + d2 + bias
            grad[delta::bias] += da;
            grad[delta::alpha] += da * ev * ew;
            grad[delta::beta1] += da * ev;
            grad[delta::beta2] += da * ew;
            double dev = da * (p[delta::alpha] * ew + p[delta::beta1]);
            double dew = da * (p[delta::alpha] * ev + p[delta::beta2]);
            const double dr_pre = dr * r * (1.0 - r);
            grad[delta::gate_bias] += dr_pre;
            dew += dr_pre;
            grad[delta::memory] += dev * s.prev_state;
            d_prev += dev * p[delta::memory];
            out.ff_sum = dew;
            out.rec_sum = dew;
            out.prev_state = d_prev;
            break;
        }
        case CellType::lstm: {
            const auto [f, i, c_hat, o] = s.gates;
            const double tc = std::tanh(s.cell);
            const double d_o = ds * tc;
            const double dc = dc_next + ds * o * (1.0 - tc * tc);
            gate_grad(p, LstmGate::forget, dc * s.prev_cell * f * (1.0 - f), x, h, grad, out);
            gate_grad(p, LstmGate::input, dc * c_hat * i * (1.0 - i), x, h, grad, out);
            gate_grad(p, LstmGate::candidate, dc * i * (1.0 - c_hat * c_hat), x, h, grad, out);
            gate_grad(p, LstmGate::output, d_o * o * (1.0 - o), x, h, grad, out);
            out.prev_cell = dc * f;
            break;
        }
        case CellType::gru: {
            const auto [z, r, proposal, unused] = s.gates;
            (void)unused;
            const double dz = ds * (proposal - s.prev_state);
            const double d_proposal = ds * z;
            out.prev_state = ds * (1.0 - z);
            gate_grad(p, GruGate::update, dz * z * (1.0 - z), x, h, grad, out);
            const double da = d_proposal * (1.0 - proposal * proposal);
            const double w = p[gate_index(GruGate::candidate, GatePart::input)];
            const double v = p[gate_index(GruGate::candidate, GatePart::recurrent)];
            grad[gate_index(GruGate::candidate, GatePart::input)] += da * x;
            grad[gate_index(GruGate::candidate, GatePart::recurrent)] += da * r * h;
            grad[gate_index(GruGate::candidate, GatePart::bias)] += da;
            out.ff_sum += da * w;
            out.rec_sum += da * v * r;
            const double dr = da * v * h;
            gate_grad(p, GruGate::reset, dr * r * (1.0 - r), x, h, grad, out);
            break;
        }
        case CellType::mgu: {
            const double f = s.gates[0];
            const double proposal = s.gates[1];
            double df = ds * (proposal - s.prev_state);
            const double d_proposal = ds * f;
            out.prev_state = ds * (1.0 - f);
            const double da = d_proposal * (1.0 - proposal * proposal);
            const double w = p[gate_index(MguGate::candidate, GatePart::input)];
            const double v = p[gate_index(MguGate::candidate, GatePart::recurrent)];
            grad[gate_index(MguGate::candidate, GatePart::input)] += da * x;
            grad[gate_index(MguGate::candidate, GatePart::recurrent)] += da * f * h;
            grad[gate_index(MguGate::candidate, GatePart::bias)] += da;
            out.ff_sum += da * w;
            out.rec_sum += da * v * f;
            df += da * v * h;
            gate_grad(p, MguGate::forget, df * f * (1.0 - f), x, h, grad, out);
            break;
        }
        case CellType::ugrnn: {
            const double c = s.gates[0];
            const double g = s.gates[1];
            const double dcand = ds * (1.0 - g);
            const double dg = ds * (s.prev_state - c);
            out.prev_state = ds * g;
            gate_grad(p, UgrnnGate::candidate, dcand * (1.0 - c * c), x, h, grad, out);
            gate_grad(p, UgrnnGate::update, dg * g * (1.0 - g), x, h, grad, out);
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double forward_simple(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                      const CellParams& params) {
    if (params.type() != CellType::simple) throw std::invalid_argument("forward_simple: wrong parameter block");
    return cell_forward(params, weighted_sum(inputs), weighted_sum(recurrent), 0.0, 0.0).state;
}

double forward_delta(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                     double prev_state, const CellParams& params) {
    if (params.type() != CellType::delta_rnn) throw std::invalid_argument("forward_delta: wrong parameter block");
    return cell_forward(params, weighted_sum(inputs), weighted_sum(recurrent), prev_state, 0.0).state;
}

LstmOutput forward_lstm(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                        double prev_cell, const CellParams& params) {
    if (params.type() != CellType::lstm) throw std::invalid_argument("forward_lstm: wrong parameter block");
    const auto s = cell_forward(params, weighted_sum(inputs), weighted_sum(recurrent), 0.0, prev_cell);
    return {s.state, s.cell};
}

double forward_gru(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                   double prev_state, const CellParams& params) {
    if (params.type() != CellType::gru) throw std::invalid_argument("forward_gru: wrong parameter block");
    return cell_forward(params, weighted_sum(inputs), weighted_sum(recurrent), prev_state, 0.0).state;
}

double forward_mgu(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                   double prev_state, const CellParams& params) {
    if (params.type() != CellType::mgu) throw std::invalid_argument("forward_mgu: wrong parameter block");
    return cell_forward(params, weighted_sum(inputs), weighted_sum(recurrent), prev_state, 0.0).state;
}

double forward_ugrnn(std::span<const WeightedInput> inputs, std::span<const WeightedInput> recurrent,
                     double prev_state, const CellParams& params) {
    if (params.type() != CellType::ugrnn) throw std::invalid_argument("forward_ugrnn: wrong parameter block");
    return cell_forward(params, weighted_sum(inputs), weighted_sum(recurrent), prev_state, 0.0).state;
}

// ---------------------------------------------------------------------------

namespace {

double delayed(const RecurrentSource& r, std::size_t t) {
    const auto skip = static_cast<std::size_t>(r.time_skip);
    return t >= skip ? r.values[t - skip] : 0.0;
}

void check_sources(std::span<const FeedForwardSource> inputs, std::span<const RecurrentSource> recurrent,
                   std::size_t steps) {
    for (const auto& in : inputs) {
        if (in.values.size() != steps) throw std::invalid_argument("input sequence length mismatch");
    }
    for (const auto& r : recurrent) {
        if (r.values.size() != steps) throw std::invalid_argument("recurrent sequence length mismatch");
        if (r.time_skip < 1) throw std::invalid_argument("recurrent time skip must be >= 1");
    }
}

}  // namespace

NodeActivationState unroll_unit(const CellParams& params, std::span<const FeedForwardSource> inputs,
                                std::span<const RecurrentSource> recurrent, std::size_t steps) {
    check_sources(inputs, recurrent, steps);
    NodeActivationState state;
    state.steps.reserve(steps);
    double prev_state = 0.0;
    double prev_cell = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        double x = 0.0;
        for (const auto& in : inputs) x += in.weight * in.values[t];
        double h = 0.0;
        for (const auto& r : recurrent) h += r.weight * delayed(r, t);
        const auto step = cell_forward(params, x, h, prev_state, prev_cell);
        prev_state = step.state;
        prev_cell = step.cell;
        state.steps.push_back(step);
    }
    return state;
}

GradientBuffer backward(const CellParams& params, const NodeActivationState& state,
                        std::span<const FeedForwardSource> inputs, std::span<const RecurrentSource> recurrent,
                        std::span<const double> upstream) {
    const std::size_t steps = state.steps.size();
    if (upstream.size() != steps) throw std::invalid_argument("upstream gradient length does not match stored steps");
    check_sources(inputs, recurrent, steps);

    GradientBuffer g;
    g.params = CellParams(params.type());
    g.input_weights.assign(inputs.size(), 0.0);
    g.recurrent_weights.assign(recurrent.size(), 0.0);
    g.input_values.assign(inputs.size(), std::vector<double>(steps, 0.0));
    g.recurrent_values.assign(recurrent.size(), std::vector<double>(steps, 0.0));

    double carry_state = 0.0;
    double carry_cell = 0.0;
    for (std::size_t t = steps; t-- > 0;) {
        const auto sg = cell_backward(params, state.steps[t], upstream[t] + carry_state, carry_cell, g.params.values());
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            g.input_weights[i] += sg.ff_sum * inputs[i].values[t];
            g.input_values[i][t] += sg.ff_sum * inputs[i].weight;
        }
        for (std::size_t k = 0; k < recurrent.size(); ++k) {
            const auto skip = static_cast<std::size_t>(recurrent[k].time_skip);
            if (t < skip) continue;
            g.recurrent_weights[k] += sg.rec_sum * recurrent[k].values[t - skip];
            g.recurrent_values[k][t - skip] += sg.rec_sum * recurrent[k].weight;
        }
        carry_state = sg.prev_state;
        carry_cell = sg.prev_cell;
    }
    return g;
}

}  // namespace rnnevo
