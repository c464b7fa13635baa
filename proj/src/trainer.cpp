#include "rnnevo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace rnnevo {

namespace {

constexpr std::size_t kNoUnit = static_cast<std::size_t>(-1);

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void TrainingConfig::check() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(nesterov_mu >= 0.0 && nesterov_mu < 1.0)) throw std::invalid_argument("nesterov_mu must be in [0, 1)");
    if (!(boost_threshold < clip_threshold)) throw std::invalid_argument("boost_threshold must be < clip_threshold");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!std::isfinite(lstm_forget_bias_offset)) throw std::invalid_argument("lstm_forget_bias_offset must be finite");
}

CompiledNetwork::CompiledNetwork(const RnnGenome& genome) {
    const auto flags = reachability(genome);
    n_inputs_ = genome.input_count();
    n_outputs_ = genome.output_count();
    output_units_.assign(n_outputs_, kNoUnit);

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < genome.nodes.size(); ++i) {
        if (flags.nodes[i]) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& na = genome.nodes[a];
        const auto& nb = genome.nodes[b];
        if (na.depth != nb.depth) return na.depth < nb.depth;
        return na.innovation_id < nb.innovation_id;
    });

    std::unordered_map<InnovationId, std::size_t> unit_of;
    for (auto i : order) {
        const auto& node = genome.nodes[i];
        Unit u{node.innovation_id, node.kind, node.cell_type, node.io_index, n_params_, {}, {}};
        if (node.kind != NodeKind::input) {
            for (double v : node.params.values()) initial_.push_back(v);
            n_params_ += node.params.size();
        } else if (node.io_index < 0 || static_cast<std::size_t>(node.io_index) >= n_inputs_) {
            throw std::invalid_argument("input node has an out-of-range column index");
        }
        if (node.kind == NodeKind::output) {
            if (node.io_index < 0 || static_cast<std::size_t>(node.io_index) >= n_outputs_) {
                throw std::invalid_argument("output node has an out-of-range slot");
            }
            output_units_[static_cast<std::size_t>(node.io_index)] = units_.size();
        }
        unit_of.emplace(node.innovation_id, units_.size());
        units_.push_back(std::move(u));
    }
    for (std::size_t i = 0; i < genome.edges.size(); ++i) {
        if (!flags.edges[i]) continue;
        const auto& e = genome.edges[i];
        units_[unit_of.at(e.target)].feed_forward.push_back({unit_of.at(e.source), n_params_, 0});
        edge_params_.emplace_back(e.innovation_id, n_params_);
        initial_.push_back(e.weight);
        ++n_params_;
    }
    for (std::size_t i = 0; i < genome.recurrent_edges.size(); ++i) {
        if (!flags.recurrent_edges[i]) continue;
        const auto& e = genome.recurrent_edges[i];
        units_[unit_of.at(e.target)].recurrent.push_back({unit_of.at(e.source), n_params_, e.time_skip});
        recurrent_params_.emplace_back(e.innovation_id, n_params_);
        initial_.push_back(e.weight);
        ++n_params_;
    }
}

void CompiledNetwork::write_back(std::span<const double> params, RnnGenome& genome) const {
    if (params.size() != n_params_) throw std::invalid_argument("parameter vector size mismatch");
    for (const auto& u : units_) {
        if (u.kind == NodeKind::input) continue;
        auto* node = genome.find_node(u.node_id);
        if (node == nullptr) throw std::invalid_argument("genome does not match compiled network");
        auto values = node->params.values();
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(u.param_offset), values.size(), values.begin());
    }
    std::unordered_map<InnovationId, std::size_t> edge_index;
    for (std::size_t i = 0; i < genome.edges.size(); ++i) edge_index.emplace(genome.edges[i].innovation_id, i);
    for (const auto& [id, p] : edge_params_) genome.edges.at(edge_index.at(id)).weight = params[p];
    std::unordered_map<InnovationId, std::size_t> rec_index;
    for (std::size_t i = 0; i < genome.recurrent_edges.size(); ++i) {
        rec_index.emplace(genome.recurrent_edges[i].innovation_id, i);
    }
    for (const auto& [id, p] : recurrent_params_) genome.recurrent_edges.at(rec_index.at(id)).weight = params[p];
}

CellParams CompiledNetwork::unit_params(const Unit& unit, std::span<const double> params) const {
    CellParams cp(unit.cell_type);
    for (std::size_t k = 0; k < cp.size(); ++k) cp[k] = params[unit.param_offset + k];
    return cp;
}

void CompiledNetwork::check_frames(const Frames& frames) const {
    if (frames.n_inputs != n_inputs_) {
        throw std::invalid_argument("series has " + std::to_string(frames.n_inputs) + " input columns, genome expects " +
                                    std::to_string(n_inputs_));
    }
    if (frames.n_outputs != n_outputs_) throw std::invalid_argument("series target count does not match genome");
    if (!all_finite(frames.inputs)) throw std::invalid_argument("series contains non-finite inputs");
}

CompiledNetwork::Trace CompiledNetwork::forward(const Frames& frames, std::span<const double> params) const {
    check_frames(frames);
    if (params.size() != n_params_) throw std::invalid_argument("parameter vector size mismatch");
    const std::size_t T = frames.count;
    Trace trace;
    trace.predictions.assign(T * n_outputs_, 0.0);
    trace.steps.assign(units_.size(), std::vector<CellStep>(T));
    std::vector<CellParams> cps;
    cps.reserve(units_.size());
    for (const auto& u : units_) cps.push_back(u.kind == NodeKind::input ? CellParams{} : unit_params(u, params));

    for (std::size_t t = 0; t < T; ++t) {
        const auto row = frames.input_row(t);
        for (std::size_t ui = 0; ui < units_.size(); ++ui) {
            const auto& u = units_[ui];
            auto& step = trace.steps[ui][t];
            if (u.kind == NodeKind::input) {
                step.state = row[static_cast<std::size_t>(u.io_index)];
                continue;
            }
            double x = 0.0;
            for (const auto& in : u.feed_forward) x += params[in.weight] * trace.steps[in.source][t].state;
            double h = 0.0;
            for (const auto& in : u.recurrent) {
                if (t >= static_cast<std::size_t>(in.time_skip)) {
                    h += params[in.weight] * trace.steps[in.source][t - static_cast<std::size_t>(in.time_skip)].state;
                }
            }
            const double prev_state = t > 0 ? trace.steps[ui][t - 1].state : 0.0;
            const double prev_cell = t > 0 ? trace.steps[ui][t - 1].cell : 0.0;
            step = cell_forward(cps[ui], x, h, prev_state, prev_cell);
        }
        for (std::size_t o = 0; o < n_outputs_; ++o) {
            if (output_units_[o] != kNoUnit) trace.predictions[t * n_outputs_ + o] = trace.steps[output_units_[o]][t].state;
        }
    }
    return trace;
}

double CompiledNetwork::loss_and_gradient(const Frames& frames, std::span<const double> params,
                                          std::span<double> grad) const {
    if (grad.size() != n_params_) throw std::invalid_argument("gradient vector size mismatch");
    const auto trace = forward(frames, params);
    const double loss = mse_loss(trace.predictions, frames.targets);
    const std::size_t T = frames.count;
    const double scale = 2.0 / static_cast<double>(T * n_outputs_);

    std::vector<std::vector<double>> dstate(units_.size(), std::vector<double>(T, 0.0));
    std::vector<std::vector<double>> dcell(units_.size(), std::vector<double>(T, 0.0));
    for (std::size_t o = 0; o < n_outputs_; ++o) {
        if (output_units_[o] == kNoUnit) continue;
        for (std::size_t t = 0; t < T; ++t) {
            dstate[output_units_[o]][t] += scale * (trace.predictions[t * n_outputs_ + o] - frames.targets[t * n_outputs_ + o]);
        }
    }
    std::vector<CellParams> cps;
    cps.reserve(units_.size());
    for (const auto& u : units_) cps.push_back(u.kind == NodeKind::input ? CellParams{} : unit_params(u, params));

    for (std::size_t t = T; t-- > 0;) {
        for (std::size_t ui = units_.size(); ui-- > 0;) {
            const auto& u = units_[ui];
            if (u.kind == NodeKind::input) continue;
            const auto& step = trace.steps[ui][t];
            auto pgrad = grad.subspan(u.param_offset, cps[ui].size());
            const auto g = cell_backward(cps[ui], step, dstate[ui][t], dcell[ui][t], pgrad);
            if (t > 0) {
                dstate[ui][t - 1] += g.prev_state;
                dcell[ui][t - 1] += g.prev_cell;
            }
            for (const auto& in : u.feed_forward) {
                grad[in.weight] += g.ff_sum * trace.steps[in.source][t].state;
                dstate[in.source][t] += g.ff_sum * params[in.weight];
            }
            for (const auto& in : u.recurrent) {
                const auto k = static_cast<std::size_t>(in.time_skip);
                if (t < k) continue;
                grad[in.weight] += g.rec_sum * trace.steps[in.source][t - k].state;
                dstate[in.source][t - k] += g.rec_sum * params[in.weight];
            }
        }
    }
    return loss;
}

std::vector<double> unroll_forward(const RnnGenome& genome, const Frames& frames) {
    const CompiledNetwork net(genome);
    return net.forward(frames, net.parameters()).predictions;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.empty()) throw std::invalid_argument("mse_loss: empty input");
    if (predictions.size() != targets.size()) throw std::invalid_argument("mse_loss: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

double rescale_gradient(std::span<double> grad, double clip, double boost) {
    double sq = 0.0;
    for (double g : grad) sq += g * g;
    const double norm = std::sqrt(sq);
    double factor = 1.0;
    if (norm > clip) {
        factor = clip / norm;
    } else if (norm > 0.0 && norm < boost) {
        factor = boost / norm;
    }
    if (factor != 1.0) {
        for (double& g : grad) g *= factor;
    }
    return norm;
}

double nesterov_step(const CompiledNetwork& net, std::span<const Frames> series, std::span<double> params,
                     MomentumState& momentum, const TrainingConfig& config) {
    const std::size_t n = params.size();
    if (momentum.velocity.size() != n) momentum.velocity.assign(n, 0.0);
    std::vector<double> lookahead(n);
    for (std::size_t i = 0; i < n; ++i) lookahead[i] = params[i] + config.nesterov_mu * momentum.velocity[i];
    std::vector<double> grad(n, 0.0);
    double loss_sum = 0.0;
    std::size_t frames = 0;
    for (const auto& s : series) {
        loss_sum += net.loss_and_gradient(s, lookahead, grad) * static_cast<double>(s.count);
        frames += s.count;
    }
    rescale_gradient(grad, config.clip_threshold, config.boost_threshold);
    for (std::size_t i = 0; i < n; ++i) {
        momentum.velocity[i] = config.nesterov_mu * momentum.velocity[i] - config.learning_rate * grad[i];
        params[i] += momentum.velocity[i];
    }
    return loss_sum / static_cast<double>(frames);
}

EpochResult bptt_epoch(const CompiledNetwork& net, std::span<const Frames> series, std::span<double> params,
                       MomentumState& momentum, const TrainingConfig& config, Rng& rng) {
    if (series.empty()) throw std::invalid_argument("bptt_epoch: no training series");
    const std::vector<double> saved_params(params.begin(), params.end());
    const MomentumState saved_momentum = momentum;

    std::vector<std::size_t> order(series.size());
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle_series) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    }

    EpochResult result;
    double loss_sum = 0.0;
    std::size_t frames = 0;
    if (config.granularity == UpdateGranularity::per_epoch) {
        loss_sum = nesterov_step(net, series, params, momentum, config);
        frames = 1;
    } else {
        for (auto i : order) {
            loss_sum += nesterov_step(net, series.subspan(i, 1), params, momentum, config) *
                        static_cast<double>(series[i].count);
            frames += series[i].count;
        }
    }
    result.loss = loss_sum / static_cast<double>(frames);
    if (!std::isfinite(result.loss) || !all_finite(params) || !all_finite(momentum.velocity)) {
        std::copy(saved_params.begin(), saved_params.end(), params.begin());
        momentum = saved_momentum;
        result.diverged = true;
    }
    return result;
}

double evaluate_mse(const CompiledNetwork& net, std::span<const Frames> series, std::span<const double> params) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
        const auto trace = net.forward(s, params);
        for (std::size_t i = 0; i < trace.predictions.size(); ++i) {
            const double d = trace.predictions[i] - s.targets[i];
            sum += d * d;
        }
        n += trace.predictions.size();
    }
    if (n == 0) throw std::invalid_argument("evaluate_mse: no frames");
    return sum / static_cast<double>(n);
}

TrainingOutcome train(const RnnGenome& genome, std::span<const Frames> training, std::span<const Frames> validation,
                      const TrainingConfig& config, std::uint64_t seed) {
    config.check();
    TrainingOutcome out;
    out.genome = genome;
    for (auto& node : out.genome.nodes) {
        if (node.forget_bias_pending && node.cell_type == CellType::lstm) {
            node.params[gate_index(LstmGate::forget, GatePart::bias)] += config.lstm_forget_bias_offset;
        }
        node.forget_bias_pending = false;
    }
    const CompiledNetwork net(out.genome);
    auto params = net.parameters();
    MomentumState momentum;
    momentum.velocity.assign(params.size(), 0.0);
    Rng rng(seed);
    for (int e = 0; e < config.epochs; ++e) {
        const auto r = bptt_epoch(net, training, params, momentum, config, rng);
        if (r.diverged) {
            out.diverged = true;
            break;
        }
        out.train_mse.push_back(r.loss);
    }
    net.write_back(params, out.genome);
    if (!out.diverged) {
        out.validation_mse = evaluate_mse(net, validation.empty() ? training : validation, params);
        if (!std::isfinite(out.validation_mse)) out.diverged = true;
    }
    if (out.diverged) out.validation_mse = std::numeric_limits<double>::infinity();
    out.genome.fitness = out.validation_mse;
    return out;
}

}  // namespace rnnevo
