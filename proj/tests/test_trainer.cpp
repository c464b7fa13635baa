#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cell_oracle.hpp"
#include "rnnevo/trainer.hpp"
#include "support.hpp"

using namespace rnnevo;
using rnnevo::testing::random_frames;
using rnnevo::testing::random_valid_genome;
using rnnevo::testing::RandomGenomeSpec;

namespace {

// Walks the genome gene lists directly each timestep, using the per-type
// forward functions with one WeightedInput per edge.
std::vector<double> interpret(const RnnGenome& g, const Frames& frames) {
    const auto reach = reachable_set(g);
    std::vector<const NodeGene*> order;
    for (const auto& n : g.nodes) {
        if (reach.nodes.count(n.innovation_id)) order.push_back(&n);
    }
    std::sort(order.begin(), order.end(), [](const NodeGene* a, const NodeGene* b) {
        return a->depth != b->depth ? a->depth < b->depth : a->innovation_id < b->innovation_id;
    });
    std::map<InnovationId, std::vector<double>> state, cell;
    for (const auto* n : order) {
        state[n->innovation_id].assign(frames.count, 0.0);
        cell[n->innovation_id].assign(frames.count, 0.0);
    }
    std::vector<double> out(frames.count * frames.n_outputs, 0.0);
    for (std::size_t t = 0; t < frames.count; ++t) {
        for (const auto* n : order) {
            const auto id = n->innovation_id;
            if (n->kind == NodeKind::input) {
                state[id][t] = frames.input_row(t)[static_cast<std::size_t>(n->io_index)];
                continue;
            }
            std::vector<WeightedInput> in, rec;
            for (const auto& e : g.edges) {
                if (e.target == id && reach.edges.count(e.innovation_id)) in.push_back({state[e.source][t], e.weight});
            }
            for (const auto& e : g.recurrent_edges) {
                if (e.target != id || !reach.recurrent_edges.count(e.innovation_id)) continue;
                const auto k = static_cast<std::size_t>(e.time_skip);
                rec.push_back({t >= k ? state[e.source][t - k] : 0.0, e.weight});
            }
            const double ps = t > 0 ? state[id][t - 1] : 0.0;
            const double pc = t > 0 ? cell[id][t - 1] : 0.0;
            const auto r = rnnevo::testing::library_step(n->params, in, rec, ps, pc);
            state[id][t] = r.state;
            cell[id][t] = r.cell;
            if (n->kind == NodeKind::output) out[t * frames.n_outputs + static_cast<std::size_t>(n->io_index)] = r.state;
        }
    }
    return out;
}

RnnGenome one_to_one(double w, double bias) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(1, 1, reg, rng);
    g.edges[0].weight = w;
    g.nodes[1].params[simple::bias] = bias;
    return g;
}

Frames frames_from(std::vector<double> inputs, std::vector<double> targets) {
    Frames f;
    f.count = inputs.size();
    f.n_inputs = 1;
    f.n_outputs = 1;
    f.inputs = std::move(inputs);
    f.targets = std::move(targets);
    return f;
}

}  // namespace

TEST(Mse, Basics) {
    const std::vector<double> a{1.0, 2.0}, zeros{0.0, 0.0}, ones{1.0, 1.0};
    EXPECT_EQ(mse_loss(a, a), 0.0);
    EXPECT_EQ(mse_loss(zeros, ones), 1.0);
    EXPECT_THROW(mse_loss(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(mse_loss(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Mse, MatchesDirectSummation) {
    Rng rng(4);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<double> p(100), y(100);
    for (auto& v : p) v = u(rng);
    for (auto& v : y) v = u(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < 100; ++i) acc += (p[i] - y[i]) * (p[i] - y[i]);
    EXPECT_NEAR(mse_loss(p, y), acc / 100.0, 1e-13);
}

TEST(Rescale, ClipAndBoost) {
    std::vector<double> g{4.0, 0.0};
    EXPECT_DOUBLE_EQ(rescale_gradient(g, 1.0, 0.05), 4.0);
    EXPECT_NEAR(std::hypot(g[0], g[1]), 1.0, 1e-9);
    std::vector<double> b{0.006, 0.008};
    rescale_gradient(b, 1.0, 0.05);
    EXPECT_NEAR(std::hypot(b[0], b[1]), 0.05, 1e-9);
    std::vector<double> z{0.0, 0.0};
    rescale_gradient(z, 1.0, 0.05);
    EXPECT_EQ(z[0], 0.0);
    std::vector<double> mid{0.3, 0.4};
    rescale_gradient(mid, 1.0, 0.05);
    EXPECT_EQ(mid[0], 0.3);
}

TEST(Rescale, BoundsHoldOnRandomVectors) {
    Rng rng(5);
    std::uniform_real_distribution<double> scale(-6, 2);
    std::normal_distribution<double> n(0, 1);
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> g(1 + rng() % 20);
        const double s = std::pow(10.0, scale(rng));
        for (auto& v : g) v = s * n(rng);
        rescale_gradient(g, 1.0, 0.05);
        double sq = 0;
        for (double v : g) sq += v * v;
        ASSERT_LE(std::sqrt(sq), 1.0 + 1e-9);
        ASSERT_GE(std::sqrt(sq), 0.05 - 1e-9);
    }
}

TEST(Forward, ConstantSeriesGivesConstantPrediction) {
    const auto g = one_to_one(0.1, 0.0);
    const auto f = frames_from(std::vector<double>(10, 0.5), std::vector<double>(10, 0.5));
    const auto p = unroll_forward(g, f);
    for (double v : p) EXPECT_NEAR(v, std::tanh(0.05), 1e-15);
}

TEST(Forward, SkipTwoSelfLoopPerturbation) {
    auto g = one_to_one(0.5, 0.1);
    InnovationRegistry reg;
    reg.absorb(g);
    const auto out = g.nodes[1].innovation_id;
    g.recurrent_edges.push_back({reg.recurrent_edge(out, out, 2), out, out, 2, 0.8, true});
    Rng rng(2);
    const auto base = random_frames(10, 1, 1, rng);
    auto bumped = base;
    bumped.inputs[3] += 0.25;
    const auto a = unroll_forward(g, base);
    const auto b = unroll_forward(g, bumped);
    for (std::size_t t = 0; t < 10; ++t) {
        const bool affected = t >= 3 && (t - 3) % 2 == 0;
        if (affected) {
            EXPECT_NE(a[t], b[t]) << t;
        } else {
            EXPECT_EQ(a[t], b[t]) << t;
        }
    }
}

TEST(Forward, MatchesReferenceInterpreter) {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        InnovationRegistry reg;
        RandomGenomeSpec spec;
        spec.inputs = 3;
        spec.outputs = 1 + trial % 2;
        spec.hidden = 5;
        spec.recurrent_edges = 4;
        spec.disable_probability = 0.1;
        const auto g = random_valid_genome(spec, reg, rng);
        const auto f = random_frames(12, 3, static_cast<std::size_t>(spec.outputs), rng);
        const auto lib = unroll_forward(g, f);
        const auto ref = interpret(g, f);
        ASSERT_EQ(lib.size(), ref.size());
        for (std::size_t i = 0; i < lib.size(); ++i) ASSERT_NEAR(lib[i], ref[i], 1e-12);
    }
}

TEST(Forward, RejectsColumnMismatchAndNonFinite) {
    const auto g = one_to_one(0.5, 0.0);
    Rng rng(1);
    EXPECT_THROW(unroll_forward(g, random_frames(5, 2, 1, rng)), std::invalid_argument);
    auto f = random_frames(5, 1, 1, rng);
    f.inputs[2] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(unroll_forward(g, f), std::invalid_argument);
}

TEST(Forward, SeriesAreIndependent) {
    Rng rng(3);
    InnovationRegistry reg;
    RandomGenomeSpec spec;
    spec.recurrent_edges = 5;
    const auto g = random_valid_genome(spec, reg, rng);
    const auto a = random_frames(20, 3, 1, rng);
    const auto b = random_frames(20, 3, 1, rng);
    const CompiledNetwork net(g);
    const std::vector<Frames> ab{a, b}, only_b{b};
    const std::vector<Frames> just_a{a};
    const double pooled = evaluate_mse(net, ab, net.parameters());
    const double ea = evaluate_mse(net, just_a, net.parameters());
    const double eb = evaluate_mse(net, only_b, net.parameters());
    EXPECT_NEAR(pooled, 0.5 * (ea + eb), 1e-15);
}

TEST(Bptt, WholeNetworkMatchesFiniteDifferences) {
    Rng rng(23);
    constexpr double h = 1e-5;
    for (int trial = 0; trial < 40; ++trial) {
        InnovationRegistry reg;
        RandomGenomeSpec spec;
        spec.inputs = 2;
        spec.outputs = 1 + trial % 2;
        spec.hidden = 1 + trial % 6;
        spec.recurrent_edges = 4;
        const auto g = random_valid_genome(spec, reg, rng);
        const auto f = random_frames(8, 2, static_cast<std::size_t>(spec.outputs), rng);
        const CompiledNetwork net(g);
        auto params = net.parameters();
        std::vector<double> grad(params.size(), 0.0);
        net.loss_and_gradient(f, params, grad);
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + h;
            const double up = mse_loss(net.forward(f, params).predictions, f.targets);
            params[i] = saved - h;
            const double down = mse_loss(net.forward(f, params).predictions, f.targets);
            params[i] = saved;
            const double numeric = (up - down) / (2 * h);
            ASSERT_TRUE(rnnevo::testing::gradient_close(grad[i], numeric))
                << "param " << i << " analytic " << grad[i] << " numeric " << numeric;
        }
    }
}

TEST(Bptt, ZeroGradientLeavesWeightsUnchanged) {
    // Prediction equals target exactly: tanh(0) = 0.
    const auto g = one_to_one(0.0, 0.0);
    const auto f = frames_from({0.3, 0.6}, {0.0, 0.0});
    const CompiledNetwork net(g);
    auto params = net.parameters();
    const auto before = params;
    MomentumState m;
    TrainingConfig cfg;
    Rng rng(1);
    const std::vector<Frames> series{f};
    bptt_epoch(net, series, params, m, cfg, rng);
    EXPECT_EQ(params, before);
}

TEST(Bptt, HandSteppedNesterovOracle) {
    const double w0 = 0.3, b0 = -0.1;
    const auto g = one_to_one(w0, b0);
    const std::vector<double> xs{0.2, 0.9, 0.5}, ys{0.4, 0.1, 0.7};
    const auto f = frames_from(xs, ys);
    TrainingConfig cfg;
    cfg.learning_rate = 0.05;
    const CompiledNetwork net(g);
    auto params = net.parameters();  // {bias, weight}
    ASSERT_EQ(params.size(), 2u);
    MomentumState m;
    Rng rng(1);
    const std::vector<Frames> series{f};

    double w = w0, b = b0, vw = 0, vb = 0;
    for (int step = 0; step < 3; ++step) {
        const double lw = w + cfg.nesterov_mu * vw;
        const double lb = b + cfg.nesterov_mu * vb;
        double gw = 0, gb = 0;
        for (std::size_t t = 0; t < 3; ++t) {
            const double p = std::tanh(lw * xs[t] + lb);
            const double d = 2.0 / 3.0 * (p - ys[t]) * (1 - p * p);
            gw += d * xs[t];
            gb += d;
        }
        const double norm = std::sqrt(gw * gw + gb * gb);
        const double s = norm > 1.0 ? 1.0 / norm : (norm > 0 && norm < 0.05 ? 0.05 / norm : 1.0);
        gw *= s;
        gb *= s;
        vw = cfg.nesterov_mu * vw - cfg.learning_rate * gw;
        vb = cfg.nesterov_mu * vb - cfg.learning_rate * gb;
        w += vw;
        b += vb;
        bptt_epoch(net, series, params, m, cfg, rng);
        ASSERT_NEAR(params[0], b, 1e-15);
        ASSERT_NEAR(params[1], w, 1e-15);
    }
    EXPECT_LT(evaluate_mse(net, series, params), mse_loss(unroll_forward(g, f), ys));
}

TEST(Bptt, DivergenceRollsBack) {
    const auto g = one_to_one(0.3, 0.1);
    Rng drng(2);
    const auto f = random_frames(10, 1, 1, drng);
    const CompiledNetwork net(g);
    TrainingConfig cfg;
    cfg.learning_rate = std::numeric_limits<double>::max();
    auto params = net.parameters();
    MomentumState m;
    Rng rng(1);
    const std::vector<Frames> series{f};
    bool diverged = false;
    for (int e = 0; e < 20 && !diverged; ++e) {
        const auto before = params;
        const auto r = bptt_epoch(net, series, params, m, cfg, rng);
        diverged = r.diverged;
        if (diverged) EXPECT_EQ(params, before);
    }
    EXPECT_TRUE(diverged);
    const auto out = train(g, series, series, cfg, 1);
    EXPECT_TRUE(out.diverged);
    EXPECT_EQ(*out.genome.fitness, std::numeric_limits<double>::infinity());
}

TEST(Train, ConfigInvariants) {
    TrainingConfig cfg;
    EXPECT_NO_THROW(cfg.check());
    cfg.epochs = 0;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.boost_threshold = 2.0;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.nesterov_mu = 1.0;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
}

TEST(Train, ImprovesOnFixtureAndIsDeterministic) {
    FixtureSpec fs;
    fs.files = 2;
    fs.rows = 200;
    auto files = generate_fixture(fs);
    const std::vector<std::size_t> tr{0}, va{1};
    const auto set = build_series_set(files, tr, "target", NormalizeMode::minmax);
    const auto data = make_evaluation_data(set, tr, va);
    InnovationRegistry reg;
    Rng rng(3);
    const auto g = seed_genome(static_cast<int>(data.n_inputs), 1, reg, rng);
    const CompiledNetwork net(g);
    const double untrained = evaluate_mse(net, data.validation, net.parameters());
    TrainingConfig cfg;
    cfg.learning_rate = 0.01;
    const auto a = train(g, data.training, data.validation, cfg, 99);
    const auto b = train(g, data.training, data.validation, cfg, 99);
    EXPECT_LT(a.validation_mse, untrained);
    EXPECT_EQ(a.genome, b.genome);
    EXPECT_EQ(a.train_mse, b.train_mse);
    EXPECT_EQ(a.train_mse.size(), 10u);
}

TEST(Train, ForgetBiasOffsetOnlyForPendingNodes) {
    InnovationRegistry reg;
    Rng rng(1);
    auto g = seed_genome(1, 1, reg, rng);
    const auto in = g.nodes[0].innovation_id, out = g.nodes[1].innovation_id;
    for (int k = 0; k < 2; ++k) {
        NodeGene n;
        n.innovation_id = reg.new_hidden_node();
        n.cell_type = CellType::lstm;
        n.params = CellParams(CellType::lstm);
        n.depth = 0.5;
        n.forget_bias_pending = k == 0;
        g.nodes.push_back(n);
        g.edges.push_back({reg.edge(in, n.innovation_id), in, n.innovation_id, 0.0, true});
        g.edges.push_back({reg.edge(n.innovation_id, out), n.innovation_id, out, 0.0, true});
    }
    // Keep the weights fixed by a negligible learning rate and zero inputs.
    const auto f = frames_from(std::vector<double>(4, 0.0), std::vector<double>(4, std::tanh(g.nodes[1].params[0])));
    TrainingConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 1e-300;
    const std::vector<Frames> series{f};
    const auto o = train(g, series, series, cfg, 1);
    const auto fb = gate_index(LstmGate::forget, GatePart::bias);
    EXPECT_NEAR(o.genome.nodes[2].params[fb], 1.0, 1e-12);
    EXPECT_NEAR(o.genome.nodes[3].params[fb], 0.0, 1e-12);
    EXPECT_FALSE(o.genome.nodes[2].forget_bias_pending);
    // A second round of training does not add the offset again.
    const auto o2 = train(o.genome, series, series, cfg, 1);
    EXPECT_NEAR(o2.genome.nodes[2].params[fb], 1.0, 1e-12);
}
