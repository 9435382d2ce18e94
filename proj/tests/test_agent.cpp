#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dqnlab/agent.hpp"
#include "dqnlab/errors.hpp"

namespace dqnlab {
namespace {

using nn::DenseLayer;
using nn::QNetwork;

// Q(s, .) = values for every s.
QNetwork constant_q(std::size_t in, std::vector<double> values) {
    const std::size_t k = values.size();
    return QNetwork({DenseLayer::zeros({in, 1}), DenseLayer::zeros({1, 1}),
                     DenseLayer{1, k, std::vector<double>(k, 0.0), std::move(values)}},
                    0.0);
}

// Q(s) = w * s + b on one input, one action (valid while w * s + b >= 0).
QNetwork scalar_chain(double w, double b) {
    DenseLayer pass{1, 1, {1.0}, {0.0}};
    return QNetwork({DenseLayer{1, 1, {w}, {b}}, pass, pass}, 0.0);
}

Hyperparams small(std::size_t batch = 1) {
    Hyperparams h;
    h.batch_size = batch;
    h.learn_start = batch;
    h.memory_capacity = 100;
    h.dropout_p = 0.0;
    return h;
}

TEST(Epsilon, Schedule) {
    const Hyperparams h;
    EXPECT_DOUBLE_EQ(epsilon_at(h, 0), 0.99);
    EXPECT_NEAR(epsilon_at(h, 1000000), 0.01, 1e-15);
    EXPECT_NEAR(epsilon_at(h, 1000), 0.01 + 0.98 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(epsilon_at(h, 1000), 0.3705218523480135, 1e-12);
}

TEST(Epsilon, MonotoneAndBounded) {
    const Hyperparams h;
    double prev = epsilon_at(h, 0);
    for (std::uint64_t s = 1; s < 20000; s += 7) {
        const double e = epsilon_at(h, s);
        EXPECT_LE(e, prev);
        EXPECT_GE(e, h.eps_end);
        EXPECT_LE(e, h.eps_start);
        prev = e;
    }
}

TEST(Argmax, TiesGoToLowestIndex) {
    EXPECT_EQ(argmax(std::vector<double>{0.5, 0.5}), 0u);
    EXPECT_EQ(argmax(std::vector<double>{0.2, 0.9}), 1u);
    EXPECT_EQ(argmax(std::vector<double>{-1.0, 3.0, 3.0}), 1u);
}

TEST(SelectAction, GreedyWhenEpsilonZero) {
    DqnAgent agent(constant_q(3, {0.2, 0.9}), small(), 1);
    agent.force_epsilon(0.0);
    Rng rng(1);
    const std::vector<double> obs{0.1, 0.2, 0.3};
    EXPECT_EQ(agent.select_action(obs, rng), 1u);
    DqnAgent tie(constant_q(3, {0.5, 0.5}), small(), 1);
    tie.force_epsilon(0.0);
    EXPECT_EQ(tie.select_action(obs, rng), 0u);
    EXPECT_EQ(agent.steps(), 1u);
}

TEST(SelectAction, UniformWhenEpsilonOne) {
    DqnAgent agent(constant_q(1, {0.0, 1.0}), small(), 1);
    agent.force_epsilon(1.0);
    Rng rng(3);
    const std::vector<double> obs{0.0};
    int zeros = 0;
    for (int i = 0; i < 10000; ++i) zeros += agent.select_action(obs, rng) == 0;
    EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
}

TEST(SelectAction, GreedyChoiceInvariantToConstantShift) {
    Rng init(4), data(5);
    const Hyperparams h = small();
    QNetwork net = QNetwork::kaiming(3, 16, 5, 0.0, init);
    QNetwork shifted = net;
    for (double& b : shifted.layer(2).bias) b += 12.5;
    std::normal_distribution<double> z;
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> obs{z(data), z(data), z(data)};
        EXPECT_EQ(greedy_action(net, obs), greedy_action(shifted, obs));
    }
    (void)h;
}

TEST(SelectAction, RejectsWrongDimension) {
    DqnAgent agent(constant_q(3, {0.2, 0.9}), small(), 1);
    Rng rng(1);
    EXPECT_THROW(agent.select_action(std::vector<double>{1.0}, rng), ShapeError);
}

TEST(Targets, TerminalIsReward) {
    DqnAgent agent(constant_q(1, {2.0, 1.5}), small(), 1);
    const std::vector<Transition> batch{Transition::terminal({0.3}, 0, 1.0)};
    EXPECT_EQ(agent.compute_targets(batch)[0], 1.0);
}

TEST(Targets, BootstrapFromTargetMax) {
    DqnAgent agent(constant_q(1, {2.0, 1.5}), small(), 1);
    const std::vector<Transition> batch{Transition::step({0.3}, 0, 1.0, {0.4})};
    EXPECT_NEAR(agent.compute_targets(batch)[0], 2.98, 1e-12);
}

TEST(Targets, MatchesPerTransitionLoop) {
    Hyperparams h = small(5);
    h.gamma = 0.93;
    DqnAgent agent(4, 3, h, 11);
    Rng data(12);
    std::normal_distribution<double> z;
    auto vec = [&] { return std::vector<double>{z(data), z(data), z(data), z(data)}; };
    std::vector<Transition> batch{Transition::step(vec(), 0, 0.5, vec()), Transition::terminal(vec(), 1, -1.0),
                                  Transition::step(vec(), 2, 0.0, vec()), Transition::step(vec(), 1, 2.0, vec()),
                                  Transition::terminal(vec(), 0, 3.0)};
    const auto targets = agent.compute_targets(batch);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        double expect = batch[i].reward;
        if (!batch[i].done) {
            const auto q = nn::predict(agent.target(), *batch[i].next_state);
            expect += h.gamma * *std::max_element(q.begin(), q.end());
        }
        EXPECT_NEAR(targets[i], expect, 1e-12) << i;
    }
}

TEST(Targets, TerminalIgnoresNextStateContents) {
    DqnAgent agent(4, 2, small(), 3);
    Transition t = Transition::terminal({1, 2, 3, 4}, 0, 0.7);
    const std::vector<Transition> batch{t};
    EXPECT_EQ(agent.compute_targets(batch)[0], 0.7);
}

TEST(Optimize, ZeroLossWhenAlreadyAtTarget) {
    // Q = 0 everywhere, terminal reward 0: prediction equals target.
    DqnAgent agent(constant_q(1, {0.0, 0.0}), small(), 1);
    const std::vector<Transition> batch{Transition::terminal({0.5}, 1, 0.0)};
    EXPECT_EQ(agent.optimize(batch), 0.0);
}

TEST(Optimize, HandComputedSingleTransition) {
    // Q(2) = 1.5 * 2 = 3, terminal target 2.6: |diff| = 0.4 < delta, loss = 0.08.
    DqnAgent agent(scalar_chain(1.5, 0.0), small(), 1);
    const std::vector<Transition> batch{Transition::terminal({2.0}, 0, 2.6)};
    EXPECT_NEAR(agent.optimize(batch), 0.08, 1e-12);
    // Linear branch: target 1, diff 2 -> 1 * (2 - 0.5) = 1.5.
    DqnAgent far(scalar_chain(1.5, 0.0), small(), 1);
    const std::vector<Transition> b2{Transition::terminal({2.0}, 0, 1.0)};
    EXPECT_NEAR(far.optimize(b2), 1.5, 1e-12);
}

TEST(Optimize, LossFallsOnFixedBatch) {
    Hyperparams h = small(32);
    h.lr = 1e-3;
    DqnAgent agent(4, 2, h, 7);
    Rng data(8);
    std::normal_distribution<double> z;
    std::vector<Transition> batch;
    for (int i = 0; i < 32; ++i)
        batch.push_back(Transition::terminal({z(data), z(data), z(data), z(data)}, i % 2, z(data)));
    const double first = agent.optimize(batch);
    double last = first;
    for (int i = 1; i < 500; ++i) last = agent.optimize(batch);
    EXPECT_LT(last, first);
    EXPECT_EQ(agent.optimize_calls(), 500u);
}

TEST(Optimize, NeverTouchesTarget) {
    DqnAgent agent(4, 2, small(4), 7);
    const QNetwork before = agent.target();
    std::vector<Transition> batch(4, Transition::step({1, 2, 3, 4}, 1, 1.0, {0, 1, 0, 1}));
    for (int i = 0; i < 10; ++i) agent.optimize(batch);
    EXPECT_EQ(agent.target(), before);
    EXPECT_NE(agent.policy(), before);
}

TEST(Optimize, RejectsShortBatch) {
    DqnAgent agent(4, 2, small(4), 7);
    std::vector<Transition> batch(3, Transition::terminal({1, 2, 3, 4}, 0, 0.0));
    EXPECT_THROW(agent.optimize(batch), InsufficientDataError);
}

TEST(SoftUpdateAgent, BlendsTowardPolicy) {
    Hyperparams h = small();
    DqnAgent agent(scalar_chain(1.0, 0.0), h, 1);
    agent.target().layer(0).weights[0] = 0.0;
    const QNetwork policy = agent.policy();
    agent.soft_update();
    EXPECT_NEAR(agent.target().layer(0).weights[0], 0.005, 1e-15);
    EXPECT_EQ(agent.policy(), policy);
}

TEST(Agent, TargetStartsAsExactCopy) {
    DqnAgent agent(4, 21, Hyperparams{}, 3);
    EXPECT_EQ(agent.policy(), agent.target());
    EXPECT_EQ(agent.policy().layer(0).fan_out, 256u);
}

TEST(HyperparamsValidate, NamesField) {
    Hyperparams h;
    h.gamma = 1.5;
    try {
        h.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "gamma");
    }
    Hyperparams e;
    e.eps_end = 0.995;
    EXPECT_THROW(e.validate(), ConfigError);
}

TEST(HyperparamsValidate, LearnStartGate) {
    Hyperparams h;
    EXPECT_EQ(h.effective_learn_start(), 256u);
    h.learn_when_full = true;
    EXPECT_EQ(h.effective_learn_start(), 50000u);
}

}  // namespace
}  // namespace dqnlab
