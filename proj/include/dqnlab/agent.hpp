#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dqnlab/nn.hpp"
#include "dqnlab/random.hpp"
#include "dqnlab/replay.hpp"

namespace dqnlab {

// Scalar knobs of a DQN run. Defaults are the published Flappy Bird settings
// plus the choices this library makes where none were given.
struct Hyperparams {
    double gamma = 0.99;
    double eps_start = 0.99;
    double eps_end = 0.01;
    double eps_decay = 1000.0;
    double tau = 0.005;
    double lr = 1e-4;
    std::size_t batch_size = 256;
    std::size_t memory_capacity = 50000;
    std::size_t hidden_size = 256;
    double huber_delta = 1.0;
    double clip_limit = 100.0;
    std::size_t learn_start = 256;
    double dropout_p = 0.1;
    // Wait for a full replay memory before learning, regardless of learn_start.
    bool learn_when_full = false;

    // Replay length at which learning begins.
    std::size_t effective_learn_start() const;

    // Throws ConfigError naming the first offending field.
    void validate() const;

    bool operator==(const Hyperparams&) const = default;
};

// eps_end + (eps_start - eps_end) * exp(-step / eps_decay)
double epsilon_at(const Hyperparams& h, std::uint64_t step);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Greedy action of `net` for `obs` (eval mode, no dropout).
std::size_t greedy_action(const nn::QNetwork& net, std::span<const double> obs);

class DqnAgent {
public:
    // Kaiming-initialized policy net; the target starts as an exact copy.
    // `seed` feeds weight init and the dropout stream.
    DqnAgent(std::size_t observation_size, std::size_t action_count, Hyperparams h, std::uint64_t seed);
    DqnAgent(nn::QNetwork policy, Hyperparams h, std::uint64_t dropout_seed);

    // Epsilon-greedy choice at the current step; advances the step counter.
    std::size_t select_action(std::span<const double> obs, Rng& rng);

    // Bellman targets: r for terminal transitions, r + gamma * max_a' Q_target(s', a') otherwise.
    std::vector<double> compute_targets(std::span<const Transition> batch) const;

    // One Huber-loss gradient step on the policy net. Returns the mean loss
    // measured before the step. The target net is not touched.
    double optimize(std::span<const Transition> batch);

    // target <- tau * policy + (1 - tau) * target
    void soft_update();

    // Pins epsilon regardless of step (nullopt restores the schedule).
    void force_epsilon(std::optional<double> eps) { forced_epsilon_ = eps; }
    double current_epsilon() const;

    const nn::QNetwork& policy() const { return policy_; }
    nn::QNetwork& policy() { return policy_; }
    const nn::QNetwork& target() const { return target_; }
    nn::QNetwork& target() { return target_; }
    const nn::AdamState& optimizer() const { return optimizer_; }
    const Hyperparams& hyperparams() const { return hp_; }
    std::uint64_t steps() const { return steps_; }
    std::uint64_t optimize_calls() const { return optimize_calls_; }
    std::size_t action_count() const { return policy_.output_size(); }

private:
    Hyperparams hp_;
    nn::QNetwork policy_;
    nn::QNetwork target_;
    nn::AdamState optimizer_;
    Rng dropout_rng_;
    std::uint64_t steps_ = 0;
    std::uint64_t optimize_calls_ = 0;
    std::optional<double> forced_epsilon_;
};

}  // namespace dqnlab
