#include "dqnlab/agent.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dqnlab/errors.hpp"

namespace dqnlab {
namespace {

enum Stream : std::uint64_t { kInitStream = 101, kDropoutStream = 102 };

nn::QNetwork initial_policy(std::size_t obs, std::size_t actions, const Hyperparams& h,
                            std::uint64_t seed) {
    h.validate();
    if (obs == 0 || actions == 0) throw ParameterError("agent: observation size and action count must be >= 1");
    Rng init = make_stream(seed, kInitStream);
    return nn::QNetwork::kaiming(obs, h.hidden_size, actions, h.dropout_p, init);
}

void check_range(bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
}

}  // namespace

void Hyperparams::validate() const {
    check_range(gamma > 0.0 && gamma <= 1.0, "gamma", "must lie in (0, 1]");
    check_range(eps_start >= 0.0 && eps_start <= 1.0, "eps_start", "must lie in [0, 1]");
    check_range(eps_end >= 0.0 && eps_end <= 1.0, "eps_end", "must lie in [0, 1]");
    check_range(eps_end <= eps_start, "eps_end", "must not exceed eps_start");
    check_range(eps_decay > 0.0 && std::isfinite(eps_decay), "eps_decay", "must be > 0");
    check_range(tau > 0.0 && tau <= 1.0, "tau", "must lie in (0, 1]");
    check_range(lr > 0.0 && std::isfinite(lr), "lr", "must be > 0");
    check_range(batch_size >= 1, "batch_size", "must be >= 1");
    check_range(memory_capacity >= 1, "memory_capacity", "must be >= 1");
    check_range(memory_capacity >= batch_size, "memory_capacity", "must be >= batch_size");
    check_range(hidden_size >= 1, "hidden_size", "must be >= 1");
    check_range(huber_delta > 0.0 && std::isfinite(huber_delta), "huber_delta", "must be > 0");
    check_range(clip_limit > 0.0, "clip_limit", "must be > 0");
    check_range(learn_start >= 1, "learn_start", "must be >= 1");
    check_range(learn_start <= memory_capacity, "learn_start", "must not exceed memory_capacity");
    check_range(dropout_p >= 0.0 && dropout_p < 1.0, "dropout_p", "must lie in [0, 1)");
}

std::size_t Hyperparams::effective_learn_start() const {
    return learn_when_full ? memory_capacity : std::max(learn_start, batch_size);
}

double epsilon_at(const Hyperparams& h, std::uint64_t step) {
    return h.eps_end + (h.eps_start - h.eps_end) * std::exp(-static_cast<double>(step) / h.eps_decay);
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw ShapeError("argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::size_t greedy_action(const nn::QNetwork& net, std::span<const double> obs) {
    const std::vector<double> q = nn::predict(net, obs);
    return argmax(q);
}

DqnAgent::DqnAgent(std::size_t observation_size, std::size_t action_count, Hyperparams h,
                   std::uint64_t seed)
    : DqnAgent(initial_policy(observation_size, action_count, h, seed), h, seed) {}

DqnAgent::DqnAgent(nn::QNetwork policy, Hyperparams h, std::uint64_t dropout_seed)
    : hp_(h),
      policy_(std::move(policy)),
      target_(policy_),
      optimizer_(nn::AdamState::for_network(policy_)),
      dropout_rng_(make_stream(dropout_seed, kDropoutStream)) {
    hp_.validate();
}

double DqnAgent::current_epsilon() const {
    return forced_epsilon_ ? *forced_epsilon_ : epsilon_at(hp_, steps_);
}

std::size_t DqnAgent::select_action(std::span<const double> obs, Rng& rng) {
    if (obs.size() != policy_.input_size())
        throw ShapeError("select_action: expected observation length " +
                         std::to_string(policy_.input_size()) + ", got " + std::to_string(obs.size()));
    const double eps = current_epsilon();
    ++steps_;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < eps) {
        std::uniform_int_distribution<std::size_t> pick(0, action_count() - 1);
        return pick(rng);
    }
    return greedy_action(policy_, obs);
}

std::vector<double> DqnAgent::compute_targets(std::span<const Transition> batch) const {
    if (batch.empty()) throw InsufficientDataError("compute_targets: empty batch");
    const std::size_t dim = target_.input_size();
    std::vector<double> next;
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = batch[i];
        if (t.done) continue;
        if (!t.next_state || t.next_state->size() != dim)
            throw ShapeError("compute_targets: next_state length does not match network input " +
                             std::to_string(dim));
        next.insert(next.end(), t.next_state->begin(), t.next_state->end());
        live.push_back(i);
    }
    std::vector<double> targets(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) targets[i] = batch[i].reward;
    if (live.empty()) return targets;

    const std::vector<double> q = nn::predict_batch(target_, next, live.size());
    const std::size_t actions = target_.output_size();
    for (std::size_t j = 0; j < live.size(); ++j) {
        const std::span<const double> row(q.data() + j * actions, actions);
        targets[live[j]] += hp_.gamma * row[argmax(row)];
    }
    return targets;
}

double DqnAgent::optimize(std::span<const Transition> batch) {
    if (batch.empty() || batch.size() < hp_.batch_size)
        throw InsufficientDataError("optimize: need a batch of " + std::to_string(hp_.batch_size) +
                                    " transitions, got " + std::to_string(batch.size()));
    const std::size_t dim = policy_.input_size();
    const std::size_t actions = policy_.output_size();
    std::vector<double> states;
    states.reserve(batch.size() * dim);
    for (const Transition& t : batch) {
        if (t.state.size() != dim)
            throw ShapeError("optimize: expected state length " + std::to_string(dim) + ", got " +
                             std::to_string(t.state.size()));
        if (t.action >= actions)
            throw ShapeError("optimize: action " + std::to_string(t.action) + " outside " +
                             std::to_string(actions) + " actions");
        states.insert(states.end(), t.state.begin(), t.state.end());
    }

    const std::vector<double> targets = compute_targets(batch);
    nn::ForwardResult fwd = nn::forward_batch(policy_, states, batch.size(), nn::Mode::train, dropout_rng_);

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::vector<double> output_grad(fwd.q_values.size(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::size_t slot = i * actions + batch[i].action;
        const nn::HuberResult h = nn::huber_loss(fwd.q_values[slot], targets[i], hp_.huber_delta);
        loss += h.loss;
        output_grad[slot] = h.dloss_dpred * inv_n;
    }

    nn::Gradients grads = nn::backward(policy_, fwd.cache, output_grad);
    nn::clip_gradients_inplace(grads, hp_.clip_limit);
    nn::adam_step(policy_, grads, optimizer_, hp_.lr);
    ++optimize_calls_;
    return loss * inv_n;
}

void DqnAgent::soft_update() { nn::soft_update(policy_, target_, hp_.tau); }

}  // namespace dqnlab
