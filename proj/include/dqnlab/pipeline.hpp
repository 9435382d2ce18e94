#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "dqnlab/agent.hpp"
#include "dqnlab/flappy.hpp"
#include "dqnlab/market_data.hpp"
#include "dqnlab/nn.hpp"
#include "dqnlab/trading.hpp"

namespace dqnlab::pipeline {

struct EnvStep {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
};

// What the training loop needs from an environment.
class EpisodicEnv {
public:
    virtual ~EpisodicEnv() = default;
    virtual std::size_t observation_size() const = 0;
    virtual std::size_t action_count() const = 0;
    virtual std::vector<double> reset(std::uint64_t episode_seed) = 0;
    virtual EnvStep step(std::size_t action) = 0;
};

class FlappyTask final : public EpisodicEnv {
public:
    explicit FlappyTask(flappy::FlappyConfig cfg) : env_(cfg) {}
    std::size_t observation_size() const override { return flappy::observation_size(env_.config().obs_mode); }
    std::size_t action_count() const override { return flappy::kActionCount; }
    std::vector<double> reset(std::uint64_t episode_seed) override { return env_.reset(episode_seed); }
    EnvStep step(std::size_t action) override;
    const flappy::FlappyEnv& env() const { return env_; }

private:
    flappy::FlappyEnv env_;
};

// Network sees trading::features() of each observation; the seed is ignored
// because the market path is fixed.
class TradingTask final : public EpisodicEnv {
public:
    TradingTask(trading::TradingConfig cfg, const market::MarketSeries& series) : env_(cfg, series) {}
    std::size_t observation_size() const override { return trading::kObservationSize; }
    std::size_t action_count() const override { return env_.config().action_levels; }
    std::vector<double> reset(std::uint64_t) override;
    EnvStep step(std::size_t action) override;
    const trading::TradingEnv& env() const { return env_; }

private:
    trading::TradingEnv env_;
};

struct EpisodeStats {
    std::size_t episode = 0;  // 1-based
    double reward = 0.0;
    std::uint64_t steps = 0;
    double epsilon = 0.0;

    bool operator==(const EpisodeStats&) const = default;
};

inline constexpr std::size_t kAverageWindow = 20;

struct TrainOptions {
    Hyperparams hp;
    std::size_t episodes = 0;
    std::uint64_t seed = 0;
    // Writes episodes.csv (appended per episode), best.checkpoint.json and
    // final.checkpoint.json here when set.
    std::optional<std::filesystem::path> out_dir;
    // First episode whose reward reaches this value is reported as the trigger episode.
    std::optional<double> trigger_reward;
    std::function<void(const EpisodeStats&)> on_episode;
};

struct TrainReport {
    std::vector<EpisodeStats> episodes;
    // Mean reward of the trailing window (up to kAverageWindow episodes) after each episode.
    std::vector<double> running_average;
    std::optional<double> best_average;
    std::optional<std::size_t> best_episode;
    std::optional<nn::QNetwork> best_policy;
    std::optional<nn::QNetwork> final_policy;
    std::optional<std::size_t> trigger_episode;
    std::uint64_t seed = 0;
    std::uint64_t transitions_pushed = 0;
    std::uint64_t optimize_calls = 0;
    // Replay length at the first optimize call, if any.
    std::optional<std::size_t> first_learn_memory_size;
};

// Epsilon-greedy rollouts with experience replay: every step pushes one
// transition, learns once the memory holds learn_start transitions, then
// soft-updates the target net.
TrainReport train(EpisodicEnv& env, const TrainOptions& opts);

TrainReport train_flappy(const flappy::FlappyConfig& cfg, const TrainOptions& opts);

// One independent agent per series.
TrainReport train_trading(const market::MarketSeries& data, const trading::TradingConfig& cfg,
                          const TrainOptions& opts);

struct EvalSummary {
    std::vector<EpisodeStats> episodes;
    double mean_reward = 0.0;
    double min_reward = 0.0;
    double max_reward = 0.0;
    double mean_duration = 0.0;
};

// Greedy rollouts (no exploration, no dropout). Throws CompatibilityError
// when the network does not fit the environment.
EvalSummary evaluate(const nn::QNetwork& policy, EpisodicEnv& env, std::size_t episodes, std::uint64_t seed);

void check_compatible(const nn::QNetwork& policy, std::size_t observation_size, std::size_t action_count);

}  // namespace dqnlab::pipeline
