#include "dqnlab/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>

#include "dqnlab/errors.hpp"
#include "dqnlab/format.hpp"

namespace dqnlab::pipeline {
namespace {

// One stream per concern so that, e.g., exploration draws never shift the
// environment's pipe layout.
enum Stream : std::uint64_t { kEnvStream = 1, kExploreStream = 2, kSampleStream = 3 };

class EpisodeLog {
public:
    explicit EpisodeLog(const std::optional<std::filesystem::path>& dir) {
        if (!dir) return;
        std::error_code ec;
        std::filesystem::create_directories(*dir, ec);
        if (ec) throw IoError("cannot create run directory " + dir->string() + ": " + ec.message());
        dir_ = *dir;
        out_.open(*dir / "episodes.csv", std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("cannot open " + (*dir / "episodes.csv").string());
        out_ << "episode,reward,steps,epsilon\n";
        out_.flush();
    }

    void append(const EpisodeStats& s) {
        if (!out_.is_open()) return;
        out_ << s.episode << ',' << fmt_double(s.reward) << ',' << s.steps << ',' << fmt_double(s.epsilon) << '\n';
        out_.flush();
        if (!out_) throw IoError("failed writing episodes.csv");
    }

    void checkpoint(const char* name, const nn::QNetwork& net) const {
        if (dir_) nn::save_network_file(net, (*dir_ / name).string());
    }

private:
    std::optional<std::filesystem::path> dir_;
    std::ofstream out_;
};

}  // namespace

EnvStep FlappyTask::step(std::size_t action) {
    flappy::StepResult r = env_.step(action);
    return {std::move(r.observation), r.reward, r.done};
}

std::vector<double> TradingTask::reset(std::uint64_t) {
    env_.reset();
    return env_.current_features();
}

EnvStep TradingTask::step(std::size_t action) {
    trading::StepResult r = env_.step(action);
    return {env_.current_features(), r.reward, r.done};
}

void check_compatible(const nn::QNetwork& policy, std::size_t observation_size, std::size_t action_count) {
    if (policy.input_size() != observation_size || policy.output_size() != action_count)
        throw CompatibilityError("policy maps " + std::to_string(policy.input_size()) + " inputs to " +
                                 std::to_string(policy.output_size()) + " actions, environment needs " +
                                 std::to_string(observation_size) + " inputs and " +
                                 std::to_string(action_count) + " actions");
}

TrainReport train(EpisodicEnv& env, const TrainOptions& opts) {
    opts.hp.validate();
    TrainReport report;
    report.seed = opts.seed;
    EpisodeLog log(opts.out_dir);
    if (opts.episodes == 0) return report;

    DqnAgent agent(env.observation_size(), env.action_count(), opts.hp, opts.seed);
    ReplayMemory memory(opts.hp.memory_capacity);
    Rng env_rng = make_stream(opts.seed, kEnvStream);
    Rng explore_rng = make_stream(opts.seed, kExploreStream);
    Rng sample_rng = make_stream(opts.seed, kSampleStream);
    const std::size_t learn_at = opts.hp.effective_learn_start();

    for (std::size_t ep = 1; ep <= opts.episodes; ++ep) {
        std::vector<double> obs = env.reset(env_rng());
        double total = 0.0;
        std::uint64_t steps = 0;
        bool done = false;
        while (!done) {
            const std::size_t action = agent.select_action(obs, explore_rng);
            EnvStep s = env.step(action);
            total += s.reward;
            ++steps;
            done = s.done;
            if (done)
                memory.push(Transition::terminal(std::move(obs), action, s.reward));
            else
                memory.push(Transition::step(std::move(obs), action, s.reward, s.observation));
            ++report.transitions_pushed;

            if (memory.size() >= learn_at) {
                if (!report.first_learn_memory_size) report.first_learn_memory_size = memory.size();
                const std::vector<Transition> batch = memory.sample(opts.hp.batch_size, sample_rng);
                agent.optimize(batch);
            }
            agent.soft_update();
            obs = std::move(s.observation);
        }

        const EpisodeStats stats{ep, total, steps, agent.current_epsilon()};
        report.episodes.push_back(stats);
        log.append(stats);

        const std::size_t window = std::min(kAverageWindow, report.episodes.size());
        double sum = 0.0;
        for (std::size_t i = report.episodes.size() - window; i < report.episodes.size(); ++i)
            sum += report.episodes[i].reward;
        const double avg = sum / static_cast<double>(window);
        report.running_average.push_back(avg);
        if (!report.best_average || avg > *report.best_average) {
            report.best_average = avg;
            report.best_episode = ep;
            report.best_policy = agent.policy();
            log.checkpoint("best.checkpoint.json", agent.policy());
        }
        if (opts.trigger_reward && !report.trigger_episode && total >= *opts.trigger_reward)
            report.trigger_episode = ep;
        if (opts.on_episode) opts.on_episode(stats);
    }

    report.optimize_calls = agent.optimize_calls();
    report.final_policy = agent.policy();
    log.checkpoint("final.checkpoint.json", agent.policy());
    return report;
}

TrainReport train_flappy(const flappy::FlappyConfig& cfg, const TrainOptions& opts) {
    FlappyTask task(cfg);
    return train(task, opts);
}

TrainReport train_trading(const market::MarketSeries& data, const trading::TradingConfig& cfg,
                          const TrainOptions& opts) {
    data.validate();
    TradingTask task(cfg, data);
    return train(task, opts);
}

EvalSummary evaluate(const nn::QNetwork& policy, EpisodicEnv& env, std::size_t episodes, std::uint64_t seed) {
    if (episodes == 0) throw ParameterError("evaluate: episodes must be >= 1");
    check_compatible(policy, env.observation_size(), env.action_count());
    Rng env_rng = make_stream(seed, kEnvStream);
    EvalSummary out;
    out.min_reward = std::numeric_limits<double>::infinity();
    out.max_reward = -std::numeric_limits<double>::infinity();
    double reward_sum = 0.0;
    double step_sum = 0.0;
    for (std::size_t ep = 1; ep <= episodes; ++ep) {
        std::vector<double> obs = env.reset(env_rng());
        double total = 0.0;
        std::uint64_t steps = 0;
        bool done = false;
        while (!done) {
            EnvStep s = env.step(greedy_action(policy, obs));
            total += s.reward;
            ++steps;
            done = s.done;
            obs = std::move(s.observation);
        }
        out.episodes.push_back({ep, total, steps, 0.0});
        reward_sum += total;
        step_sum += static_cast<double>(steps);
        out.min_reward = std::min(out.min_reward, total);
        out.max_reward = std::max(out.max_reward, total);
    }
    out.mean_reward = reward_sum / static_cast<double>(episodes);
    out.mean_duration = step_sum / static_cast<double>(episodes);
    return out;
}

}  // namespace dqnlab::pipeline
