// dqnlab: data generation, training, evaluation and backtesting front end.
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or validation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dqnlab/backtest.hpp"
#include "dqnlab/config.hpp"
#include "dqnlab/errors.hpp"
#include "dqnlab/format.hpp"
#include "dqnlab/market_data.hpp"
#include "dqnlab/nn.hpp"
#include "dqnlab/pipeline.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace dqnlab;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct TrainFlags {
    std::string config;
    std::string out;
    std::string data;
    std::optional<std::size_t> episodes;
    std::optional<std::uint64_t> seed;
    std::optional<double> train_fraction;
};

config::RunConfig resolve_config(const TrainFlags& f) {
    config::RunConfig cfg = f.config.empty() ? config::RunConfig{} : config::load(f.config);
    if (f.episodes) cfg.episodes = *f.episodes;
    if (f.seed) cfg.seed = *f.seed;
    cfg.validate();
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

fs::path prepare_run_dir(const std::string& out, const config::RunConfig& cfg) {
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / "config.echo.json", config::echo(cfg));
    return dir;
}

pipeline::TrainOptions options_from(const config::RunConfig& cfg, const fs::path& dir) {
    pipeline::TrainOptions opts;
    opts.hp = cfg.hyperparams;
    opts.episodes = cfg.episodes;
    opts.seed = cfg.seed;
    opts.out_dir = dir;
    opts.on_episode = [](const pipeline::EpisodeStats& s) {
        if (s.episode % 50 == 0)
            std::cerr << "episode " << s.episode << " reward " << fmt_double(s.reward) << " steps " << s.steps
                      << " epsilon " << fmt_double(s.epsilon) << '\n';
    };
    return opts;
}

void print_report(const pipeline::TrainReport& r) {
    std::cout << "episodes: " << r.episodes.size() << "\ntransitions: " << r.transitions_pushed
              << "\noptimize calls: " << r.optimize_calls << '\n';
    if (r.best_average)
        std::cout << "best " << pipeline::kAverageWindow << "-episode average: " << fmt_double(*r.best_average)
                  << " (episode " << *r.best_episode << ")\n";
    if (r.trigger_episode) std::cout << "trigger episode: " << *r.trigger_episode << '\n';
}

int cmd_gen_data(const std::string& out, const market::GbmParams& p, std::uint64_t seed, const std::string& symbol) {
    const market::MarketSeries s = market::gen_gbm(p, seed, symbol);
    market::write_csv(s, out);
    std::cout << "wrote " << s.size() << " rows to " << out << '\n';
    return 0;
}

int cmd_train_flappy(const TrainFlags& f) {
    const config::RunConfig cfg = resolve_config(f);
    const fs::path dir = prepare_run_dir(f.out, cfg);
    pipeline::TrainOptions opts = options_from(cfg, dir);
    opts.trigger_reward = cfg.trigger_reward;
    print_report(pipeline::train_flappy(cfg.flappy, opts));
    return 0;
}

int cmd_train_trade(const TrainFlags& f) {
    const config::RunConfig cfg = resolve_config(f);
    market::MarketSeries data = market::load_csv(f.data);
    data.validate();
    const fs::path dir = prepare_run_dir(f.out, cfg);
    if (f.train_fraction) {
        auto [train, test] = market::split(data, *f.train_fraction);
        market::write_csv(train, (dir / "train.csv").string());
        market::write_csv(test, (dir / "test.csv").string());
        data = std::move(train);
    }
    print_report(pipeline::train_trading(data, cfg.trading, options_from(cfg, dir)));
    return 0;
}

int cmd_backtest(const std::string& policy_path, const std::string& data_path, const std::string& out,
                 const std::string& config_path) {
    const config::RunConfig cfg = config_path.empty() ? config::RunConfig{} : config::load(config_path);
    const nn::QNetwork policy = nn::load_network_file(policy_path);
    const market::MarketSeries data = market::load_csv(data_path);
    const backtest::BacktestReport report = backtest::run_backtest(policy, data, cfg.trading);
    const backtest::BacktestReport baseline = backtest::buy_and_hold(data, cfg.trading);
    backtest::emit_report(report, baseline, out);
    std::cout << backtest::summary_json(report, baseline);
    return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& env_name, std::size_t episodes, std::uint64_t seed,
             const std::string& config_path, const std::string& data_path, const std::string& out) {
    const config::RunConfig cfg = config_path.empty() ? config::RunConfig{} : config::load(config_path);
    const nn::QNetwork policy = nn::load_network_file(policy_path);
    std::optional<pipeline::EvalSummary> summary;
    if (env_name == "flappy") {
        pipeline::FlappyTask task(cfg.flappy);
        summary = pipeline::evaluate(policy, task, episodes, seed);
    } else {
        if (data_path.empty()) throw ConfigError("data", "--data is required with --env trade");
        const market::MarketSeries data = market::load_csv(data_path);
        pipeline::TradingTask task(cfg.trading, data);
        summary = pipeline::evaluate(policy, task, episodes, seed);
    }
    nlohmann::ordered_json doc{{"env", env_name},
                               {"episodes", summary->episodes.size()},
                               {"seed", seed},
                               {"mean", summary->mean_reward},
                               {"min", summary->min_reward},
                               {"max", summary->max_reward},
                               {"mean_duration", summary->mean_duration}};
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (!out.empty()) write_text(out, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep Q-learning lab: Flappy Bird and stock trading environments"};
    app.require_subcommand(1);

    std::string gen_out, gen_symbol = "SYN";
    market::GbmParams gbm;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen-data", "Write a geometric Brownian motion price series as CSV");
    gen->add_option("--out", gen_out, "Output CSV path")->required();
    gen->add_option("--steps", gbm.steps, "Number of prices")->capture_default_str();
    gen->add_option("--s0", gbm.s0, "Initial price")->capture_default_str();
    gen->add_option("--mu", gbm.mu, "Drift per step")->capture_default_str();
    gen->add_option("--sigma", gbm.sigma, "Volatility per step")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_option("--symbol", gen_symbol, "Symbol label")->capture_default_str();

    TrainFlags flappy_flags;
    auto* tf = app.add_subcommand("train-flappy", "Train a DQN agent on Flappy Bird");
    tf->add_option("--config", flappy_flags.config, "JSON run config");
    tf->add_option("--out", flappy_flags.out, "Run directory")->required();
    tf->add_option("--episodes", flappy_flags.episodes, "Override episode count");
    tf->add_option("--seed", flappy_flags.seed, "Override seed");

    TrainFlags trade_flags;
    auto* tt = app.add_subcommand("train-trade", "Train a DQN agent on a price series");
    tt->add_option("--data", trade_flags.data, "Market CSV (date,close required)")->required();
    tt->add_option("--config", trade_flags.config, "JSON run config");
    tt->add_option("--out", trade_flags.out, "Run directory")->required();
    tt->add_option("--episodes", trade_flags.episodes, "Override episode count");
    tt->add_option("--seed", trade_flags.seed, "Override seed");
    tt->add_option("--train-fraction", trade_flags.train_fraction,
                   "Train on this prefix; write train.csv and test.csv to the run directory")
        ->check(CLI::Range(0.0, 1.0));

    std::string bt_policy, bt_data, bt_out, bt_config;
    auto* bt = app.add_subcommand("backtest", "Backtest a trading checkpoint against buy-and-hold");
    bt->add_option("--policy", bt_policy, "Checkpoint JSON")->required();
    bt->add_option("--data", bt_data, "Market CSV")->required();
    bt->add_option("--out", bt_out, "Report directory")->required();
    bt->add_option("--config", bt_config, "JSON run config (trading block is used)");

    std::string ev_policy, ev_env, ev_config, ev_data, ev_out;
    std::size_t ev_episodes = 20;
    std::uint64_t ev_seed = 0;
    auto* ev = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
    ev->add_option("--policy", ev_policy, "Checkpoint JSON")->required();
    ev->add_option("--env", ev_env, "flappy or trade")->required()->check(CLI::IsMember({"flappy", "trade"}));
    ev->add_option("--episodes", ev_episodes, "Episodes to run")->check(CLI::PositiveNumber)->capture_default_str();
    ev->add_option("--seed", ev_seed, "Random seed")->capture_default_str();
    ev->add_option("--config", ev_config, "JSON run config");
    ev->add_option("--data", ev_data, "Market CSV for --env trade");
    ev->add_option("--out", ev_out, "Also write the summary JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen) return cmd_gen_data(gen_out, gbm, gen_seed, gen_symbol);
        if (*tf) return cmd_train_flappy(flappy_flags);
        if (*tt) return cmd_train_trade(trade_flags);
        if (*bt) return cmd_backtest(bt_policy, bt_data, bt_out, bt_config);
        if (*ev) return cmd_eval(ev_policy, ev_env, ev_episodes, ev_seed, ev_config, ev_data, ev_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: invalid configuration: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SplitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
