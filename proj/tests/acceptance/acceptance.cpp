// Acceptance run: one PASS/FAIL line per primary criterion.
// Exit status is the number of failing criteria (0 when all pass).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dqnlab/agent.hpp"
#include "dqnlab/backtest.hpp"
#include "dqnlab/format.hpp"
#include "dqnlab/market_data.hpp"
#include "dqnlab/nn.hpp"
#include "dqnlab/pipeline.hpp"
#include "dqnlab/replay.hpp"
#include "dqnlab/trading.hpp"

namespace fs = std::filesystem;
using namespace dqnlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

// --- 1. gradient oracle ----------------------------------------------------

Outcome gradient_oracle() {
    const double h = 1e-4;
    double worst = 0.0;
    std::size_t coords = 0;
    for (std::uint64_t net_seed = 0; net_seed < 10; ++net_seed) {
        Rng rng = make_stream(net_seed, 500);
        nn::QNetwork net = nn::QNetwork::kaiming(4, 16, 2, 0.0, rng);
        std::normal_distribution<double> z;
        for (std::size_t l = 0; l < nn::kLayerCount; ++l)
            for (double& b : net.layer(l).bias) b = 0.1 * z(rng);
        const std::size_t batch = 4;
        std::vector<double> x(batch * 4), c(batch * 2);
        for (double& v : x) v = z(rng);
        for (double& v : c) v = z(rng);
        auto objective = [&] {
            const auto q = nn::predict_batch(net, x, batch);
            return std::inner_product(q.begin(), q.end(), c.begin(), 0.0);
        };
        Rng unused(0);
        const auto fwd = nn::forward_batch(net, x, batch, nn::Mode::train, unused);
        const nn::Gradients g = nn::backward(net, fwd.cache, c);
        for (std::size_t l = 0; l < nn::kLayerCount; ++l) {
            auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
                for (std::size_t i = 0; i < params.size(); ++i) {
                    const double saved = params[i];
                    params[i] = saved + h;
                    const double up = objective();
                    params[i] = saved - h;
                    const double down = objective();
                    params[i] = saved;
                    const double numeric = (up - down) / (2 * h);
                    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
                    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
                    ++coords;
                }
            };
            check(net.layer(l).weights, g.layers[l].weights);
            check(net.layer(l).bias, g.layers[l].bias);
        }
    }
    return {worst < 1e-4, std::to_string(coords) + " coordinates, worst relative error " + num(worst)};
}

// --- 2. Huber / Bellman / soft update examples -----------------------------

nn::QNetwork constant_q(std::size_t in, std::vector<double> values) {
    const std::size_t k = values.size();
    return nn::QNetwork({nn::DenseLayer::zeros({in, 1}), nn::DenseLayer::zeros({1, 1}),
                         nn::DenseLayer{1, k, std::vector<double>(k, 0.0), std::move(values)}},
                        0.0);
}

Outcome trivial_examples() {
    const double tol = 1e-12;
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) failed.push_back(what);
    };
    auto near = [&](double a, double b) { return std::abs(a - b) <= tol; };

    auto h1 = nn::huber_loss(3.0, 3.0, 1.0);
    expect(near(h1.loss, 0.0) && near(h1.dloss_dpred, 0.0), "huber identity");
    expect(near(nn::huber_loss(2.5, 3.0, 1.0).loss, 0.125), "huber quadratic");
    auto h3 = nn::huber_loss(1.0, 3.0, 1.0);
    expect(near(h3.loss, 1.5) && near(h3.dloss_dpred, -1.0), "huber linear");

    Hyperparams hp;
    hp.batch_size = 1;
    hp.learn_start = 1;
    hp.memory_capacity = 10;
    DqnAgent agent(constant_q(1, {2.0, 1.5}), hp, 0);
    const std::vector<Transition> terminal{Transition::terminal({0.0}, 0, 1.0)};
    expect(near(agent.compute_targets(terminal)[0], 1.0), "terminal target");
    const std::vector<Transition> boot{Transition::step({0.0}, 0, 1.0, {0.0})};
    expect(near(agent.compute_targets(boot)[0], 2.98), "bootstrap target");

    Rng a(1), b(2);
    const nn::QNetwork policy = nn::QNetwork::kaiming(3, 8, 2, 0.0, a);
    nn::QNetwork target = nn::QNetwork::kaiming(3, 8, 2, 0.0, b);
    const nn::QNetwork before = target;
    nn::soft_update(policy, target, 0.0);
    expect(target == before, "tau 0 keeps target");
    nn::soft_update(policy, target, 1.0);
    expect(target == policy, "tau 1 copies policy");

    nn::DenseLayer pass{1, 1, {1.0}, {0.0}};
    const nn::QNetwork one({pass, pass, pass}, 0.0);
    nn::QNetwork zero({nn::DenseLayer{1, 1, {0.0}, {0.0}}, pass, pass}, 0.0);
    nn::soft_update(one, zero, 0.005);
    expect(near(zero.layer(0).weights[0], 0.005), "tau 0.005 blend");

    std::string detail = "8 examples";
    for (const auto& f : failed) detail += ", failed: " + f;
    return {failed.empty(), detail};
}

// --- 3. Kaiming statistics -------------------------------------------------

Outcome kaiming_statistics() {
    Rng rng = make_stream(0, 600);
    const nn::DenseLayer layer = nn::kaiming_init({256, 40}, rng);
    const std::vector<double> w(layer.weights.begin(), layer.weights.begin() + 10000);
    const double n = 10000.0;
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : w) ss += (v - mean) * (v - mean);
    const double var = ss / (n - 1);
    // 2/256 * chi2_{9999}(0.0005, 0.9995) / 9999
    const double lo = 0.007454037689003237, hi = 0.008181200065304933;
    const double mean_bound = 3 * std::sqrt(2.0 / 256) / std::sqrt(n);
    const bool ok = var > lo && var < hi && std::abs(mean) < mean_bound;
    return {ok, "variance " + num(var) + " in [" + num(lo) + ", " + num(hi) + "], mean " + num(mean) +
                    " (|mean| bound " + num(mean_bound) + ")"};
}

// --- 4. replay uniformity and FIFO -----------------------------------------

Outcome replay_properties() {
    ReplayMemory mem(10);
    for (int i = 0; i < 10; ++i) mem.push(Transition::terminal({static_cast<double>(i)}, 0, 0.0));
    Rng rng = make_stream(0, 700);
    std::vector<double> counts(10, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[mem.sample_indices(1, rng)[0]] += 1.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - draws / 10.0) * (c - draws / 10.0) / (draws / 10.0);
    const double critical = 27.877164871256568;  // chi2_9 at alpha 0.001

    std::mt19937_64 gen(701);
    std::size_t violations = 0, sequences = 0;
    for (std::size_t cap = 1; cap <= 16; ++cap) {
        for (int s = 0; s < 1000; ++s, ++sequences) {
            ReplayMemory m(cap);
            std::deque<double> oracle;
            const std::size_t pushes = gen() % (4 * cap + 8);
            for (std::size_t p = 0; p < pushes; ++p) {
                const double tag = static_cast<double>(gen() % 1000000);
                m.push(Transition::terminal({tag}, 0, tag));
                oracle.push_back(tag);
                if (oracle.size() > cap) oracle.pop_front();
            }
            bool ok = m.size() == oracle.size() && m.pushes() == pushes &&
                      m.pushes() - m.size() == (pushes > cap ? pushes - cap : 0);
            for (std::size_t i = 0; ok && i < oracle.size(); ++i) ok = m[i].reward == oracle[i];
            violations += !ok;
        }
    }
    return {chi2 < critical && violations == 0, "chi2 " + num(chi2) + " < " + num(critical) + "; FIFO violations " +
                                                    std::to_string(violations) + " over " +
                                                    std::to_string(sequences) + " sequences"};
}

// --- 5. trading accounting -------------------------------------------------

Outcome trading_accounting() {
    double worst_identity = 0.0, worst_sum = 0.0;
    std::mt19937_64 gen(800);
    for (std::uint64_t seq = 0; seq < 1000; ++seq) {
        market::GbmParams p;
        p.steps = 250;
        p.mu = 0.0005;
        p.sigma = 0.02;
        const auto series = market::gen_gbm(p, seq);
        trading::TradingEnv env(trading::TradingConfig{}, series);
        double sum = 0.0;
        trading::StepResult r;
        do {
            r = env.step(gen() % 21);
            sum += r.reward;
            const auto& acct = env.account();
            const double recomputed = acct.cash + acct.shares * r.observation.price;
            worst_identity = std::max(worst_identity, std::abs(r.observation.account_value - recomputed) /
                                                          std::abs(recomputed));
        } while (!r.done);
        const double ratio = r.record.total_profit / env.account().initial_value;
        worst_sum = std::max(worst_sum, std::abs(sum - ratio) / std::max(1.0, std::abs(ratio)));
    }
    return {worst_identity <= 1e-9 && worst_sum <= 1e-9,
            "1000 sequences, worst identity error " + num(worst_identity) + ", worst reward-sum error " +
                num(worst_sum)};
}

// --- 6. CLI determinism ----------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
    const std::string cmd = cli + " " + args + " >>" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

Outcome cli_determinism(const std::string& cli, const fs::path& work) {
    const fs::path root = work / "determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path log = root / "cli.log";
    std::ofstream(root / "config.json")
        << R"({"hyperparams": {"hidden_size": 32, "batch_size": 16, "learn_start": 16, "memory_capacity": 5000}})";
    const std::string cfg = " --config " + (root / "config.json").string();
    const std::string data = (root / "prices.csv").string();

    bool ok = run_cli(cli, "gen-data --out " + data + " --steps 120 --seed 3 --mu 0.001", log);
    for (const char* run : {"a", "b"}) {
        const fs::path dir = root / run;
        ok = ok && run_cli(cli, "train-flappy" + cfg + " --out " + (dir / "flappy").string() + " --episodes 5 --seed 11",
                           log);
        ok = ok && run_cli(cli,
                           "train-trade" + cfg + " --data " + data + " --out " + (dir / "trade").string() +
                               " --episodes 5 --seed 11",
                           log);
        ok = ok && run_cli(cli,
                           "backtest --policy " + (root / "a" / "trade" / "final.checkpoint.json").string() +
                               " --data " + data + " --out " + (dir / "report").string(),
                           log);
    }
    if (!ok) return {false, "a CLI invocation failed, see " + log.string()};

    std::vector<std::string> compared, differing;
    for (const char* f : {"flappy/episodes.csv", "flappy/final.checkpoint.json", "trade/episodes.csv",
                          "trade/final.checkpoint.json", "report/backtest.csv", "report/summary.json",
                          "report/profit.svg", "report/position.svg"}) {
        const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
        compared.push_back(f);
        if (a.empty() || a != b) differing.push_back(f);
    }
    std::string detail = std::to_string(compared.size()) + " artifacts byte-identical across two runs";
    if (!differing.empty()) {
        detail = "differing:";
        for (const auto& d : differing) detail += " " + d;
    }
    return {differing.empty(), detail};
}

// --- 7. Flappy learning signal ---------------------------------------------

Hyperparams learning_hyperparams() {
    Hyperparams h;
    h.hidden_size = 64;
    h.batch_size = 64;
    h.learn_start = 64;
    h.lr = 1e-3;
    h.dropout_p = 0.0;
    return h;
}

Outcome flappy_learning() {
    const flappy::FlappyConfig cfg;  // default physics, extended observations
    flappy::FlappyEnv env(cfg);
    Rng rng = make_stream(0, 900);
    std::uniform_int_distribution<std::size_t> coin(0, 1);
    double baseline = 0.0;
    for (int ep = 0; ep < 1000; ++ep) {
        env.reset(rng());
        flappy::StepResult r;
        do {
            r = env.step(coin(rng));
            baseline += r.reward;
        } while (!r.done);
    }
    baseline /= 1000.0;

    int passed = 0;
    std::string detail = "random baseline " + num(baseline) + "; last-50 means:";
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        pipeline::TrainOptions o;
        o.hp = learning_hyperparams();
        o.episodes = 300;
        o.seed = seed;
        const auto r = pipeline::train_flappy(cfg, o);
        double last = 0.0;
        for (std::size_t i = 250; i < 300; ++i) last += r.episodes[i].reward;
        last /= 50.0;
        passed += last > baseline;
        detail += " " + num(last);
    }
    detail += " (" + std::to_string(passed) + "/3 above baseline)";
    return {passed == 3, detail};
}

// --- 8. trading learning signal --------------------------------------------

Outcome trading_learning() {
    int nonneg = 0, profitable = 0;
    std::string detail = "final-50 means / held-out profit vs all-hold:";
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        market::GbmParams g;
        g.s0 = 100.0;
        g.mu = 0.001;
        g.sigma = 0.01;
        g.steps = 500;
        const auto series = market::gen_gbm(g, seed);
        const auto [train, test] = market::split(series, 0.8);
        trading::TradingConfig tc;
        tc.commission_rate = 0.0;

        pipeline::TrainOptions o;
        o.hp = learning_hyperparams();
        o.hp.gamma = 0.9;
        o.hp.tau = 0.05;
        o.episodes = 200;
        o.seed = seed;
        const auto r = pipeline::train_trading(train, tc, o);
        double last = 0.0;
        for (std::size_t i = 150; i < 200; ++i) last += r.episodes[i].reward;
        last /= 50.0;

        const auto bt = backtest::run_backtest(*r.final_policy, test, tc);
        const auto hold = backtest::all_hold(test, tc);
        nonneg += last >= 0.0;
        profitable += bt.summary.total_profit_ratio > hold.summary.total_profit_ratio;
        detail += " " + num(last) + "/" + num(bt.summary.total_profit_ratio) + " vs " +
                  num(hold.summary.total_profit_ratio);
    }
    detail += " (" + std::to_string(nonneg) + "/3 non-negative, " + std::to_string(profitable) + "/3 profitable)";
    return {nonneg == 3 && profitable >= 2, detail};
}

// --- 9. buy-and-hold exactness ---------------------------------------------

Outcome buy_and_hold_flat() {
    market::MarketSeries s;
    for (std::size_t i = 0; i < 100; ++i) s.timestamps.push_back(market::synthetic_date(i));
    s.close.assign(100, 100.0);
    const auto r = backtest::buy_and_hold(s, trading::TradingConfig{});
    const double pct = 100.0 * r.summary.total_profit_ratio;
    return {std::abs(pct - -0.0999) <= 1e-6, "total profit " + fmt_double(pct) + "%"};
}

// --- 10. two-state chain ---------------------------------------------------

// s0 -> s1 -> terminal. Reward 1 for action 0 in s0 and action 1 in s1.
class ChainEnv final : public pipeline::EpisodicEnv {
public:
    std::size_t observation_size() const override { return 2; }
    std::size_t action_count() const override { return 2; }
    std::vector<double> reset(std::uint64_t) override {
        state_ = 0;
        return {1.0, 0.0};
    }
    pipeline::EnvStep step(std::size_t action) override {
        if (state_ == 0) {
            state_ = 1;
            return {{0.0, 1.0}, action == 0 ? 1.0 : 0.0, false};
        }
        return {{0.0, 0.0}, action == 1 ? 1.0 : 0.0, true};
    }

private:
    int state_ = 0;
};

Outcome chain_mdp() {
    ChainEnv env;
    pipeline::TrainOptions o;
    o.hp.hidden_size = 32;
    o.hp.batch_size = 32;
    o.hp.learn_start = 32;
    o.hp.memory_capacity = 2000;
    o.hp.lr = 1e-3;
    o.hp.dropout_p = 0.0;
    o.episodes = 1000;  // 2 steps each
    o.seed = 1;
    const auto r = pipeline::train(env, o);
    const double g = o.hp.gamma;
    const std::vector<double> q0 = nn::predict(*r.final_policy, std::vector<double>{1.0, 0.0});
    const std::vector<double> q1 = nn::predict(*r.final_policy, std::vector<double>{0.0, 1.0});
    const std::vector<double> want0{1.0 + g, g}, want1{0.0, 1.0};
    double err = 0.0;
    for (int a = 0; a < 2; ++a) err = std::max({err, std::abs(q0[a] - want0[a]), std::abs(q1[a] - want1[a])});
    const bool optimal = argmax(q0) == 0 && argmax(q1) == 1;
    return {optimal && err < 0.1 && r.transitions_pushed == 2000,
            std::to_string(r.transitions_pushed) + " steps, Q(s0)=[" + num(q0[0]) + ", " + num(q0[1]) + "] Q(s1)=[" +
                num(q1[0]) + ", " + num(q1[1]) + "], max error " + num(err) +
                (optimal ? ", greedy optimal" : ", greedy NOT optimal")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dqnlab acceptance checks"};
    std::string cli = DQNLAB_CLI_PATH;
    std::string work = (fs::temp_directory_path() / "dqnlab_acceptance").string();
    std::string report;
    std::vector<int> only;
    app.add_option("--cli", cli, "Path to the dqnlab executable")->capture_default_str();
    app.add_option("--work", work, "Scratch directory")->capture_default_str();
    app.add_option("--only", only, "Run only these criterion numbers (1-10)");
    app.add_option("--report", report, "Also write the PASS/FAIL lines to this file");
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;  // 0 = no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "gradient oracle", 10, gradient_oracle},
        {2, "huber/bellman/soft-update examples", 1, trivial_examples},
        {3, "kaiming statistics", 1, kaiming_statistics},
        {4, "replay uniformity and FIFO", 0, replay_properties},
        {5, "trading accounting", 0, trading_accounting},
        {6, "determinism", 0, [&] { return cli_determinism(cli, work); }},
        {7, "learning signal (flappy)", 600, flappy_learning},
        {8, "learning signal (trading)", 600, trading_learning},
        {9, "buy-and-hold exactness", 0, buy_and_hold_flat},
        {10, "two-state chain convergence", 0, chain_mdp},
    };

    std::ofstream report_out;
    if (!report.empty()) report_out.open(report, std::ios::trunc);
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
            out.pass = false;
            out.detail += "; over the " + num(c.budget_seconds) + " s budget";
        }
        failures += !out.pass;
        std::ostringstream line;
        line << (out.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << out.detail << " ("
             << num(secs) << " s)";
        std::cout << line.str() << std::endl;
        if (report_out.is_open()) report_out << line.str() << '\n' << std::flush;
    }
    return failures;
}
