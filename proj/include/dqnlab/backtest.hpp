#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dqnlab/market_data.hpp"
#include "dqnlab/nn.hpp"
#include "dqnlab/trading.hpp"

namespace dqnlab::backtest {

struct Summary {
    double initial_value = 0.0;
    double final_value = 0.0;
    double total_profit_ratio = 0.0;
    double max_drawdown = 0.0;
    double mean_exposure = 0.0;  // mean of shares * price / value
    std::size_t trade_count = 0;
};

struct BacktestReport {
    double initial_value = 0.0;
    std::size_t action_levels = 0;
    std::vector<trading::StepRecord> records;  // one per step, series length - 1
    Summary summary;
};

// Picks an action level from the environment as it stands before each step.
using Strategy = std::function<std::size_t(const trading::TradingEnv&)>;

BacktestReport run_strategy(const market::MarketSeries& series, const trading::TradingConfig& cfg,
                            const Strategy& strategy);

// Greedy policy, no exploration, no dropout. Throws CompatibilityError unless
// the network takes the 4 trading features and emits one value per action level.
BacktestReport run_backtest(const nn::QNetwork& policy, const market::MarketSeries& series,
                            const trading::TradingConfig& cfg);

// Spend all cash at t = 0, then hold.
BacktestReport buy_and_hold(const market::MarketSeries& series, const trading::TradingConfig& cfg);

// Never trades; final value equals initial value.
BacktestReport all_hold(const market::MarketSeries& series, const trading::TradingConfig& cfg);

// Max drawdown runs over the initial value followed by every record's value.
Summary summarize(const BacktestReport& report);

// Writes backtest.csv, summary.json, profit.svg and position.svg into out_dir.
void emit_report(const BacktestReport& policy, const BacktestReport& baseline,
                 const std::filesystem::path& out_dir);

std::string summary_json(const BacktestReport& policy, const BacktestReport& baseline);

}  // namespace dqnlab::backtest
