#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "dqnlab/market_data.hpp"

namespace dqnlab::trading {

struct TradingConfig {
    double initial_cash = 1'000'000.0;
    double commission_rate = 0.001;
    std::size_t action_levels = 21;

    void validate() const;  // throws ConfigError
    bool operator==(const TradingConfig&) const = default;
};

struct AccountState {
    double cash = 0.0;
    double shares = 0.0;
    double initial_value = 0.0;
    double last_value = 0.0;

    double value(double price) const { return cash + shares * price; }
    bool operator==(const AccountState&) const = default;
};

// The four raw quantities an observation reports, in this order.
struct TradingObservation {
    double price = 0.0;
    double account_value = 0.0;
    double position = 0.0;
    double cash = 0.0;

    std::array<double, 4> as_array() const { return {price, account_value, position, cash}; }
};

inline constexpr std::size_t kObservationSize = 4;

// Scale-free network input built from an observation: price relative to the
// episode's first price, value and cash relative to initial value, and the
// held position's market value relative to initial value.
std::vector<double> features(const TradingObservation& obs, double reference_price, double initial_value);

// Fraction in [-1, 1] for grid index `level` of `levels` evenly spaced values.
double decode_action(std::size_t level, std::size_t levels);
std::size_t hold_level(std::size_t levels);

// a > 0 spends a * cash (fee on top), a < 0 sells |a| of the shares (fee out
// of proceeds), a = 0 does nothing.
AccountState execute_trade(AccountState account, double price, double a, double fee);

// One row of the step log.
struct StepRecord {
    std::size_t t = 0;
    double price = 0.0;
    std::size_t action = 0;
    double shares = 0.0;
    double cash = 0.0;
    double value = 0.0;
    double daily_profit = 0.0;
    double total_profit = 0.0;
};

struct StepResult {
    TradingObservation observation;
    double reward = 0.0;
    bool done = false;
    StepRecord record;
};

// Single-asset account driven by a price series. Trades fill at the current
// close, then the clock advances one row and the account is marked to market.
class TradingEnv {
public:
    TradingEnv(TradingConfig cfg, const market::MarketSeries& series);

    TradingObservation reset();
    StepResult step(std::size_t action_level);

    // Network input for the current observation.
    std::vector<double> current_features() const;

    const AccountState& account() const { return account_; }
    std::size_t time_index() const { return t_; }
    bool done() const { return done_; }
    double price() const { return prices_[t_]; }
    std::size_t horizon() const { return prices_.size() - 1; }
    const TradingConfig& config() const { return cfg_; }

private:
    TradingObservation observe() const;

    TradingConfig cfg_;
    std::vector<double> prices_;
    AccountState account_;
    std::size_t t_ = 0;
    bool done_ = false;
};

void write_step_log_header(std::ostream& out);
void write_step_log_row(std::ostream& out, const StepRecord& r);

}  // namespace dqnlab::trading
