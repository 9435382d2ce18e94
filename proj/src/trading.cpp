#include "dqnlab/trading.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "dqnlab/errors.hpp"
#include "dqnlab/format.hpp"

namespace dqnlab::trading {

void TradingConfig::validate() const {
    if (!(initial_cash > 0.0) || !std::isfinite(initial_cash)) throw ConfigError("initial_cash", "must be > 0");
    if (!(commission_rate >= 0.0 && commission_rate < 1.0))
        throw ConfigError("commission_rate", "must lie in [0, 1)");
    if (action_levels < 3 || action_levels % 2 == 0)
        throw ConfigError("action_levels", "must be an odd count >= 3");
}

std::vector<double> features(const TradingObservation& obs, double reference_price, double initial_value) {
    return {obs.price / reference_price, obs.account_value / initial_value,
            obs.position * obs.price / initial_value, obs.cash / initial_value};
}

double decode_action(std::size_t level, std::size_t levels) {
    if (levels < 2 || level >= levels)
        throw ParameterError("action level " + std::to_string(level) + " outside grid of " + std::to_string(levels));
    return -1.0 + 2.0 * static_cast<double>(level) / static_cast<double>(levels - 1);
}

std::size_t hold_level(std::size_t levels) { return (levels - 1) / 2; }

AccountState execute_trade(AccountState account, double price, double a, double fee) {
    if (!(std::abs(a) <= 1.0)) throw ParameterError("execute_trade: |a| must be <= 1");
    if (!(price > 0.0)) throw ParameterError("execute_trade: price must be > 0");
    if (a > 0.0) {
        const double notional = a * account.cash / (1.0 + fee);
        account.shares += notional / price;
        account.cash = a == 1.0 ? 0.0 : std::max(0.0, account.cash - notional * (1.0 + fee));
    } else if (a < 0.0) {
        const double sold = a == -1.0 ? account.shares : -a * account.shares;
        account.cash += sold * price * (1.0 - fee);
        account.shares = a == -1.0 ? 0.0 : std::max(0.0, account.shares - sold);
    }
    return account;
}

TradingEnv::TradingEnv(TradingConfig cfg, const market::MarketSeries& series)
    : cfg_(cfg), prices_(series.close) {
    cfg_.validate();
    if (prices_.size() < 2)
        throw DataError("trading env: series needs at least 2 prices, has " + std::to_string(prices_.size()));
    for (double p : prices_)
        if (!(p > 0.0) || !std::isfinite(p)) throw DataError("trading env: prices must be positive and finite");
    reset();
}

TradingObservation TradingEnv::observe() const {
    const double p = prices_[t_];
    return {p, account_.value(p), account_.shares, account_.cash};
}

TradingObservation TradingEnv::reset() {
    t_ = 0;
    done_ = false;
    account_ = AccountState{cfg_.initial_cash, 0.0, cfg_.initial_cash, cfg_.initial_cash};
    return observe();
}

std::vector<double> TradingEnv::current_features() const {
    return features(observe(), prices_.front(), account_.initial_value);
}

StepResult TradingEnv::step(std::size_t action_level) {
    if (done_) throw InvalidStateError("trading step: episode already finished");
    const double a = decode_action(action_level, cfg_.action_levels);
    account_ = execute_trade(account_, prices_[t_], a, cfg_.commission_rate);
    ++t_;
    const double price = prices_[t_];
    const double value = account_.value(price);
    const double daily = value - account_.last_value;
    const double total = value - account_.initial_value;
    account_.last_value = value;
    done_ = t_ + 1 == prices_.size();

    StepResult r;
    r.observation = observe();
    r.reward = daily / account_.initial_value;
    r.done = done_;
    r.record = {t_, price, action_level, account_.shares, account_.cash, value, daily, total};
    return r;
}

void write_step_log_header(std::ostream& out) {
    out << "t,price,action,shares,cash,value,daily_profit,total_profit\n";
}

void write_step_log_row(std::ostream& out, const StepRecord& r) {
    out << r.t << ',' << fmt_double(r.price) << ',' << r.action << ',' << fmt_double(r.shares) << ','
        << fmt_double(r.cash) << ',' << fmt_double(r.value) << ',' << fmt_double(r.daily_profit) << ','
        << fmt_double(r.total_profit) << '\n';
}

}  // namespace dqnlab::trading
