#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dqnlab::market {

// Ordered price history. `close` drives trading and marking; the other price
// columns are carried through when present.
struct MarketSeries {
    std::string symbol;
    std::vector<std::string> timestamps;
    std::vector<double> close;
    std::optional<std::vector<double>> open;
    std::optional<std::vector<double>> high;
    std::optional<std::vector<double>> low;
    std::optional<std::vector<double>> volume;

    std::size_t size() const { return close.size(); }

    // Throws DataError: length < 2, timestamp/price count mismatch,
    // non-increasing timestamps, nonpositive or non-finite close.
    void validate() const;

    bool operator==(const MarketSeries&) const = default;
};

// Header must name `date` and `close`; open/high/low/volume are optional and
// any column order is accepted. Errors carry 1-based line numbers.
MarketSeries load_csv(const std::string& path);
MarketSeries parse_csv(const std::string& text, const std::string& source = "<memory>");

// Writes date plus whichever price columns the series carries.
void write_csv(const MarketSeries& series, const std::string& path);
std::string to_csv(const MarketSeries& series);

struct GbmParams {
    double s0 = 100.0;
    double mu = 0.0;
    double sigma = 0.01;
    std::size_t steps = 252;

    void validate() const;  // throws ConfigError
};

// S[t+1] = S[t] * exp((mu - sigma^2 / 2) + sigma * Z[t]). `steps` prices in
// total, dated one calendar day apart from 2018-01-01.
MarketSeries gen_gbm(const GbmParams& p, std::uint64_t seed, std::string symbol = "SYN");

// Contiguous prefix/suffix at floor(N * train_fraction).
std::pair<MarketSeries, MarketSeries> split(const MarketSeries& series, double train_fraction);

// Calendar-day label `offset` days after 2018-01-01, e.g. "2018-01-03".
std::string synthetic_date(std::size_t offset);

}  // namespace dqnlab::market
