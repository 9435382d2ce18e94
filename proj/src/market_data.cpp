#include "dqnlab/market_data.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

#include "dqnlab/errors.hpp"
#include "dqnlab/format.hpp"
#include "dqnlab/random.hpp"

namespace dqnlab::market {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
        out.push_back(f);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line,
                    std::string_view column) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw DataError(source + ":" + std::to_string(line) + ": cannot parse " + std::string(column) +
                        " value \"" + std::string(field) + "\"");
    return v;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

}  // namespace

void MarketSeries::validate() const {
    if (close.size() < 2)
        throw DataError("series " + symbol + ": need at least 2 prices, have " + std::to_string(close.size()));
    if (timestamps.size() != close.size())
        throw DataError("series " + symbol + ": " + std::to_string(timestamps.size()) + " timestamps for " +
                        std::to_string(close.size()) + " prices");
    for (const auto* col : {&open, &high, &low, &volume})
        if (*col && (*col)->size() != close.size())
            throw DataError("series " + symbol + ": optional column length differs from close");
    for (std::size_t i = 0; i < close.size(); ++i) {
        if (!(close[i] > 0.0) || !std::isfinite(close[i]))
            throw DataError("series " + symbol + ": close price at index " + std::to_string(i) +
                            " must be positive and finite");
        if (i > 0 && !(timestamps[i - 1] < timestamps[i]))
            throw DataError("series " + symbol + ": timestamps not strictly increasing at index " +
                            std::to_string(i));
    }
}

MarketSeries parse_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        for (std::string_view f : split_fields(line)) header.push_back(lowercase(f));
        break;
    }
    if (header.empty()) throw DataError(source + ": empty file, expected a header with date and close");

    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    const auto date_col = column("date");
    const auto close_col = column("close");
    if (!date_col) throw DataError(source + ":" + std::to_string(line_no) + ": missing required column \"date\"");
    if (!close_col) throw DataError(source + ":" + std::to_string(line_no) + ": missing required column \"close\"");
    const auto open_col = column("open");
    const auto high_col = column("high");
    const auto low_col = column("low");
    const auto volume_col = column("volume");

    MarketSeries s;
    s.symbol = source;
    if (open_col) s.open.emplace();
    if (high_col) s.high.emplace();
    if (low_col) s.low.emplace();
    if (volume_col) s.volume.emplace();

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        std::string date(fields[*date_col]);
        if (date.empty()) throw DataError(source + ":" + std::to_string(line_no) + ": empty date");
        const double close = parse_number(fields[*close_col], source, line_no, "close");
        if (!(close > 0.0) || !std::isfinite(close))
            throw DataError(source + ":" + std::to_string(line_no) + ": close price must be positive, got " +
                            std::string(fields[*close_col]));
        if (!s.timestamps.empty() && !(s.timestamps.back() < date))
            throw DataError(source + ":" + std::to_string(line_no) + ": date " + date +
                            " does not follow " + s.timestamps.back() + " (dates must strictly increase)");
        s.timestamps.push_back(std::move(date));
        s.close.push_back(close);
        if (open_col) s.open->push_back(parse_number(fields[*open_col], source, line_no, "open"));
        if (high_col) s.high->push_back(parse_number(fields[*high_col], source, line_no, "high"));
        if (low_col) s.low->push_back(parse_number(fields[*low_col], source, line_no, "low"));
        if (volume_col) s.volume->push_back(parse_number(fields[*volume_col], source, line_no, "volume"));
    }
    if (s.close.size() < 2)
        throw DataError(source + ": need at least 2 data rows, found " + std::to_string(s.close.size()));
    return s;
}

MarketSeries load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open market data " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

std::string to_csv(const MarketSeries& s) {
    std::ostringstream out;
    out << "date";
    if (s.open) out << ",open";
    if (s.high) out << ",high";
    if (s.low) out << ",low";
    out << ",close";
    if (s.volume) out << ",volume";
    out << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << s.timestamps[i];
        if (s.open) out << ',' << fmt_double((*s.open)[i]);
        if (s.high) out << ',' << fmt_double((*s.high)[i]);
        if (s.low) out << ',' << fmt_double((*s.low)[i]);
        out << ',' << fmt_double(s.close[i]);
        if (s.volume) out << ',' << fmt_double((*s.volume)[i]);
        out << '\n';
    }
    return out.str();
}

void write_csv(const MarketSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << to_csv(series);
    if (!out) throw IoError("failed writing " + path);
}

void GbmParams::validate() const {
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw ConfigError("s0", "must be > 0");
    if (!std::isfinite(mu)) throw ConfigError("mu", "must be finite");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma", "must be >= 0");
    if (steps < 2) throw ConfigError("steps", "must be >= 2");
}

std::string synthetic_date(std::size_t offset) {
    using namespace std::chrono;
    const sys_days day = sys_days{year{2018} / January / 1} + days{static_cast<long>(offset)};
    const year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

MarketSeries gen_gbm(const GbmParams& p, std::uint64_t seed, std::string symbol) {
    p.validate();
    Rng rng = make_stream(seed, 0);
    std::normal_distribution<double> z(0.0, 1.0);
    MarketSeries s;
    s.symbol = std::move(symbol);
    s.close.reserve(p.steps);
    s.timestamps.reserve(p.steps);
    const double drift = p.mu - 0.5 * p.sigma * p.sigma;
    double price = p.s0;
    for (std::size_t t = 0; t < p.steps; ++t) {
        if (t > 0) price *= std::exp(drift + p.sigma * z(rng));
        s.close.push_back(price);
        s.timestamps.push_back(synthetic_date(t));
    }
    s.validate();
    return s;
}

std::pair<MarketSeries, MarketSeries> split(const MarketSeries& series, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw SplitError("split: train fraction must lie in (0, 1)");
    const std::size_t n = series.size();
    const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
    if (cut < 2 || n - cut < 2)
        throw SplitError("split: " + std::to_string(n) + " points at fraction " + fmt_double(train_fraction) +
                         " gives halves of " + std::to_string(cut) + " and " + std::to_string(n - cut) +
                         "; both need at least 2");
    auto slice = [&](std::size_t from, std::size_t to) {
        MarketSeries out;
        out.symbol = series.symbol;
        out.timestamps.assign(series.timestamps.begin() + from, series.timestamps.begin() + to);
        out.close.assign(series.close.begin() + from, series.close.begin() + to);
        for (auto [src, dst] : {std::pair{&series.open, &out.open}, std::pair{&series.high, &out.high},
                                std::pair{&series.low, &out.low}, std::pair{&series.volume, &out.volume}})
            if (*src) dst->emplace((*src)->begin() + from, (*src)->begin() + to);
        return out;
    };
    return {slice(0, cut), slice(cut, n)};
}

}  // namespace dqnlab::market
