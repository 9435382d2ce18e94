#include "dqnlab/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dqnlab/agent.hpp"
#include "dqnlab/errors.hpp"
#include "dqnlab/format.hpp"
#include "dqnlab/pipeline.hpp"
#include "json.hpp"

namespace dqnlab::backtest {
namespace {

struct Line {
    std::string label;
    std::string color;
    std::vector<double> ys;
};

// Minimal static line chart: shared x axis, min/max y ticks, legend.
std::string line_chart(const std::string& title, const std::string& y_label, const std::vector<double>& xs,
                       const std::vector<Line>& lines) {
    constexpr double kWidth = 800, kHeight = 400, kLeft = 80, kRight = 20, kTop = 40, kBottom = 50;
    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const Line& l : lines)
        for (double y : l.ys) {
            if (first) ymin = ymax = y, first = false;
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
    const double xmin = xs.empty() ? 0.0 : xs.front();
    const double xmax = xs.empty() || xs.back() == xmin ? xmin + 1.0 : xs.back();
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight); };
    auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * (kHeight - kTop - kBottom); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << title << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n";
    auto text = [&](double x, double y, const char* anchor, const std::string& s) {
        svg << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s << "</text>\n";
    };
    text(kLeft - 6, py(ymax) + 4, "end", fmt_double(ymax));
    text(kLeft - 6, py(ymin) + 4, "end", fmt_double(ymin));
    text(px(xmin), kHeight - kBottom + 16, "middle", fmt_double(xmin));
    text(px(xmax), kHeight - kBottom + 16, "middle", fmt_double(xmax));
    text(kWidth / 2, kHeight - 10, "middle", "t");
    svg << "<text x=\"16\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 16 " << kHeight / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << y_label << "</text>\n";

    double legend_y = kTop + 4;
    for (const Line& l : lines) {
        svg << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < l.ys.size() && i < xs.size(); ++i)
            svg << (i ? " " : "") << px(xs[i]) << ',' << py(l.ys[i]);
        svg << "\"/>\n";
        svg << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << legend_y << "\" width=\"12\" height=\"3\" fill=\""
            << l.color << "\"/>\n";
        text(kWidth - kRight - 132, legend_y + 5, "start", l.label);
        legend_y += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

double exposure(const trading::StepRecord& r) { return r.value > 0.0 ? r.shares * r.price / r.value : 0.0; }

nlohmann::ordered_json summary_object(const Summary& s) {
    return {{"initial_value", s.initial_value},   {"final_value", s.final_value},
            {"total_profit_ratio", s.total_profit_ratio}, {"max_drawdown", s.max_drawdown},
            {"mean_exposure", s.mean_exposure},   {"trade_count", s.trade_count}};
}

}  // namespace

BacktestReport run_strategy(const market::MarketSeries& series, const trading::TradingConfig& cfg,
                            const Strategy& strategy) {
    series.validate();
    trading::TradingEnv env(cfg, series);
    BacktestReport report;
    report.initial_value = env.account().initial_value;
    report.action_levels = cfg.action_levels;
    report.records.reserve(env.horizon());
    while (!env.done()) report.records.push_back(env.step(strategy(env)).record);
    report.summary = summarize(report);
    return report;
}

BacktestReport run_backtest(const nn::QNetwork& policy, const market::MarketSeries& series,
                            const trading::TradingConfig& cfg) {
    cfg.validate();
    pipeline::check_compatible(policy, trading::kObservationSize, cfg.action_levels);
    return run_strategy(series, cfg, [&](const trading::TradingEnv& env) {
        return greedy_action(policy, env.current_features());
    });
}

BacktestReport buy_and_hold(const market::MarketSeries& series, const trading::TradingConfig& cfg) {
    return run_strategy(series, cfg, [&](const trading::TradingEnv& env) {
        return env.time_index() == 0 ? cfg.action_levels - 1 : trading::hold_level(cfg.action_levels);
    });
}

BacktestReport all_hold(const market::MarketSeries& series, const trading::TradingConfig& cfg) {
    return run_strategy(series, cfg,
                        [&](const trading::TradingEnv&) { return trading::hold_level(cfg.action_levels); });
}

Summary summarize(const BacktestReport& report) {
    if (report.records.empty()) throw DataError("summarize: report has no records");
    Summary s;
    s.initial_value = report.initial_value;
    s.final_value = report.records.back().value;
    s.total_profit_ratio = (s.final_value - s.initial_value) / s.initial_value;
    double peak = report.initial_value;
    double exposure_sum = 0.0;
    for (const trading::StepRecord& r : report.records) {
        peak = std::max(peak, r.value);
        if (peak > 0.0) s.max_drawdown = std::max(s.max_drawdown, (peak - r.value) / peak);
        exposure_sum += exposure(r);
        if (report.action_levels >= 2 && trading::decode_action(r.action, report.action_levels) != 0.0)
            ++s.trade_count;
    }
    s.mean_exposure = exposure_sum / static_cast<double>(report.records.size());
    return s;
}

std::string summary_json(const BacktestReport& policy, const BacktestReport& baseline) {
    nlohmann::ordered_json doc;
    doc["policy"] = summary_object(policy.summary);
    doc["baseline"] = summary_object(baseline.summary);
    return doc.dump(2) + "\n";
}

void emit_report(const BacktestReport& policy, const BacktestReport& baseline,
                 const std::filesystem::path& out_dir) {
    if (policy.records.size() != baseline.records.size())
        throw AlignmentError("emit_report: policy has " + std::to_string(policy.records.size()) +
                             " records, baseline " + std::to_string(baseline.records.size()));
    for (std::size_t i = 0; i < policy.records.size(); ++i)
        if (policy.records[i].t != baseline.records[i].t || policy.records[i].price != baseline.records[i].price)
            throw AlignmentError("emit_report: policy and baseline diverge at record " + std::to_string(i));

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create report directory " + out_dir.string() + ": " + ec.message());

    std::ostringstream csv;
    csv << "t,price,policy_action,policy_shares,policy_cash,policy_value,baseline_value\n";
    for (std::size_t i = 0; i < policy.records.size(); ++i) {
        const auto& p = policy.records[i];
        csv << p.t << ',' << fmt_double(p.price) << ',' << p.action << ',' << fmt_double(p.shares) << ','
            << fmt_double(p.cash) << ',' << fmt_double(p.value) << ',' << fmt_double(baseline.records[i].value)
            << '\n';
    }
    write_file(out_dir / "backtest.csv", csv.str());
    write_file(out_dir / "summary.json", summary_json(policy, baseline));

    std::vector<double> xs;
    Line policy_profit{"policy", "#1f77b4", {}}, baseline_profit{"buy and hold", "#ff7f0e", {}};
    Line policy_pos{"policy", "#1f77b4", {}}, baseline_pos{"buy and hold", "#ff7f0e", {}};
    for (std::size_t i = 0; i < policy.records.size(); ++i) {
        xs.push_back(static_cast<double>(policy.records[i].t));
        policy_profit.ys.push_back(policy.records[i].total_profit / policy.initial_value);
        baseline_profit.ys.push_back(baseline.records[i].total_profit / baseline.initial_value);
        policy_pos.ys.push_back(exposure(policy.records[i]));
        baseline_pos.ys.push_back(exposure(baseline.records[i]));
    }
    write_file(out_dir / "profit.svg",
               line_chart("Total profit vs time", "total profit / initial value", xs, {policy_profit, baseline_profit}));
    write_file(out_dir / "position.svg",
               line_chart("Position vs time", "position value / account value", xs, {policy_pos, baseline_pos}));
}

}  // namespace dqnlab::backtest
