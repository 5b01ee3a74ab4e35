#include "barriernet/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "barriernet/errors.hpp"
#include "barriernet/synth.hpp"

namespace barriernet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void BacktestConfig::validate() const {
    if (!(initial_cash > 0)) throw ConfigError("backtest.initial_cash must be > 0");
    if (!(entry_ratio > 0 && entry_ratio <= 1)) throw ConfigError("backtest.entry_ratio must be in (0,1]");
    if (commission_rate < 0) throw ConfigError("backtest.commission_rate must be >= 0");
    if (tax_rate < 0) throw ConfigError("backtest.tax_rate must be >= 0");
    if (!(take_profit_pct > 0)) throw ConfigError("backtest.take_profit_pct must be > 0");
    if (!(stop_loss_pct > 0)) throw ConfigError("backtest.stop_loss_pct must be > 0");
    if (horizon_days < 1) throw ConfigError("backtest.horizon_days must be >= 1");
    if (threshold < 0 || threshold > 1) throw ConfigError("backtest.threshold must be in [0,1]");
    if (random_runs < 1) throw ConfigError("backtest.random_runs must be >= 1");
}

const char* to_string(TradeRecord::ExitReason r) {
    switch (r) {
        case TradeRecord::ExitReason::TakeProfit: return "take_profit";
        case TradeRecord::ExitReason::StopLoss: return "stop_loss";
        case TradeRecord::ExitReason::Sidecut: return "sidecut";
        case TradeRecord::ExitReason::UncertainLoss: return "uncertain_loss";
        case TradeRecord::ExitReason::EndOfData: return "end_of_data";
    }
    return "unknown";
}

SignalBook generate_signals(const std::vector<PredictionRecord>& predictions, double threshold) {
    SignalBook book;
    for (const auto& p : predictions) {
        if (p.predicted != kLabelRise || p.confidence < threshold) continue;
        book[p.date].push_back({p.ticker, p.confidence});
    }
    for (auto& [date, list] : book) {
        std::sort(list.begin(), list.end(), [](const Signal& a, const Signal& b) {
            if (a.confidence != b.confidence) return a.confidence > b.confidence;
            return a.ticker < b.ticker;
        });
    }
    return book;
}

std::optional<std::pair<double, TradeRecord::ExitReason>> exit_check(const Position& pos,
                                                                     const Bar& bar,
                                                                     const BacktestConfig& cfg,
                                                                     bool final_bar) {
    const bool hit_up = bar.high >= pos.up_barrier;
    const bool hit_down = bar.low <= pos.down_barrier;
    if (hit_up && hit_down) {
        // Both barriers inside one bar: the touch order is unknowable from
        // daily data; treat as a loss and fill at the down barrier.
        return std::pair{pos.down_barrier, TradeRecord::ExitReason::UncertainLoss};
    }
    if (hit_up) return std::pair{pos.up_barrier, TradeRecord::ExitReason::TakeProfit};
    if (hit_down) return std::pair{pos.down_barrier, TradeRecord::ExitReason::StopLoss};
    if (cfg.sidecut && pos.days_held >= cfg.horizon_days)
        return std::pair{bar.close, TradeRecord::ExitReason::Sidecut};
    if (final_bar) return std::pair{bar.close, TradeRecord::ExitReason::EndOfData};
    return std::nullopt;
}

namespace {

struct TickerData {
    const OhlcvSeries* series = nullptr;
    std::size_t last_in_range = OhlcvSeries::npos;  // index of the last bar <= range.end
};

struct Ledger {
    double cash = 0;
    double initial = 0;
    double realized_net = 0;

    // cash + sum(open entry notional + entry commission) must always equal
    // initial + realized net P&L.
    void check(const std::vector<Position>& open) const {
        double committed = 0;
        for (const auto& p : open)
            committed += double(p.shares) * p.entry_price + p.entry_commission;
        double drift = std::abs(cash + committed - initial - realized_net);
        if (drift > 1e-6)
            throw Error("backtest ledger identity violated by " + std::to_string(drift));
    }
};

}  // namespace

SimulationResult simulate(const SignalBook& signals, const std::vector<OhlcvSeries>& prices,
                          const BacktestConfig& cfg, const DateRange& range, std::string name) {
    cfg.validate();
    if (!range.valid()) throw ValidationError("simulate: empty date range");

    std::unordered_map<std::string, TickerData> data;
    std::vector<Date> calendar;
    for (const auto& s : prices) {
        TickerData td;
        td.series = &s;
        std::size_t hi = s.lower_bound(Date::from_serial(range.end.serial() + 1));
        td.last_in_range = hi == 0 ? OhlcvSeries::npos : hi - 1;
        data.emplace(s.ticker, td);
        for (std::size_t i = s.lower_bound(range.begin); i < hi; ++i) calendar.push_back(s.bars[i].date);
    }
    std::sort(calendar.begin(), calendar.end());
    calendar.erase(std::unique(calendar.begin(), calendar.end()), calendar.end());

    SimulationResult result;
    result.report.name = std::move(name);

    Ledger ledger;
    ledger.cash = cfg.initial_cash;
    ledger.initial = cfg.initial_cash;

    std::vector<Position> open;
    std::unordered_set<std::string> open_tickers;

    auto close_position = [&](std::size_t pos_idx, Date date, double exit_price,
                              TradeRecord::ExitReason reason) {
        const Position& pos = open[pos_idx];
        TradeRecord tr;
        tr.ticker = pos.ticker;
        tr.entry_date = pos.entry_date;
        tr.exit_date = date;
        tr.entry_price = pos.entry_price;
        tr.exit_price = exit_price;
        tr.shares = pos.shares;
        const double proceeds = double(pos.shares) * exit_price;
        const double exit_commission = proceeds * cfg.commission_rate;
        tr.gross_pnl = (exit_price - pos.entry_price) * double(pos.shares);
        tr.fees = pos.entry_commission + exit_commission;
        tr.tax = (tr.gross_pnl - tr.fees) > 0 ? proceeds * cfg.tax_rate : 0.0;
        tr.net_pnl = tr.gross_pnl - tr.fees - tr.tax;
        tr.exit_reason = reason;

        ledger.cash += proceeds - exit_commission - tr.tax;
        ledger.realized_net += tr.net_pnl;
        open_tickers.erase(pos.ticker);
        result.trades.push_back(std::move(tr));
    };

    for (Date today : calendar) {
        // 1) Exits, in entry order. Entry-day bars are never exit candidates.
        for (std::size_t i = 0; i < open.size();) {
            Position& pos = open[i];
            if (today <= pos.entry_date) {
                ++i;
                continue;
            }
            const TickerData& td = data.at(pos.ticker);
            std::size_t idx = td.series->index_of(today);
            if (idx == OhlcvSeries::npos) {
                // Bar missing while a position is open: freeze until data resumes.
                result.report.frozen_events += 1;
                ++i;
                continue;
            }
            pos.days_held += 1;
            bool final_bar = idx == td.last_in_range;
            auto exit = exit_check(pos, td.series->bars[idx], cfg, final_bar);
            if (exit) {
                close_position(i, today, exit->first, exit->second);
                open.erase(open.begin() + std::ptrdiff_t(i));
            } else {
                ++i;
            }
        }

        // 2) Entries, highest confidence first.
        if (auto it = signals.find(today); it != signals.end()) {
            for (const Signal& sig : it->second) {
                if (open_tickers.count(sig.ticker)) {
                    result.report.skipped_signals += 1;
                    continue;
                }
                auto dit = data.find(sig.ticker);
                std::size_t idx =
                    dit == data.end() ? OhlcvSeries::npos : dit->second.series->index_of(today);
                if (idx == OhlcvSeries::npos) {
                    result.report.skipped_signals += 1;
                    continue;
                }
                const double close = dit->second.series->bars[idx].close;
                const long shares = long(std::floor(cfg.entry_ratio * cfg.initial_cash / close));
                if (shares < 1) {
                    result.report.skipped_signals += 1;
                    continue;
                }
                const double notional = double(shares) * close;
                const double commission = notional * cfg.commission_rate;
                if (ledger.cash - notional - commission < 0) {
                    result.report.skipped_signals += 1;
                    continue;
                }
                Position pos;
                pos.ticker = sig.ticker;
                pos.entry_date = today;
                pos.entry_price = close;
                pos.shares = shares;
                pos.up_barrier = close * (1.0 + cfg.take_profit_pct);
                pos.down_barrier = close * (1.0 - cfg.stop_loss_pct);
                pos.entry_commission = commission;
                ledger.cash -= notional + commission;
                open_tickers.insert(pos.ticker);
                open.push_back(std::move(pos));
            }
        }

        // 3) Mark to market at closes (last known close for frozen tickers).
        double held = 0;
        for (const auto& pos : open) {
            const OhlcvSeries& s = *data.at(pos.ticker).series;
            std::size_t after = s.lower_bound(Date::from_serial(today.serial() + 1));
            held += double(pos.shares) * s.bars[after - 1].close;  // after >= 1: entry bar exists
        }
        result.report.equity_curve.push_back({today, ledger.cash + held});

        ledger.check(open);
    }

    // Positions entered on their ticker's final in-range bar have no later bar
    // to exit on; liquidate them at that close.
    for (std::size_t i = open.size(); i-- > 0;) {
        const TickerData& td = data.at(open[i].ticker);
        const Bar& last = td.series->bars[td.last_in_range];
        close_position(i, last.date, last.close, TradeRecord::ExitReason::EndOfData);
        open.erase(open.begin() + std::ptrdiff_t(i));
    }
    if (!result.report.equity_curve.empty()) result.report.equity_curve.back().equity = ledger.cash;
    ledger.check(open);

    std::string rname = result.report.name;
    double frozen = result.report.frozen_events, skipped = result.report.skipped_signals;
    auto curve = std::move(result.report.equity_curve);
    result.report = compute_metrics(curve, result.trades, cfg.risk_free_rate, cfg.initial_cash);
    result.report.name = std::move(rname);
    result.report.frozen_events = frozen;
    result.report.skipped_signals = skipped;
    return result;
}

double sharpe_ratio(const std::vector<double>& daily_returns, double risk_free_rate) {
    const std::size_t n = daily_returns.size();
    if (n < 2) return kNaN;
    double mean = 0;
    for (double r : daily_returns) mean += r;
    mean /= double(n);
    double var = 0;
    for (double r : daily_returns) var += (r - mean) * (r - mean);
    var /= double(n - 1);
    if (var == 0) return kNaN;
    const double excess = mean - risk_free_rate / 252.0;
    return excess / std::sqrt(var) * std::sqrt(252.0);
}

double max_drawdown(const std::vector<double>& equity, double initial_value) {
    double peak = initial_value;
    double worst = 0;
    for (double e : equity) {
        peak = std::max(peak, e);
        if (peak > 0) worst = std::max(worst, (peak - e) / peak);
    }
    return worst;
}

BacktestReport compute_metrics(const std::vector<EquityPoint>& equity_curve,
                               const std::vector<TradeRecord>& trades, double risk_free_rate,
                               double initial_cash) {
    if (equity_curve.empty()) throw ValidationError("compute_metrics: empty equity curve");

    BacktestReport rep;
    rep.equity_curve = equity_curve;
    rep.total_return = equity_curve.back().equity / initial_cash - 1.0;
    rep.total_trades = double(trades.size());

    std::size_t wins = 0, barrier_wins = 0, barrier_losses = 0;
    for (const auto& t : trades) {
        if (t.net_pnl > 0) ++wins;
        const bool barrier_exit = t.exit_reason == TradeRecord::ExitReason::TakeProfit ||
                                  t.exit_reason == TradeRecord::ExitReason::StopLoss ||
                                  t.exit_reason == TradeRecord::ExitReason::UncertainLoss;
        if (!barrier_exit) continue;
        if (t.net_pnl > 0) ++barrier_wins;
        else if (t.net_pnl < 0) ++barrier_losses;
    }
    rep.win_rate = trades.empty() ? kNaN : double(wins) / double(trades.size());
    if (barrier_losses > 0)
        rep.win_loss_ratio = double(barrier_wins) / double(barrier_losses);
    else
        rep.win_loss_ratio = barrier_wins > 0 ? kInf : kNaN;

    std::vector<double> values;
    values.reserve(equity_curve.size());
    for (const auto& p : equity_curve) values.push_back(p.equity);
    rep.max_drawdown = max_drawdown(values, initial_cash);

    std::vector<double> returns;
    returns.reserve(values.size());
    double prev = initial_cash;
    for (double e : values) {
        returns.push_back(e / prev - 1.0);
        prev = e;
    }
    rep.sharpe_ratio = sharpe_ratio(returns, risk_free_rate);
    return rep;
}

BacktestReport random_baseline(const std::vector<OhlcvSeries>& universe,
                               const SignalBook& model_signals, const BacktestConfig& cfg,
                               const DateRange& range, RandomPickMode mode, int fixed_count,
                               std::string name) {
    cfg.validate();
    if (universe.empty()) throw ValidationError("random_baseline: empty universe");
    if (mode == RandomPickMode::FixedCount && fixed_count < 1)
        throw ConfigError("random_baseline: fixed_count must be >= 1");

    // Tickers listed per date, in universe order; picks are drawn from these.
    std::map<Date, std::vector<std::size_t>> listed;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        const auto& s = universe[i];
        std::size_t hi = s.lower_bound(Date::from_serial(range.end.serial() + 1));
        for (std::size_t b = s.lower_bound(range.begin); b < hi; ++b)
            listed[s.bars[b].date].push_back(i);
    }

    auto wanted = [&](Date d) -> std::size_t {
        if (mode == RandomPickMode::FixedCount) return std::size_t(fixed_count);
        auto it = model_signals.find(d);
        return it == model_signals.end() ? 0 : it->second.size();
    };

    std::vector<BacktestReport> runs;
    for (int run = 0; run < cfg.random_runs; ++run) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0x72616e64ULL + std::uint64_t(run)));
        SignalBook book;
        for (const auto& [date, tickers] : listed) {
            std::size_t k = std::min(wanted(date), tickers.size());
            if (k == 0) continue;
            // Partial Fisher-Yates: the first k slots become the picks.
            std::vector<std::size_t> pool = tickers;
            std::vector<Signal>& list = book[date];
            for (std::size_t j = 0; j < k; ++j) {
                std::size_t pick = j + std::size_t(rng() % (pool.size() - j));
                std::swap(pool[j], pool[pick]);
                list.push_back({universe[pool[j]].ticker, 1.0});
            }
        }
        runs.push_back(simulate(book, universe, cfg, range, name).report);
    }

    // Field-wise arithmetic mean over runs (inf and nan propagate as markers).
    BacktestReport avg;
    avg.name = std::move(name);
    const double r = double(runs.size());
    for (const auto& rep : runs) {
        avg.total_return += rep.total_return / r;
        avg.total_trades += rep.total_trades / r;
        avg.win_rate += rep.win_rate / r;
        avg.win_loss_ratio += rep.win_loss_ratio / r;
        avg.max_drawdown += rep.max_drawdown / r;
        avg.sharpe_ratio += rep.sharpe_ratio / r;
        avg.frozen_events += rep.frozen_events / r;
        avg.skipped_signals += rep.skipped_signals / r;
    }
    avg.equity_curve = runs.front().equity_curve;
    for (std::size_t i = 0; i < avg.equity_curve.size(); ++i) {
        double sum = 0;
        for (const auto& rep : runs) sum += rep.equity_curve[i].equity;
        avg.equity_curve[i].equity = sum / r;
    }
    return avg;
}

}  // namespace barriernet
