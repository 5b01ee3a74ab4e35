#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "barriernet/evaluation.hpp"
#include "barriernet/market_data.hpp"

namespace barriernet {

struct BacktestConfig {
    double initial_cash = 10000.0;     // US profile; the KR profile uses 10,000,000
    double entry_ratio = 0.1;          // fraction of ORIGINAL cash per entry
    double commission_rate = 0.00015;  // charged on entry and exit notionals
    double tax_rate = 0.0020;          // on sale proceeds, only for profitable trades
    double take_profit_pct = 0.10;
    double stop_loss_pct = 0.10;
    int horizon_days = 5;
    bool sidecut = true;               // sell at the close of day D if no barrier touched
    double threshold = 0.0;
    double risk_free_rate = 0.0;       // annualized
    std::uint64_t seed = 0;
    int random_runs = 5;

    void validate() const;
};

struct Signal {
    std::string ticker;
    double confidence = 0;
};

// Per-date buy lists, each ordered by confidence descending then ticker.
using SignalBook = std::map<Date, std::vector<Signal>>;

// Rise predictions (class 2) at or above the confidence threshold.
SignalBook generate_signals(const std::vector<PredictionRecord>& predictions, double threshold);

struct Position {
    std::string ticker;
    Date entry_date;
    double entry_price = 0;  // close of the signal day
    long shares = 0;
    double up_barrier = 0;
    double down_barrier = 0;
    int days_held = 0;
    double entry_commission = 0;
};

struct TradeRecord {
    enum class ExitReason { TakeProfit, StopLoss, Sidecut, UncertainLoss, EndOfData };

    std::string ticker;
    Date entry_date;
    Date exit_date;
    double entry_price = 0;
    double exit_price = 0;
    long shares = 0;
    double gross_pnl = 0;
    double fees = 0;  // entry + exit commissions
    double tax = 0;
    double net_pnl = 0;
    ExitReason exit_reason = ExitReason::EndOfData;
};

const char* to_string(TradeRecord::ExitReason r);

struct EquityPoint {
    Date date;
    double equity = 0;
};

struct BacktestReport {
    std::string name;
    double total_return = 0;
    double total_trades = 0;  // fractional when averaged over random runs
    double win_rate = 0;
    double win_loss_ratio = 0;  // +inf when no losing barrier trades
    double max_drawdown = 0;
    double sharpe_ratio = 0;  // NaN when return variance is zero
    std::vector<EquityPoint> equity_curve;
    double frozen_events = 0;    // open position days with a missing bar
    double skipped_signals = 0;  // signals not entered (cash, size, duplicates)
};

// Exit decision for one position on its next bar, in priority order: both
// barriers on the same bar (pessimistic fill at the down barrier), take
// profit, stop loss, sidecut at the horizon, forced close on the final bar.
std::optional<std::pair<double, TradeRecord::ExitReason>> exit_check(const Position& pos,
                                                                     const Bar& bar,
                                                                     const BacktestConfig& cfg,
                                                                     bool final_bar);

struct SimulationResult {
    BacktestReport report;
    std::vector<TradeRecord> trades;
};

// Event-driven replay over the union calendar of `prices` within `range`.
// Each day processes exits first, then entries in signal order. Sizing is
// floor(entry_ratio * initial_cash / close) shares; entries that would drive
// cash negative, size to zero shares, or duplicate an open ticker are skipped.
SimulationResult simulate(const SignalBook& signals, const std::vector<OhlcvSeries>& prices,
                          const BacktestConfig& cfg, const DateRange& range,
                          std::string name = "backtest");

// Aggregate metrics from an equity curve and trade list. Win/loss ratio only
// counts barrier exits (take profit / stop loss / uncertain); sidecut and
// end-of-data exits are excluded.
BacktestReport compute_metrics(const std::vector<EquityPoint>& equity_curve,
                               const std::vector<TradeRecord>& trades, double risk_free_rate,
                               double initial_cash);

// Annualized Sharpe over daily returns: mean excess / stdev(returns) * sqrt(252).
// The risk-free rate is annualized and applied as rate/252 per day.
// Returns NaN when fewer than two returns or zero variance.
double sharpe_ratio(const std::vector<double>& daily_returns, double risk_free_rate);

double max_drawdown(const std::vector<double>& equity, double initial_value);

enum class RandomPickMode {
    MatchModelCounts,  // mirror the per-day signal counts of the model book
    FixedCount,        // a constant number of picks per trading day
};

// Control baseline: random tickers instead of model signals, identical
// simulation rules, averaged over `cfg.random_runs` seeded runs.
BacktestReport random_baseline(const std::vector<OhlcvSeries>& universe,
                               const SignalBook& model_signals, const BacktestConfig& cfg,
                               const DateRange& range,
                               RandomPickMode mode = RandomPickMode::MatchModelCounts,
                               int fixed_count = 1, std::string name = "random_backtest");

}  // namespace barriernet
