// Standalone gate: ten checks over labeling, the network, evaluation, and the
// backtest, each validated against an independent oracle or hand-worked
// numbers. One PASS/FAIL line per check; nonzero exit if any fails. Check 9
// drives the real pipeline binary, whose path arrives via BARRIERNET_CLI_PATH.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "barriernet/backtest.hpp"
#include "barriernet/errors.hpp"
#include "barriernet/evaluation.hpp"
#include "barriernet/labeling.hpp"
#include "barriernet/resnet.hpp"
#include "barriernet/synth.hpp"

namespace fs = std::filesystem;
using namespace barriernet;

namespace {

struct Outcome {
    bool ok = false;
    std::string note;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

constexpr std::array<int, 7> kHorizons = {1, 3, 5, 10, 15, 20, 30};
constexpr std::array<double, 2> kPcts = {0.10, 0.20};

// Literal day-by-day scan over the horizon; the unit under test compares
// first-touch offsets instead.
LabelResult day_scan(const OhlcvSeries& s, std::size_t t, const LabelSpec& spec) {
    const double up = s.bars[t].close * (1.0 + spec.barrier_pct);
    const double down = s.bars[t].close * (1.0 - spec.barrier_pct);
    for (int k = 1; k <= spec.horizon_days; ++k) {
        const Bar& b = s.bars[t + std::size_t(k)];
        const bool hi = b.high >= up;
        const bool lo = b.low <= down;
        if (hi && lo) return {kLabelRise, true};
        if (hi) return {kLabelRise, false};
        if (lo) return {kLabelFall, false};
    }
    return {kLabelSide, false};
}

Outcome check_labeling_oracle() {
    const std::size_t series_count = 10000;
    std::size_t agreements = 0;
    for (std::uint64_t seed = 0; seed < series_count; ++seed) {
        auto s = generate_series("ORC", 40, seed);
        for (int D : kHorizons) {
            for (double pct : kPcts) {
                const LabelSpec spec{D, pct};
                for (std::size_t t : {std::size_t{0}, std::size_t{5}}) {
                    auto got = assign_label(s, t, spec);
                    auto want = day_scan(s, t, spec);
                    if (got.label != want.label || got.uncertain != want.uncertain)
                        return {false, "disagrees at seed " + std::to_string(seed) + " D=" +
                                           std::to_string(D) + " pct=" + fmt(pct) + " t=" +
                                           std::to_string(t)};
                    ++agreements;
                }
            }
        }
    }
    return {agreements >= 10000,
            std::to_string(series_count) + " series, " + std::to_string(agreements) + " agreements"};
}

Outcome check_side_trend() {
    SynthConfig sc;
    sc.tickers = 10;
    sc.days = 1100;
    sc.seed = 42;
    auto universe = generate_universe(sc);

    std::ostringstream note;
    for (double pct : kPcts) {
        double prev = 1.0 + 1e-12;
        double first = 0, last = 0;
        std::size_t total = 0;
        for (int D : kHorizons) {
            const LabelSpec spec{D, pct};
            std::size_t side = 0;
            total = 0;
            // Only indices eligible for every horizon, so the sets nest.
            for (const auto& s : universe)
                for (std::size_t t = 0; t + std::size_t(kHorizons.back()) < s.size() - 1; ++t) {
                    if (assign_label(s, t, spec).label == kLabelSide) ++side;
                    ++total;
                }
            const double prop = double(side) / double(total);
            if (total < 10000)
                return {false, "only " + std::to_string(total) + " samples per horizon"};
            if (prop > prev)
                return {false, "side proportion rose to " + fmt(prop) + " at D=" +
                                   std::to_string(D) + " pct=" + fmt(pct)};
            prev = prop;
            if (D == kHorizons.front()) first = prop;
            last = prop;
        }
        if (pct != kPcts.front()) note << "; ";
        note << "pct=" << fmt(pct) << ": " << fmt(first) << " -> " << fmt(last) << " over "
             << total << " samples";
    }
    return {true, note.str()};
}

Tensor<double> random_tensor(int n, int c, int len, std::uint64_t seed) {
    Tensor<double> t(n, c, len);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (auto& x : t.v) x = dist(rng);
    return t;
}

Outcome check_gradients() {
    NetworkConfig cfg;
    cfg.blocks = 2;
    cfg.channels = 4;
    cfg.window = 50;
    auto net = Network<double>::initialize(cfg, 11);
    Tensor<double> batch = random_tensor(4, 5, 50, 23);
    const std::vector<int> labels = {0, 1, 2, 1};
    const std::array<double, 3> weights = {1.0, 0.5, 1.5};

    auto loss_now = [&]() {
        auto cache = forward(net, batch, Mode::Train);
        return weighted_cross_entropy(cache.probs, labels, weights);
    };

    auto cache = forward(net, batch, Mode::Train);
    Network<double> grads = backward(net, cache, labels, weights);

    auto prefs = net.params();
    auto grefs = grads.params();
    const double h = 1e-5;
    std::size_t probes = 0;
    double worst = 0;
    std::string worst_name;
    for (std::size_t p = 0; p < prefs.size(); ++p) {
        auto& theta = *prefs[p].values;
        const auto& g = *grefs[p].values;
        const std::size_t stride = std::max<std::size_t>(1, theta.size() / 5);
        for (std::size_t i = 0; i < theta.size(); i += stride) {
            const double keep = theta[i];
            theta[i] = keep + h;
            const double up = loss_now();
            theta[i] = keep - h;
            const double down = loss_now();
            theta[i] = keep;
            const double fd = (up - down) / (2.0 * h);
            // The 1e-4 floor keeps finite-difference noise from dominating
            // when a gradient is essentially zero.
            const double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-4});
            if (rel > worst) {
                worst = rel;
                worst_name = prefs[p].name;
            }
            ++probes;
        }
    }
    return {worst <= 1e-3, std::to_string(prefs.size()) + " tensors, " + std::to_string(probes) +
                               " probes, worst rel err " + fmt(worst) + " (" + worst_name + ")"};
}

Outcome check_overfit() {
    NetworkConfig arch;
    arch.blocks = 2;
    arch.channels = 4;
    arch.window = 50;

    // Class-separable by construction: global average pooling reduces each
    // channel to its mean, and the mean carries the label.
    std::mt19937_64 rng(404);
    std::normal_distribution<double> noise(0.0, 0.25);
    std::vector<LabeledSample> data;
    for (int i = 0; i < 64; ++i) {
        LabeledSample s;
        s.ticker = "OVF";
        s.decision_date = Date(2020, 1, 1);
        s.label = i % 3;
        s.window = FeatureWindow(arch.window);
        const double shift = double(s.label - 1);
        for (double& v : s.window.data()) v = shift + noise(rng);
        data.push_back(std::move(s));
    }

    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 16;
    tc.seed = 7;
    auto result = train<double>(data, arch, tc);

    double best = 0;
    int best_epoch = 0;
    for (const auto& e : result.history)
        if (e.accuracy > best) {
            best = e.accuracy;
            best_epoch = e.epoch;
        }
    return {best >= 0.99,
            "best train accuracy " + fmt(best) + " at epoch " + std::to_string(best_epoch)};
}

Outcome check_forward_invariants() {
    NetworkConfig cfg;  // release-size defaults: 5 blocks, 12 channels, window 600
    const int nets = 10, rows = 100;
    double worst_sum = 0;
    std::size_t passes = 0;
    for (int n = 0; n < nets; ++n) {
        auto net = Network<double>::initialize(cfg, 100 + std::uint64_t(n));
        Tensor<double> batch = random_tensor(rows, cfg.in_channels, cfg.window, 500 + n);
        auto cache = forward(net, batch, Mode::Eval);
        for (int len : cache.conv_lengths)
            if (len != cfg.window)
                return {false, "a conv layer produced length " + std::to_string(len)};
        for (int r = 0; r < rows; ++r) {
            auto p = cache.probabilities(r);
            worst_sum = std::max(worst_sum, std::abs(p.p0 + p.p1 + p.p2 - 1.0));
            if (p.p0 < 0 || p.p1 < 0 || p.p2 < 0) return {false, "negative probability"};
            ++passes;
        }
        if (n == 0) {
            // Eval mode must not couple rows: re-run alone, bit for bit.
            for (int r = 0; r < 10; ++r) {
                Tensor<double> one(1, cfg.in_channels, cfg.window);
                for (int c = 0; c < cfg.in_channels; ++c)
                    for (int t = 0; t < cfg.window; ++t) one.at(0, c, t) = batch.at(r, c, t);
                auto single = forward(net, one, Mode::Eval);
                auto a = cache.probabilities(r);
                auto b = single.probabilities(0);
                if (a.p0 != b.p0 || a.p1 != b.p1 || a.p2 != b.p2)
                    return {false, "row " + std::to_string(r) + " differs when run alone"};
            }
        }
    }
    if (passes != std::size_t(nets) * rows)
        return {false, "expected 1000 passes, got " + std::to_string(passes)};
    return {worst_sum <= 1e-6, "1000 rows, worst |sum(p)-1| " + fmt(worst_sum)};
}

PredictionRecord rec(int pred, int truth, double conf) {
    const double rest = (1.0 - conf) / 2.0;
    ClassProbs p{rest, rest, rest};
    if (pred == 0) p.p0 = conf;
    if (pred == 1) p.p1 = conf;
    if (pred == 2) p.p2 = conf;
    return PredictionRecord::make("T", Date(2021, 3, 1), p, truth);
}

Outcome check_threshold_metrics() {
    // Class 2: tp 3, fp 1, fn 2. Confidences vary so the sweep thins out.
    const std::vector<PredictionRecord> rs = {
        rec(2, 2, 0.97), rec(2, 2, 0.95), rec(2, 2, 0.91), rec(2, 0, 0.85),
        rec(0, 2, 0.81), rec(0, 2, 0.75), rec(1, 1, 0.71), rec(1, 1, 0.65),
        rec(0, 0, 0.61), rec(0, 0, 0.55),
    };
    auto row = confusion_stats(rs, 0.0);
    if (std::abs(row.precision[2] - 0.75) > 1e-9)
        return {false, "precision[2] " + fmt(row.precision[2])};
    if (std::abs(row.recall[2] - 0.6) > 1e-9) return {false, "recall[2] " + fmt(row.recall[2])};
    if (std::abs(row.f1[2] - 2.0 / 3.0) > 1e-9) return {false, "f1[2] " + fmt(row.f1[2])};

    auto sweep = threshold_sweep(rs, kDefaultThresholds);
    if (sweep.size() != kDefaultThresholds.size())
        return {false, "sweep rows " + std::to_string(sweep.size())};
    if (sweep[0].proportion != 1.0)
        return {false, "proportion at 0 is " + fmt(sweep[0].proportion)};
    for (std::size_t i = 1; i < sweep.size(); ++i)
        if (sweep[i].proportion > sweep[i - 1].proportion)
            return {false, "proportion rose at threshold " + fmt(sweep[i].threshold)};
    return {true, "class-2 p/r/f1 = 0.75/0.6/0.667; proportion 1 -> " +
                      fmt(sweep.back().proportion) + " over " +
                      std::to_string(sweep.size()) + " thresholds"};
}

void push_bar(OhlcvSeries& s, Date d, double o, double h, double l, double c) {
    Bar b;
    b.date = d;
    b.open = o;
    b.high = std::max({h, o, c});
    b.low = std::min({l, o, c});
    b.close = c;
    b.volume = 1000;
    s.bars.push_back(b);
}

OhlcvSeries scripted(std::string ticker, const std::vector<std::array<double, 4>>& rows) {
    OhlcvSeries s;
    s.ticker = std::move(ticker);
    Date d(2021, 3, 1);
    for (const auto& r : rows) {
        push_bar(s, d, r[0], r[1], r[2], r[3]);
        d = d.next_weekday();
    }
    return s;
}

double pnl_sum(const std::vector<TradeRecord>& trades) {
    double sum = 0;
    for (const auto& t : trades) sum += t.net_pnl;
    return sum;
}

Outcome check_backtest_ledger() {
    BacktestConfig cfg;
    cfg.initial_cash = 100000.0;
    cfg.entry_ratio = 0.1;
    cfg.horizon_days = 5;

    // 100 shares at 100, out at the 110 barrier: gross 1000, commissions
    // 1.50 + 1.65, tax 22, net 974.85.
    {
        auto s = scripted("TP", {{100, 101, 99, 100}, {105, 111, 104, 108}});
        SignalBook book;
        book[s.bars[0].date] = {{"TP", 0.9}};
        DateRange range{s.bars.front().date, s.bars.back().date};
        auto res = simulate(book, {s}, cfg, range);
        if (res.trades.size() != 1) return {false, "take-profit fixture produced no trade"};
        const double net = res.trades[0].net_pnl;
        if (std::abs(net - 974.85) > 1e-9 * 974.85)
            return {false, "take-profit net " + fmt(net) + ", want 974.85"};
    }
    // Same position through the 90 barrier: commissions 1.50 + 1.35, no tax,
    // net -1002.85.
    {
        auto s = scripted("SL", {{100, 101, 99, 100}, {95, 96, 89, 92}});
        SignalBook book;
        book[s.bars[0].date] = {{"SL", 0.9}};
        DateRange range{s.bars.front().date, s.bars.back().date};
        auto res = simulate(book, {s}, cfg, range);
        if (res.trades.size() != 1) return {false, "stop-loss fixture produced no trade"};
        const double net = res.trades[0].net_pnl;
        if (std::abs(net + 1002.85) > 1e-9 * 1002.85)
            return {false, "stop-loss net " + fmt(net) + ", want -1002.85"};
    }

    // A dense random signal book over a synthetic universe: the cash ledger
    // must balance and no position may outlive the horizon.
    SynthConfig sc;
    sc.tickers = 20;
    sc.days = 300;
    sc.seed = 9;
    auto universe = generate_universe(sc);

    SignalBook book;
    std::mt19937_64 rng(99);
    for (const auto& s : universe)
        for (const auto& bar : s.bars)
            if (rng() % 7 == 0)
                book[bar.date].push_back({s.ticker, 0.5 + double(rng() % 50) / 100.0});

    BacktestConfig rcfg;
    rcfg.initial_cash = 10000000.0;
    rcfg.entry_ratio = 0.1;
    rcfg.horizon_days = 5;
    DateRange range{universe.front().bars.front().date, universe.front().bars.back().date};
    auto res = simulate(book, universe, rcfg, range);

    if (res.trades.size() < 100)
        return {false, "only " + std::to_string(res.trades.size()) + " trades"};
    const double drift =
        std::abs(res.report.equity_curve.back().equity - rcfg.initial_cash - pnl_sum(res.trades));
    if (drift > 1e-6) return {false, "ledger drift " + fmt(drift)};

    for (const auto& t : res.trades) {
        const OhlcvSeries* s = nullptr;
        for (const auto& u : universe)
            if (u.ticker == t.ticker) s = &u;
        const std::size_t held = s->index_of(t.exit_date) - s->index_of(t.entry_date);
        if (held > std::size_t(rcfg.horizon_days))
            return {false, t.ticker + " held " + std::to_string(held) + " bars"};
        if (t.exit_reason == TradeRecord::ExitReason::Sidecut &&
            held != std::size_t(rcfg.horizon_days))
            return {false, "sidecut after " + std::to_string(held) + " bars"};
    }
    return {true, std::to_string(res.trades.size()) + " trades, ledger drift " + fmt(drift)};
}

TradeRecord trade(double net, TradeRecord::ExitReason reason) {
    TradeRecord t;
    t.net_pnl = net;
    t.exit_reason = reason;
    return t;
}

Outcome check_metric_oracles() {
    // Peak 120, trough 90. Exact in binary: 30/120 = 0.25.
    const double dd = max_drawdown({100, 120, 90, 110}, 100.0);
    if (dd != 0.25) return {false, "drawdown " + fmt(dd) + ", want 0.25"};

    // Alternating returns cancel pairwise, so the mean and the ratio are 0.
    const double sh = sharpe_ratio({0.01, -0.01, 0.01, -0.01}, 0.0);
    if (sh != 0.0) return {false, "sharpe " + fmt(sh) + ", want 0"};

    const std::vector<EquityPoint> curve = {
        {Date(2021, 3, 1), 120000}, {Date(2021, 3, 2), 90000}, {Date(2021, 3, 3), 110000}};
    const std::vector<TradeRecord> trades = {
        trade(10.0, TradeRecord::ExitReason::TakeProfit),
        trade(5.0, TradeRecord::ExitReason::TakeProfit),
        trade(-3.0, TradeRecord::ExitReason::StopLoss),
        trade(2.0, TradeRecord::ExitReason::TakeProfit),
        trade(-1.0, TradeRecord::ExitReason::UncertainLoss),
    };
    auto rep = compute_metrics(curve, trades, 0.0, 100000.0);
    if (rep.win_rate != 0.6) return {false, "win rate " + fmt(rep.win_rate) + ", want 0.6"};
    if (rep.win_loss_ratio != 1.5)
        return {false, "win/loss ratio " + fmt(rep.win_loss_ratio) + ", want 1.5"};
    return {true, "drawdown 0.25, sharpe 0, win rate 0.6, win/loss 1.5, all exact"};
}

struct RunResult {
    int code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(BARRIERNET_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    RunResult r;
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string tail(const std::string& s, std::size_t n = 240) {
    return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

Outcome check_pipeline_determinism() {
    const fs::path ws = fs::temp_directory_path() / "bnet_acceptance_e2e";
    fs::remove_all(ws);
    fs::create_directories(ws);

    const fs::path cfg_path = ws / "config.json";
    std::ofstream cfg(cfg_path);
    cfg << R"({
  "profile": "KR",
  "seed": 5,
  "window": 30,
  "data_dir": ")" << (ws / "data").string() << R"(",
  "out_dir": ")" << (ws / "out_default").string() << R"(",
  "labels": [{"horizon_days": 5, "barrier_pct": 0.10}],
  "splits": {
    "train": ["2006-01-01", "2006-08-31"],
    "validation": ["2006-09-01", "2006-10-15"],
    "test": ["2006-10-16", "2006-12-31"]
  },
  "network": {"blocks": 2, "channels": 4, "kernels": [5, 3]},
  "train": {"epochs": 2, "batch_size": 16},
  "backtest": {"random_runs": 5}
})";
    cfg.close();

    const std::string base = "--config " + cfg_path.string();
    for (const std::string out : {"out_a", "out_b"}) {
        const std::string dst = " --out " + (ws / out).string();
        const std::vector<std::string> steps = {
            "synth " + base + " --tickers 5 --days 240",
            "label " + base + dst,
            "train " + base + dst,
            "predict " + base + dst,
            "sweep " + base + dst,
            "select " + base + dst,
            "backtest " + base + dst,
        };
        for (const auto& step : steps) {
            auto r = run_cli(step);
            if (r.code != 0)
                return {false, "`" + step.substr(0, step.find(' ')) + "` into " + out +
                                   " exited " + std::to_string(r.code) + ": " + tail(r.output)};
        }
    }

    auto listing = [](const fs::path& dir) {
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file()) names.push_back(e.path().filename().string());
        std::sort(names.begin(), names.end());
        return names;
    };
    const auto names_a = listing(ws / "out_a");
    const auto names_b = listing(ws / "out_b");
    if (names_a != names_b || names_a.empty())
        return {false, "runs produced different artifact sets (" + std::to_string(names_a.size()) +
                           " vs " + std::to_string(names_b.size()) + " files)"};
    bool saw_reports = false;
    for (const auto& name : names_a) {
        if (slurp(ws / "out_a" / name) != slurp(ws / "out_b" / name))
            return {false, name + " differs between runs"};
        if (name.rfind("backtests_", 0) == 0) saw_reports = true;
    }
    if (!saw_reports) return {false, "no backtest report among the artifacts"};
    return {true, std::to_string(names_a.size()) + " artifacts byte-identical across runs"};
}

Outcome check_checkpoint_roundtrip() {
    NetworkConfig cfg;
    cfg.blocks = 2;
    cfg.channels = 4;
    cfg.window = 16;
    auto net = Network<double>::initialize(cfg, 31);
    // Advance the running statistics so they differ from their init values.
    auto cache = forward(net, random_tensor(4, 5, 16, 77), Mode::Train);
    update_running_stats(net, cache);

    const fs::path path = fs::temp_directory_path() / "bnet_acceptance_ckpt.bin";
    save_checkpoint(net, path);
    auto back = load_checkpoint<double>(path);

    auto compare = [](std::vector<ParamRef<double>> a, std::vector<ParamRef<double>> b,
                      const char* kind) -> std::string {
        if (a.size() != b.size()) return std::string(kind) + " count differs";
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].name != b[i].name) return a[i].name + " vs " + b[i].name;
            if (*a[i].values != *b[i].values) return a[i].name + " not bitwise equal";
        }
        return "";
    };
    if (auto err = compare(net.params(), back.params(), "param"); !err.empty())
        return {false, err};
    if (auto err = compare(net.running_stats(), back.running_stats(), "stat"); !err.empty())
        return {false, err};

    std::string bytes = slurp(path);
    bytes[bytes.size() / 2] ^= 0x40;
    std::ofstream(path, std::ios::binary).write(bytes.data(), std::streamsize(bytes.size()));
    try {
        load_checkpoint<double>(path);
        return {false, "corrupted checkpoint loaded without error"};
    } catch (const IoError&) {
    }
    fs::remove(path);
    return {true, "round trip bitwise, corruption raises IoError"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
        {"labels match a brute-force day scan on seeded series", check_labeling_oracle},
        {"sideways share shrinks as the horizon grows", check_side_trend},
        {"analytic gradients match central differences", check_gradients},
        {"training overfits a small separable dataset", check_overfit},
        {"forward passes stay normalized and length-preserving", check_forward_invariants},
        {"threshold metrics match hand counts and thin monotonically", check_threshold_metrics},
        {"trade accounting matches hand math and conserves cash", check_backtest_ledger},
        {"drawdown, sharpe, and win-rate oracles are exact", check_metric_oracles},
        {"the full pipeline is bitwise deterministic end to end", check_pipeline_determinism},
        {"checkpoints round-trip bitwise and reject corruption", check_checkpoint_roundtrip},
    };

    int failed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome oc;
        try {
            oc = checks[i].second();
        } catch (const std::exception& e) {
            oc = {false, std::string("unexpected exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string note = oc.note.empty() ? "" : " " + oc.note;
        std::printf("[%2zu] %-60s %s (%.2fs)%s\n", i + 1, checks[i].first,
                    oc.ok ? "PASS" : "FAIL", secs, note.c_str());
        std::fflush(stdout);
        if (!oc.ok) ++failed;
    }
    if (failed) std::printf("%d of %zu checks failed\n", failed, checks.size());
    return failed == 0 ? 0 : 1;
}
