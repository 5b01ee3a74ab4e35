// Pipeline driver: synth -> ingest -> label -> stats -> train -> predict ->
// sweep -> select -> backtest -> report. Every subcommand is deterministic
// given the config and seed, and rewrites byte-identical artifacts on re-runs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "barriernet/artifacts.hpp"
#include "barriernet/backtest.hpp"
#include "barriernet/config.hpp"
#include "barriernet/csv.hpp"
#include "barriernet/dataset_io.hpp"
#include "barriernet/errors.hpp"
#include "barriernet/evaluation.hpp"
#include "barriernet/labeling.hpp"
#include "barriernet/market_data.hpp"
#include "barriernet/resnet.hpp"
#include "barriernet/synth.hpp"

namespace fs = std::filesystem;
using namespace barriernet;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> data_dir;
};

PipelineConfig load_config(const GlobalFlags& g) {
    PipelineConfig cfg;
    if (!g.config_path.empty()) {
        cfg = PipelineConfig::load(g.config_path);
    } else {
        cfg.train.seed = cfg.seed;
        cfg.backtest.seed = cfg.seed;
        if (const char* env = std::getenv(kDataDirEnv); env && *env) cfg.data_dir = env;
    }
    if (g.data_dir) cfg.data_dir = *g.data_dir;
    if (g.out_dir) cfg.out_dir = *g.out_dir;
    if (g.seed) {
        cfg.seed = *g.seed;
        cfg.train.seed = *g.seed;
        cfg.backtest.seed = *g.seed;
    }
    cfg.validate();
    return cfg;
}

void require_artifact(const fs::path& path, const char* producer) {
    if (!fs::exists(path))
        throw PrerequisiteError(path.string() + " is missing; run `barriernet " +
                                std::string(producer) + "` first");
}

// A missing or empty data directory means no one has produced price data yet.
std::vector<OhlcvSeries> load_raw(const PipelineConfig& cfg) {
    std::vector<OhlcvSeries> all;
    if (fs::is_directory(cfg.data_dir)) all = load_ohlcv_dir(cfg.data_dir);
    if (all.empty())
        throw PrerequisiteError("no OHLCV csv files under " + cfg.data_dir.string() +
                                "; run `barriernet synth` first or point --data at market data");
    return all;
}

// Universe with the profile's close filter applied. Tickers with no bars in
// the configured span are dropped alongside filter failures.
std::vector<OhlcvSeries> load_universe(const PipelineConfig& cfg) {
    auto all = load_raw(cfg);
    if (!cfg.close_filter) return all;
    // The filter examines the training range; the splits are how you move it.
    std::vector<OhlcvSeries> kept;
    for (auto& s : all) {
        try {
            if (filter_universe(s, cfg.close_filter->min, cfg.close_filter->max, cfg.train_split))
                kept.push_back(std::move(s));
        } catch (const ValidationError&) {
            // no bars inside the span: nothing tradable, drop it
        }
    }
    if (kept.empty())
        throw ValidationError("close filter [" + std::to_string(cfg.close_filter->min) + ", " +
                              std::to_string(cfg.close_filter->max) + "] removed every ticker");
    return kept;
}

const DateRange& split_range(const PipelineConfig& cfg, const std::string& split) {
    if (split == "train") return cfg.train_split;
    if (split == "validation") return cfg.validation_split;
    if (split == "test") return cfg.test_split;
    throw ConfigError("split must be train, validation, or test, got \"" + split + "\"");
}

// name -> (label part, threshold token); names look like
// label_5_tp10_ls10_threshold_0.99_sidecut_True.
std::pair<std::string, std::string> split_run_name(const std::string& name) {
    auto tpos = name.find("_threshold_");
    if (tpos == std::string::npos) return {name, ""};
    auto rest = name.substr(tpos + 11);
    auto spos = rest.find("_sidecut_");
    return {name.substr(0, tpos), spos == std::string::npos ? rest : rest.substr(0, spos)};
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_synth(const PipelineConfig& cfg, int tickers, int days, double drift, double volatility) {
    SynthConfig sc;
    sc.tickers = tickers;
    sc.days = days;
    sc.seed = cfg.seed;
    sc.drift = drift;
    sc.volatility = volatility;
    fs::create_directories(cfg.data_dir);
    auto universe = generate_universe(sc);
    for (const auto& s : universe) save_ohlcv_file(cfg.data_dir / (s.ticker + ".csv"), s);
    std::cout << "synth: wrote " << universe.size() << " tickers x " << days << " days to "
              << cfg.data_dir.string() << " (seed " << cfg.seed << ")\n";
    return 0;
}

int cmd_ingest(const PipelineConfig& cfg) {
    auto raw = load_raw(cfg);
    auto universe = load_universe(cfg);

    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);
    auto out_path = cfg.out_dir / ("universe_" + paths.hash + ".csv");
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path.string() + " for writing");
    out << "ticker,bars,first_date,last_date\n";
    for (const auto& s : universe)
        out << s.ticker << ',' << s.size() << ',' << s.bars.front().date.to_string() << ','
            << s.bars.back().date.to_string() << '\n';

    std::cout << "ingest: " << universe.size() << " of " << raw.size() << " tickers pass"
              << (cfg.close_filter ? " the close filter" : "") << "; wrote "
              << out_path.string() << "\n";
    return 0;
}

int cmd_label(const PipelineConfig& cfg) {
    auto universe = load_universe(cfg);
    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);
    const std::pair<const char*, const DateRange*> splits[] = {
        {"train", &cfg.train_split},
        {"validation", &cfg.validation_split},
        {"test", &cfg.test_split},
    };
    for (const auto& spec : cfg.labels) {
        for (const auto& [split, range] : splits) {
            Dataset ds = build_dataset(universe, spec, *range, cfg.window);
            save_dataset(paths.dataset(spec, split), ds);
            write_manifest(paths.manifest(spec, split), ds);
            std::cout << "label: " << spec.name() << " " << split << ": " << ds.samples.size()
                      << " samples (skipped " << ds.counts.skipped_history << " short-history, "
                      << ds.counts.skipped_future << " short-future)\n";
        }
    }
    return 0;
}

int cmd_stats(const PipelineConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);
    auto out_path = paths.stats();
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path.string() + " for writing");
    out << "label,split,samples,rise,fall,side,uncertain,proportions\n";
    for (const auto& spec : cfg.labels) {
        for (const char* split : {"train", "validation", "test"}) {
            auto mpath = paths.manifest(spec, split);
            require_artifact(mpath, "label");
            auto rows = load_manifest(mpath);
            std::vector<std::pair<int, bool>> pairs;
            pairs.reserve(rows.size());
            for (const auto& r : rows) pairs.emplace_back(r.label, r.uncertain);
            if (pairs.empty()) {
                out << spec.name() << ',' << split << ",0,nan,nan,nan,nan,nan\n";
                continue;
            }
            auto st = dataset_statistics(pairs);
            out << spec.name() << ',' << split << ',' << st.sample_count << ','
                << csv::format_round_trip(st.rise_prop) << ','
                << csv::format_round_trip(st.fall_prop) << ','
                << csv::format_round_trip(st.side_prop) << ','
                << csv::format_round_trip(st.uncertain_prop) << ',' << st.proportions_string()
                << '\n';
            std::cout << "stats: " << spec.name() << " " << split << ": " << st.sample_count
                      << " samples, rise/fall/side " << st.proportions_string() << "\n";
        }
    }
    std::cout << "stats: wrote " << out_path.string() << "\n";
    return 0;
}

int cmd_train(const PipelineConfig& cfg, const std::string& precision) {
    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);
    for (const auto& spec : cfg.labels) {
        auto dpath = paths.dataset(spec, "train");
        require_artifact(dpath, "label");
        Dataset ds = load_dataset(dpath);
        NetworkConfig arch = cfg.network;
        arch.window = cfg.window;

        std::vector<EpochRecord> history;
        std::vector<std::string> warnings;
        if (precision == "f32") {
            auto result = train<float>(ds.samples, arch, cfg.train);
            save_checkpoint(result.net, paths.checkpoint(spec));
            history = std::move(result.history);
            warnings = std::move(result.warnings);
        } else {
            auto result = train<double>(ds.samples, arch, cfg.train);
            save_checkpoint(result.net, paths.checkpoint(spec));
            history = std::move(result.history);
            warnings = std::move(result.warnings);
        }
        for (const auto& w : warnings) std::cerr << "train: " << spec.name() << ": " << w << "\n";

        std::ofstream hist(paths.history(spec));
        if (!hist) throw IoError("cannot open " + paths.history(spec).string() + " for writing");
        hist << "epoch,loss,accuracy\n";
        for (const auto& e : history)
            hist << e.epoch << ',' << csv::format_round_trip(e.loss) << ','
                 << csv::format_round_trip(e.accuracy) << '\n';

        const auto& last = history.back();
        std::cout << "train: " << spec.name() << ": " << ds.samples.size() << " samples, "
                  << history.size() << " epochs, final loss " << csv::format_fixed(last.loss, 4)
                  << " acc " << csv::format_fixed(last.accuracy, 4) << " -> "
                  << paths.checkpoint(spec).string() << "\n";
    }
    return 0;
}

int cmd_predict(const PipelineConfig& cfg, const std::string& split) {
    split_range(cfg, split);
    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);
    for (const auto& spec : cfg.labels) {
        auto cpath = paths.checkpoint(spec);
        require_artifact(cpath, "train");
        auto dpath = paths.dataset(spec, split);
        require_artifact(dpath, "label");
        auto net = load_checkpoint<double>(cpath);
        Dataset ds = load_dataset(dpath);

        std::vector<PredictionRecord> records;
        records.reserve(ds.samples.size());
        constexpr std::size_t kChunk = 128;
        for (std::size_t start = 0; start < ds.samples.size(); start += kChunk) {
            std::size_t stop = std::min(start + kChunk, ds.samples.size());
            std::vector<const FeatureWindow*> windows;
            windows.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) windows.push_back(&ds.samples[i].window);
            auto probs = predict_batch(net, windows);
            for (std::size_t i = start; i < stop; ++i)
                records.push_back(PredictionRecord::make(ds.samples[i].ticker,
                                                         ds.samples[i].decision_date,
                                                         probs[i - start], ds.samples[i].label));
        }
        save_predictions(paths.predictions(spec, split), records);
        std::cout << "predict: " << spec.name() << " " << split << ": " << records.size()
                  << " predictions -> " << paths.predictions(spec, split).string() << "\n";
    }
    return 0;
}

int cmd_sweep(const PipelineConfig& cfg, const std::string& split) {
    split_range(cfg, split);
    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);
    for (const auto& spec : cfg.labels) {
        auto ppath = paths.predictions(spec, split);
        require_artifact(ppath, "predict");
        auto records = load_predictions(ppath);
        auto rows = threshold_sweep(records, cfg.thresholds);
        save_metrics_csv(paths.metrics(spec, split), rows);
        std::cout << "sweep: " << spec.name() << " " << split << ": " << rows.size()
                  << " thresholds over " << records.size() << " predictions\n";
        // Four-decimal display only; the CSV keeps round-trip precision
        // because selection reloads it.
        for (const auto& r : rows)
            std::cout << "  threshold " << threshold_token(r.threshold) << ": accuracy "
                      << csv::format_fixed(r.accuracy, 4) << ", f1_macro "
                      << csv::format_fixed(r.f1_macro, 4) << ", proportion "
                      << csv::format_fixed(r.proportion, 4) << "\n";
    }
    return 0;
}

int cmd_select(const PipelineConfig& cfg, const std::string& split) {
    split_range(cfg, split);
    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);
    std::vector<std::pair<std::string, std::vector<MetricsRow>>> sweeps;
    for (const auto& spec : cfg.labels) {
        auto mpath = paths.metrics(spec, split);
        require_artifact(mpath, "sweep");
        sweeps.emplace_back(spec.name(), load_metrics_csv(mpath));
    }
    auto selected = select_configs(sweeps, cfg.min_proportion);
    save_selected_csv(paths.selected(split), selected);
    if (selected.empty()) {
        std::cout << "select: no configuration cleared min_proportion "
                  << csv::format_round_trip(cfg.min_proportion) << "\n";
    } else {
        for (const auto& c : selected)
            std::cout << "select: " << c.label_name << " @ " << threshold_token(c.threshold)
                      << ": f1_macro " << csv::format_fixed(c.f1_macro, 4) << ", proportion "
                      << csv::format_fixed(c.proportion, 6) << "\n";
    }
    return 0;
}

struct BacktestOverride {
    std::optional<int> horizon;
    std::optional<double> pct;
    std::optional<double> threshold;
    std::optional<bool> sidecut;
};

int cmd_backtest(const PipelineConfig& cfg, const std::string& split, const BacktestOverride& ov) {
    const DateRange& range = split_range(cfg, split);
    fs::create_directories(cfg.out_dir);
    ArtifactPaths paths(cfg);

    // (spec, threshold) pairs to simulate: explicit flags trump selection.
    std::vector<std::pair<LabelSpec, double>> runs;
    if (ov.horizon || ov.pct || ov.threshold) {
        LabelSpec spec = cfg.labels.front();
        if (ov.horizon) spec.horizon_days = *ov.horizon;
        if (ov.pct) spec.barrier_pct = *ov.pct;
        runs.emplace_back(spec, ov.threshold.value_or(0.0));
    } else {
        auto spath = paths.selected(split);
        require_artifact(spath, "select");
        for (const auto& sel : load_selected_csv(spath)) {
            bool known = false;
            for (const auto& spec : cfg.labels) {
                if (spec.name() == sel.label_name) {
                    runs.emplace_back(spec, sel.threshold);
                    known = true;
                    break;
                }
            }
            if (!known)
                throw ConfigError("selected label " + sel.label_name +
                                  " is not in the configured label list");
        }
        if (runs.empty())
            throw ValidationError("selection is empty, nothing to backtest; relax min_proportion");
    }

    auto universe = load_universe(cfg);
    std::vector<BacktestReport> reports;
    for (const auto& [spec, threshold] : runs) {
        auto ppath = paths.predictions(spec, split);
        require_artifact(ppath, "predict");
        auto records = load_predictions(ppath);

        BacktestConfig bcfg = cfg.backtest;
        bcfg.horizon_days = spec.horizon_days;
        bcfg.take_profit_pct = spec.barrier_pct;
        bcfg.stop_loss_pct = spec.barrier_pct;
        bcfg.threshold = threshold;
        if (ov.sidecut) bcfg.sidecut = *ov.sidecut;

        std::string name = run_name(spec, threshold, bcfg.sidecut);
        auto signals = generate_signals(records, threshold);
        auto sim = simulate(signals, universe, bcfg, range, name);
        save_trades_csv(paths.trades(name, split), sim.trades);
        save_equity_csv(paths.equity(name, split), sim.report.equity_curve);
        auto random = random_baseline(universe, signals, bcfg, range,
                                      RandomPickMode::MatchModelCounts, 1, "random_" + name);
        reports.push_back(sim.report);
        reports.push_back(random);

        std::cout << "backtest: " << name << ": return "
                  << csv::format_fixed(sim.report.total_return, 4) << " over "
                  << csv::format_fixed(sim.report.total_trades, 0) << " trades (random "
                  << csv::format_fixed(random.total_return, 4) << ")\n";
    }
    save_reports_csv(paths.reports(split), reports);
    std::cout << "backtest: wrote " << paths.reports(split).string() << "\n";
    return 0;
}

int cmd_report(const PipelineConfig& cfg, const std::string& split) {
    split_range(cfg, split);
    ArtifactPaths paths(cfg);
    auto rpath = paths.reports(split);
    require_artifact(rpath, "backtest");
    auto reports = load_reports_csv(rpath);
    auto spath = paths.selected(split);
    std::vector<SelectedConfig> selected;
    if (fs::exists(spath)) selected = load_selected_csv(spath);

    auto out_path = paths.report_table(split);
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path.string() + " for writing");
    out << "name,f1_macro,accuracy,proportion,total_return,random_return,excess_vs_random,"
           "benchmark_return,win_rate,win_loss_ratio,max_drawdown,sharpe_ratio,total_trades\n";

    for (const auto& rep : reports) {
        if (rep.name.rfind("random_", 0) == 0) continue;
        double random_return = std::nan("");
        for (const auto& other : reports)
            if (other.name == "random_" + rep.name) random_return = other.total_return;

        auto [label, token] = split_run_name(rep.name);
        double f1 = std::nan(""), acc = std::nan(""), prop = std::nan("");
        for (const auto& sel : selected) {
            if (sel.label_name == label && threshold_token(sel.threshold) == token) {
                f1 = sel.f1_macro;
                acc = sel.accuracy;
                prop = sel.proportion;
                break;
            }
        }

        out << rep.name << ',' << csv::format_fixed(f1, 6) << ',' << csv::format_fixed(acc, 6)
            << ',' << csv::format_fixed(prop, 6) << ',' << csv::format_fixed(rep.total_return, 6)
            << ',' << csv::format_fixed(random_return, 6) << ','
            << csv::format_fixed(rep.total_return - random_return, 6) << ','
            << (cfg.benchmark_return ? csv::format_fixed(*cfg.benchmark_return, 6)
                                     : std::string("nan"))
            << ',' << csv::format_fixed(rep.win_rate, 6) << ','
            << csv::format_fixed(rep.win_loss_ratio, 6) << ','
            << csv::format_fixed(rep.max_drawdown, 6) << ','
            << csv::format_fixed(rep.sharpe_ratio, 6) << ','
            << csv::format_fixed(rep.total_trades, 2) << '\n';

        std::cout << "report: " << rep.name << ": return "
                  << csv::format_fixed(rep.total_return, 4) << " vs random "
                  << csv::format_fixed(random_return, 4) << "\n";
    }
    std::cout << "report: wrote " << out_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Barrier-label stock classifier and backtest pipeline"};
    app.require_subcommand(1);
    // global flags (--seed, --data, ...) remain valid after the subcommand name
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config_path, "JSON pipeline config (defaults apply without it)");
    std::uint64_t seed_val = 0;
    auto* seed_opt = app.add_option("--seed", seed_val, "Override the global seed");
    std::string out_val;
    auto* out_opt = app.add_option("--out", out_val, "Override the artifact directory");
    std::string data_val;
    auto* data_opt =
        app.add_option("--data", data_val, "Override the data directory (also " +
                                               std::string(kDataDirEnv) + ")");

    int synth_tickers = 10, synth_days = 1300;
    double synth_drift = 0.05, synth_vol = 0.35;
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic OHLCV universe");
    synth->add_option("--tickers", synth_tickers, "Number of tickers")->check(CLI::PositiveNumber);
    synth->add_option("--days", synth_days, "Trading days per ticker")->check(CLI::PositiveNumber);
    synth->add_option("--drift", synth_drift, "Annualized drift");
    synth->add_option("--volatility", synth_vol, "Annualized volatility");

    auto* ingest = app.add_subcommand("ingest", "Validate the universe and write its summary");
    auto* label = app.add_subcommand("label", "Build labeled datasets for every split");
    auto* stats = app.add_subcommand("stats", "Tabulate label proportions from manifests");

    std::string precision = "f64";
    auto* train_cmd = app.add_subcommand("train", "Train one model per label spec");
    train_cmd->add_option("--precision", precision, "Training arithmetic: f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));

    std::string split = "test";
    auto add_split = [&split](CLI::App* sub) {
        sub->add_option("--split", split, "Dataset split: train, validation, or test");
    };
    auto* predict_cmd = app.add_subcommand("predict", "Write per-sample class probabilities");
    add_split(predict_cmd);
    auto* sweep = app.add_subcommand("sweep", "Metrics across the confidence thresholds");
    add_split(sweep);
    auto* select = app.add_subcommand("select", "Rank configurations by macro F1");
    add_split(select);

    BacktestOverride ov;
    int ov_horizon = 0;
    double ov_pct = 0, ov_threshold = 0;
    bool ov_sidecut = true;
    auto* backtest = app.add_subcommand("backtest", "Simulate selected or explicit configurations");
    add_split(backtest);
    auto* horizon_opt = backtest->add_option("--horizon", ov_horizon, "Holding horizon in days");
    auto* pct_opt = backtest->add_option("--pct", ov_pct, "Barrier fraction, e.g. 0.10");
    auto* threshold_opt = backtest->add_option("--threshold", ov_threshold, "Confidence threshold");
    auto* sidecut_opt = backtest->add_flag("--sidecut,!--no-sidecut", ov_sidecut,
                                           "Sell at the close of day D when no barrier is hit");

    auto* report = app.add_subcommand("report", "Join selection and backtests into one table");
    add_split(report);

    CLI11_PARSE(app, argc, argv);

    if (*seed_opt) g.seed = seed_val;
    if (*out_opt) g.out_dir = out_val;
    if (*data_opt) g.data_dir = data_val;

    try {
        PipelineConfig cfg = load_config(g);
        if (*synth) return cmd_synth(cfg, synth_tickers, synth_days, synth_drift, synth_vol);
        if (*ingest) return cmd_ingest(cfg);
        if (*label) return cmd_label(cfg);
        if (*stats) return cmd_stats(cfg);
        if (*train_cmd) return cmd_train(cfg, precision);
        if (*predict_cmd) return cmd_predict(cfg, split);
        if (*sweep) return cmd_sweep(cfg, split);
        if (*select) return cmd_select(cfg, split);
        if (*backtest) {
            if (*horizon_opt) ov.horizon = ov_horizon;
            if (*pct_opt) ov.pct = ov_pct;
            if (*threshold_opt) ov.threshold = ov_threshold;
            if (*sidecut_opt) ov.sidecut = ov_sidecut;
            return cmd_backtest(cfg, split, ov);
        }
        if (*report) return cmd_report(cfg, split);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PrerequisiteError& e) {
        std::cerr << "prerequisite error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
