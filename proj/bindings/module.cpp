// Python bindings for the double-precision pipeline: data generation,
// labeling, training, evaluation, and backtesting. Mirrors the CLI surface.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "barriernet/artifacts.hpp"
#include "barriernet/backtest.hpp"
#include "barriernet/config.hpp"
#include "barriernet/dataset_io.hpp"
#include "barriernet/errors.hpp"
#include "barriernet/evaluation.hpp"
#include "barriernet/labeling.hpp"
#include "barriernet/market_data.hpp"
#include "barriernet/resnet.hpp"
#include "barriernet/synth.hpp"

namespace py = pybind11;
using namespace barriernet;

namespace {

Date parse_date_str(const std::string& iso) {
    auto d = Date::parse(iso);
    if (!d) throw ValidationError("bad date '" + iso + "', expected YYYY-MM-DD");
    return *d;
}

std::vector<PredictionRecord> predict_dataset(const Network<double>& net, const Dataset& ds) {
    std::vector<PredictionRecord> records;
    records.reserve(ds.samples.size());
    constexpr std::size_t kChunk = 128;
    for (std::size_t start = 0; start < ds.samples.size(); start += kChunk) {
        std::size_t stop = std::min(start + kChunk, ds.samples.size());
        std::vector<const FeatureWindow*> windows;
        for (std::size_t i = start; i < stop; ++i) windows.push_back(&ds.samples[i].window);
        auto probs = predict_batch(net, windows);
        for (std::size_t i = start; i < stop; ++i)
            records.push_back(PredictionRecord::make(ds.samples[i].ticker,
                                                     ds.samples[i].decision_date, probs[i - start],
                                                     ds.samples[i].label));
    }
    return records;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Barrier-label classifier and backtest pipeline";

    py::register_exception<Error>(m, "PipelineError");

    py::class_<Date>(m, "Date")
        .def(py::init([](const std::string& iso) { return parse_date_str(iso); }))
        .def_static("parse", [](const std::string& iso) { return parse_date_str(iso); })
        .def("__str__", &Date::to_string)
        .def("__repr__", [](const Date& d) { return "Date('" + d.to_string() + "')"; })
        .def("__eq__", [](const Date& a, const Date& b) { return a == b; })
        .def("__lt__", [](const Date& a, const Date& b) { return a < b; })
        .def("__le__", [](const Date& a, const Date& b) { return a <= b; })
        .def("__hash__", [](const Date& d) { return std::size_t(d.serial()); })
        .def_property_readonly("year", &Date::year)
        .def_property_readonly("month", &Date::month)
        .def_property_readonly("day", &Date::day)
        .def("is_weekend", &Date::is_weekend);

    py::class_<DateRange>(m, "DateRange")
        .def(py::init([](const std::string& b, const std::string& e) {
                 return DateRange{parse_date_str(b), parse_date_str(e)};
             }),
             py::arg("begin"), py::arg("end"))
        .def_readwrite("begin", &DateRange::begin)
        .def_readwrite("end", &DateRange::end)
        .def("contains", &DateRange::contains);

    py::class_<Bar>(m, "Bar")
        .def_readonly("date", &Bar::date)
        .def_readonly("open", &Bar::open)
        .def_readonly("high", &Bar::high)
        .def_readonly("low", &Bar::low)
        .def_readonly("close", &Bar::close)
        .def_readonly("volume", &Bar::volume);

    py::class_<OhlcvSeries>(m, "OhlcvSeries")
        .def_readonly("ticker", &OhlcvSeries::ticker)
        .def_readonly("bars", &OhlcvSeries::bars)
        .def("__len__", &OhlcvSeries::size);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("tickers", &SynthConfig::tickers)
        .def_readwrite("days", &SynthConfig::days)
        .def_readwrite("seed", &SynthConfig::seed)
        .def_readwrite("drift", &SynthConfig::drift)
        .def_readwrite("volatility", &SynthConfig::volatility)
        .def_readwrite("mean_volume", &SynthConfig::mean_volume);

    m.def("generate_universe", &generate_universe, py::arg("config"));
    m.def("load_ohlcv_dir", &load_ohlcv_dir, py::arg("dir"));
    m.def("save_ohlcv_file", &save_ohlcv_file, py::arg("path"), py::arg("series"));

    py::class_<LabelSpec>(m, "LabelSpec")
        .def(py::init([](int horizon_days, double barrier_pct) {
                 return LabelSpec{horizon_days, barrier_pct};
             }),
             py::arg("horizon_days") = 5, py::arg("barrier_pct") = 0.10)
        .def_readwrite("horizon_days", &LabelSpec::horizon_days)
        .def_readwrite("barrier_pct", &LabelSpec::barrier_pct)
        .def("name", &LabelSpec::name);

    m.def(
        "assign_label",
        [](const OhlcvSeries& s, std::size_t t, const LabelSpec& spec) {
            auto r = assign_label(s, t, spec);
            return py::make_tuple(r.label, r.uncertain);
        },
        py::arg("series"), py::arg("t"), py::arg("spec"));

    py::class_<LabeledSample>(m, "LabeledSample")
        .def_readonly("ticker", &LabeledSample::ticker)
        .def_readonly("decision_date", &LabeledSample::decision_date)
        .def_readonly("reference_close", &LabeledSample::reference_close)
        .def_readonly("label", &LabeledSample::label)
        .def_readonly("uncertain", &LabeledSample::uncertain);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("spec", &Dataset::spec)
        .def_readonly("window", &Dataset::window)
        .def_readonly("samples", &Dataset::samples)
        .def("__len__", [](const Dataset& d) { return d.samples.size(); });

    m.def("build_dataset", &build_dataset, py::arg("universe"), py::arg("spec"), py::arg("split"),
          py::arg("window") = 600);
    m.def("save_dataset", &save_dataset, py::arg("path"), py::arg("dataset"));
    m.def("load_dataset", &load_dataset, py::arg("path"));

    py::class_<DatasetStats>(m, "DatasetStats")
        .def_readonly("rise_prop", &DatasetStats::rise_prop)
        .def_readonly("fall_prop", &DatasetStats::fall_prop)
        .def_readonly("side_prop", &DatasetStats::side_prop)
        .def_readonly("uncertain_prop", &DatasetStats::uncertain_prop)
        .def_readonly("sample_count", &DatasetStats::sample_count)
        .def("proportions_string", &DatasetStats::proportions_string);

    m.def("dataset_statistics",
          py::overload_cast<const std::vector<LabeledSample>&>(&dataset_statistics),
          py::arg("samples"));

    py::class_<NetworkConfig>(m, "NetworkConfig")
        .def(py::init<>())
        .def_readwrite("in_channels", &NetworkConfig::in_channels)
        .def_readwrite("window", &NetworkConfig::window)
        .def_readwrite("blocks", &NetworkConfig::blocks)
        .def_readwrite("channels", &NetworkConfig::channels)
        .def_readwrite("kernels", &NetworkConfig::kernels)
        .def_readwrite("classes", &NetworkConfig::classes);

    py::class_<TrainConfig> train_config(m, "TrainConfig");
    train_config.def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("optimizer", &TrainConfig::optimizer)
        .def_readwrite("seed", &TrainConfig::seed);
    py::enum_<TrainConfig::Optimizer>(train_config, "Optimizer")
        .value("Adam", TrainConfig::Optimizer::Adam)
        .value("Sgd", TrainConfig::Optimizer::Sgd);

    py::class_<EpochRecord>(m, "EpochRecord")
        .def_readonly("epoch", &EpochRecord::epoch)
        .def_readonly("loss", &EpochRecord::loss)
        .def_readonly("accuracy", &EpochRecord::accuracy);

    py::class_<Network<double>>(m, "Network");

    py::class_<TrainResult<double>>(m, "TrainResult")
        .def_readonly("history", &TrainResult<double>::history)
        .def_readonly("class_weights", &TrainResult<double>::class_weights)
        .def_readonly("warnings", &TrainResult<double>::warnings)
        .def_property_readonly("net",
                               [](const TrainResult<double>& r) -> const Network<double>& {
                                   return r.net;
                               },
                               py::return_value_policy::reference_internal);

    m.def("train", &train<double>, py::arg("samples"), py::arg("arch"), py::arg("config"));
    m.def("save_checkpoint", &save_checkpoint<double>, py::arg("net"), py::arg("path"));
    m.def("load_checkpoint", &load_checkpoint<double>, py::arg("path"));

    py::class_<ClassProbs>(m, "ClassProbs")
        .def_readonly("p0", &ClassProbs::p0)
        .def_readonly("p1", &ClassProbs::p1)
        .def_readonly("p2", &ClassProbs::p2)
        .def("argmax", &ClassProbs::argmax)
        .def("confidence", &ClassProbs::confidence);

    m.def(
        "predict",
        [](const Network<double>& net, const LabeledSample& sample) {
            return predict(net, sample.window);
        },
        py::arg("net"), py::arg("sample"));
    m.def("predict_dataset", &predict_dataset, py::arg("net"), py::arg("dataset"));

    py::class_<PredictionRecord>(m, "PredictionRecord")
        .def_readonly("ticker", &PredictionRecord::ticker)
        .def_readonly("date", &PredictionRecord::date)
        .def_readonly("probs", &PredictionRecord::probs)
        .def_readonly("predicted", &PredictionRecord::predicted)
        .def_readonly("confidence", &PredictionRecord::confidence)
        .def_readonly("true_label", &PredictionRecord::true_label);

    py::class_<MetricsRow>(m, "MetricsRow")
        .def_readonly("threshold", &MetricsRow::threshold)
        .def_readonly("accuracy", &MetricsRow::accuracy)
        .def_readonly("f1_macro", &MetricsRow::f1_macro)
        .def_readonly("precision", &MetricsRow::precision)
        .def_readonly("recall", &MetricsRow::recall)
        .def_readonly("f1", &MetricsRow::f1)
        .def_readonly("proportion", &MetricsRow::proportion)
        .def_readonly("classes_counted", &MetricsRow::classes_counted);

    m.def("confusion_stats", &confusion_stats, py::arg("records"), py::arg("threshold"),
          py::arg("undefined_as_zero") = false);
    m.def("threshold_sweep", &threshold_sweep, py::arg("records"), py::arg("thresholds"),
          py::arg("undefined_as_zero") = false);

    py::class_<SelectedConfig>(m, "SelectedConfig")
        .def_readonly("label_name", &SelectedConfig::label_name)
        .def_readonly("threshold", &SelectedConfig::threshold)
        .def_readonly("f1_macro", &SelectedConfig::f1_macro)
        .def_readonly("accuracy", &SelectedConfig::accuracy)
        .def_readonly("proportion", &SelectedConfig::proportion);

    m.def("select_configs", &select_configs, py::arg("sweeps"), py::arg("min_proportion") = 1e-5);

    py::class_<BacktestConfig>(m, "BacktestConfig")
        .def(py::init<>())
        .def_readwrite("initial_cash", &BacktestConfig::initial_cash)
        .def_readwrite("entry_ratio", &BacktestConfig::entry_ratio)
        .def_readwrite("commission_rate", &BacktestConfig::commission_rate)
        .def_readwrite("tax_rate", &BacktestConfig::tax_rate)
        .def_readwrite("take_profit_pct", &BacktestConfig::take_profit_pct)
        .def_readwrite("stop_loss_pct", &BacktestConfig::stop_loss_pct)
        .def_readwrite("horizon_days", &BacktestConfig::horizon_days)
        .def_readwrite("sidecut", &BacktestConfig::sidecut)
        .def_readwrite("threshold", &BacktestConfig::threshold)
        .def_readwrite("risk_free_rate", &BacktestConfig::risk_free_rate)
        .def_readwrite("seed", &BacktestConfig::seed)
        .def_readwrite("random_runs", &BacktestConfig::random_runs);

    py::class_<Signal>(m, "Signal")
        .def_readonly("ticker", &Signal::ticker)
        .def_readonly("confidence", &Signal::confidence);

    py::class_<TradeRecord> trade(m, "TradeRecord");
    trade.def_readonly("ticker", &TradeRecord::ticker)
        .def_readonly("entry_date", &TradeRecord::entry_date)
        .def_readonly("exit_date", &TradeRecord::exit_date)
        .def_readonly("entry_price", &TradeRecord::entry_price)
        .def_readonly("exit_price", &TradeRecord::exit_price)
        .def_readonly("shares", &TradeRecord::shares)
        .def_readonly("gross_pnl", &TradeRecord::gross_pnl)
        .def_readonly("fees", &TradeRecord::fees)
        .def_readonly("tax", &TradeRecord::tax)
        .def_readonly("net_pnl", &TradeRecord::net_pnl)
        .def_readonly("exit_reason", &TradeRecord::exit_reason);
    py::enum_<TradeRecord::ExitReason>(trade, "ExitReason")
        .value("TakeProfit", TradeRecord::ExitReason::TakeProfit)
        .value("StopLoss", TradeRecord::ExitReason::StopLoss)
        .value("Sidecut", TradeRecord::ExitReason::Sidecut)
        .value("UncertainLoss", TradeRecord::ExitReason::UncertainLoss)
        .value("EndOfData", TradeRecord::ExitReason::EndOfData);

    py::class_<EquityPoint>(m, "EquityPoint")
        .def_readonly("date", &EquityPoint::date)
        .def_readonly("equity", &EquityPoint::equity);

    py::class_<BacktestReport>(m, "BacktestReport")
        .def_readonly("name", &BacktestReport::name)
        .def_readonly("total_return", &BacktestReport::total_return)
        .def_readonly("total_trades", &BacktestReport::total_trades)
        .def_readonly("win_rate", &BacktestReport::win_rate)
        .def_readonly("win_loss_ratio", &BacktestReport::win_loss_ratio)
        .def_readonly("max_drawdown", &BacktestReport::max_drawdown)
        .def_readonly("sharpe_ratio", &BacktestReport::sharpe_ratio)
        .def_readonly("equity_curve", &BacktestReport::equity_curve)
        .def_readonly("frozen_events", &BacktestReport::frozen_events)
        .def_readonly("skipped_signals", &BacktestReport::skipped_signals);

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("report", &SimulationResult::report)
        .def_readonly("trades", &SimulationResult::trades);

    py::enum_<RandomPickMode>(m, "RandomPickMode")
        .value("MatchModelCounts", RandomPickMode::MatchModelCounts)
        .value("FixedCount", RandomPickMode::FixedCount);

    m.def("generate_signals", &generate_signals, py::arg("predictions"), py::arg("threshold"));
    m.def("simulate", &simulate, py::arg("signals"), py::arg("prices"), py::arg("config"),
          py::arg("range"), py::arg("name") = "backtest");
    m.def("random_baseline", &random_baseline, py::arg("universe"), py::arg("model_signals"),
          py::arg("config"), py::arg("range"),
          py::arg("mode") = RandomPickMode::MatchModelCounts, py::arg("fixed_count") = 1,
          py::arg("name") = "random_backtest");

    m.def("sharpe_ratio", &sharpe_ratio, py::arg("daily_returns"), py::arg("risk_free_rate") = 0.0);
    m.def("max_drawdown", &max_drawdown, py::arg("equity"), py::arg("initial_value"));
    m.def("run_name", &run_name, py::arg("spec"), py::arg("threshold"), py::arg("sidecut"));

    m.attr("LABEL_FALL") = kLabelFall;
    m.attr("LABEL_SIDE") = kLabelSide;
    m.attr("LABEL_RISE") = kLabelRise;
    m.attr("DEFAULT_THRESHOLDS") = kDefaultThresholds;
}
