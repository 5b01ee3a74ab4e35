#include "barriernet/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "barriernet/binio.hpp"
#include "barriernet/errors.hpp"
#include "json.hpp"

namespace barriernet {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

Date as_date(const json& j, const std::string& path) {
    auto d = Date::parse(as_string(j, path));
    if (!d) fail(path, "expected a YYYY-MM-DD date");
    return *d;
}

DateRange as_range(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [begin, end] dates");
    DateRange r{as_date(j[0], path + "[0]"), as_date(j[1], path + "[1]")};
    if (!r.valid()) fail(path, "begin is after end");
    return r;
}

// find() so absent keys keep their struct defaults.
const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    auto cfg = from_json_text(buf.str(), path.filename().string());
    if (const char* env = std::getenv(kDataDirEnv); env && *env) cfg.data_dir = env;
    return cfg;
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    require_object(root, origin);
    reject_unknown(root, origin,
                   {"version", "profile", "data_dir", "out_dir", "seed", "window", "labels",
                    "splits", "network", "train", "thresholds", "backtest", "close_filter",
                    "min_proportion", "benchmark_return"});

    PipelineConfig cfg;
    if (auto* j = find(root, "version")) cfg.version = as_int(*j, "version");
    if (cfg.version != 1) fail("version", "unsupported config version " + std::to_string(cfg.version));

    if (auto* j = find(root, "profile")) cfg.profile = as_string(*j, "profile");
    if (cfg.profile == "KR") {
        cfg.backtest.initial_cash = 10'000'000.0;
        cfg.close_filter.reset();
    } else if (cfg.profile == "US") {
        cfg.backtest.initial_cash = 10'000.0;
        cfg.close_filter = CloseFilter{2.0, 2000.0};
    } else {
        fail("profile", "expected \"KR\" or \"US\", got \"" + cfg.profile + "\"");
    }

    if (auto* j = find(root, "data_dir")) cfg.data_dir = as_string(*j, "data_dir");
    if (auto* j = find(root, "out_dir")) cfg.out_dir = as_string(*j, "out_dir");
    if (auto* j = find(root, "seed")) cfg.seed = std::uint64_t(as_int(*j, "seed"));
    if (auto* j = find(root, "window")) cfg.window = as_int(*j, "window");

    if (auto* j = find(root, "labels")) {
        if (!j->is_array() || j->empty()) fail("labels", "expected a non-empty array");
        cfg.labels.clear();
        for (std::size_t i = 0; i < j->size(); ++i) {
            const json& item = (*j)[i];
            std::string path = "labels[" + std::to_string(i) + "]";
            require_object(item, path);
            reject_unknown(item, path, {"horizon_days", "barrier_pct"});
            LabelSpec spec;
            if (auto* f = find(item, "horizon_days")) spec.horizon_days = as_int(*f, path + ".horizon_days");
            if (auto* f = find(item, "barrier_pct")) spec.barrier_pct = as_number(*f, path + ".barrier_pct");
            cfg.labels.push_back(spec);
        }
    }

    if (auto* j = find(root, "splits")) {
        require_object(*j, "splits");
        reject_unknown(*j, "splits", {"train", "validation", "test"});
        if (auto* f = find(*j, "train")) cfg.train_split = as_range(*f, "splits.train");
        if (auto* f = find(*j, "validation")) cfg.validation_split = as_range(*f, "splits.validation");
        if (auto* f = find(*j, "test")) cfg.test_split = as_range(*f, "splits.test");
    }

    if (auto* j = find(root, "network")) {
        require_object(*j, "network");
        reject_unknown(*j, "network", {"blocks", "channels", "kernels"});
        if (auto* f = find(*j, "blocks")) cfg.network.blocks = as_int(*f, "network.blocks");
        if (auto* f = find(*j, "channels")) cfg.network.channels = as_int(*f, "network.channels");
        if (auto* f = find(*j, "kernels")) {
            if (!f->is_array() || f->empty()) fail("network.kernels", "expected a non-empty array");
            cfg.network.kernels.clear();
            for (std::size_t i = 0; i < f->size(); ++i)
                cfg.network.kernels.push_back(
                    as_int((*f)[i], "network.kernels[" + std::to_string(i) + "]"));
        }
    }

    if (auto* j = find(root, "train")) {
        require_object(*j, "train");
        reject_unknown(*j, "train",
                       {"epochs", "batch_size", "learning_rate", "optimizer", "seed"});
        if (auto* f = find(*j, "epochs")) cfg.train.epochs = as_int(*f, "train.epochs");
        if (auto* f = find(*j, "batch_size")) cfg.train.batch_size = as_int(*f, "train.batch_size");
        if (auto* f = find(*j, "learning_rate"))
            cfg.train.learning_rate = as_number(*f, "train.learning_rate");
        if (auto* f = find(*j, "optimizer")) {
            auto opt = as_string(*f, "train.optimizer");
            if (opt == "adam") cfg.train.optimizer = TrainConfig::Optimizer::Adam;
            else if (opt == "sgd") cfg.train.optimizer = TrainConfig::Optimizer::Sgd;
            else fail("train.optimizer", "expected \"adam\" or \"sgd\", got \"" + opt + "\"");
        }
        if (auto* f = find(*j, "seed")) cfg.train.seed = std::uint64_t(as_int(*f, "train.seed"));
        else cfg.train.seed = cfg.seed;
    } else {
        cfg.train.seed = cfg.seed;
    }

    if (auto* j = find(root, "thresholds")) {
        if (!j->is_array() || j->empty()) fail("thresholds", "expected a non-empty array");
        cfg.thresholds.clear();
        for (std::size_t i = 0; i < j->size(); ++i)
            cfg.thresholds.push_back(as_number((*j)[i], "thresholds[" + std::to_string(i) + "]"));
    }

    if (auto* j = find(root, "backtest")) {
        require_object(*j, "backtest");
        reject_unknown(*j, "backtest",
                       {"initial_cash", "entry_ratio", "commission_rate", "tax_rate", "sidecut",
                        "risk_free_rate", "random_runs"});
        if (auto* f = find(*j, "initial_cash"))
            cfg.backtest.initial_cash = as_number(*f, "backtest.initial_cash");
        if (auto* f = find(*j, "entry_ratio"))
            cfg.backtest.entry_ratio = as_number(*f, "backtest.entry_ratio");
        if (auto* f = find(*j, "commission_rate"))
            cfg.backtest.commission_rate = as_number(*f, "backtest.commission_rate");
        if (auto* f = find(*j, "tax_rate")) cfg.backtest.tax_rate = as_number(*f, "backtest.tax_rate");
        if (auto* f = find(*j, "sidecut")) cfg.backtest.sidecut = as_bool(*f, "backtest.sidecut");
        if (auto* f = find(*j, "risk_free_rate"))
            cfg.backtest.risk_free_rate = as_number(*f, "backtest.risk_free_rate");
        if (auto* f = find(*j, "random_runs"))
            cfg.backtest.random_runs = as_int(*f, "backtest.random_runs");
    }
    cfg.backtest.seed = cfg.seed;

    if (auto* j = find(root, "close_filter")) {
        if (j->is_null()) {
            cfg.close_filter.reset();
        } else {
            require_object(*j, "close_filter");
            reject_unknown(*j, "close_filter", {"min", "max"});
            CloseFilter f;
            if (auto* g = find(*j, "min")) f.min = as_number(*g, "close_filter.min");
            if (auto* g = find(*j, "max")) f.max = as_number(*g, "close_filter.max");
            cfg.close_filter = f;
        }
    }

    if (auto* j = find(root, "min_proportion"))
        cfg.min_proportion = as_number(*j, "min_proportion");
    if (auto* j = find(root, "benchmark_return"); j && !j->is_null())
        cfg.benchmark_return = as_number(*j, "benchmark_return");

    cfg.validate();
    return cfg;
}

void PipelineConfig::validate() const {
    if (window < 2) fail("window", "must be >= 2");
    if (labels.empty()) fail("labels", "must not be empty");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::string path = "labels[" + std::to_string(i) + "]";
        if (labels[i].horizon_days < 1) fail(path + ".horizon_days", "must be >= 1");
        if (!(labels[i].barrier_pct > 0) || labels[i].barrier_pct >= 1)
            fail(path + ".barrier_pct", "must be in (0,1)");
    }
    if (!train_split.valid()) fail("splits.train", "begin is after end");
    if (!validation_split.valid()) fail("splits.validation", "begin is after end");
    if (!test_split.valid()) fail("splits.test", "begin is after end");
    if (!(train_split.end < validation_split.begin))
        fail("splits", "train must end before validation begins");
    if (!(validation_split.end < test_split.begin))
        fail("splits", "validation must end before test begins");
    if (thresholds.empty()) fail("thresholds", "must not be empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 0 || thresholds[i] > 1)
            fail("thresholds[" + std::to_string(i) + "]", "must be in [0,1]");
        if (i > 0 && thresholds[i] <= thresholds[i - 1])
            fail("thresholds", "must be strictly ascending");
    }
    if (min_proportion < 0) fail("min_proportion", "must be >= 0");
    if (close_filter && !(close_filter->min < close_filter->max))
        fail("close_filter", "min must be below max");
    network.validate();
    train.validate();
    backtest.validate();
}

std::string PipelineConfig::canonical_json() const {
    json j;
    j["version"] = version;
    j["profile"] = profile;
    j["data_dir"] = data_dir.string();
    j["seed"] = seed;
    j["window"] = window;
    json labels_j = json::array();
    for (const auto& l : labels)
        labels_j.push_back({{"horizon_days", l.horizon_days}, {"barrier_pct", l.barrier_pct}});
    j["labels"] = labels_j;
    j["splits"] = {
        {"train", {train_split.begin.to_string(), train_split.end.to_string()}},
        {"validation", {validation_split.begin.to_string(), validation_split.end.to_string()}},
        {"test", {test_split.begin.to_string(), test_split.end.to_string()}},
    };
    j["network"] = {{"blocks", network.blocks},
                    {"channels", network.channels},
                    {"kernels", network.kernels}};
    j["train"] = {{"epochs", train.epochs},
                  {"batch_size", train.batch_size},
                  {"learning_rate", train.learning_rate},
                  {"optimizer", train.optimizer == TrainConfig::Optimizer::Adam ? "adam" : "sgd"},
                  {"seed", train.seed}};
    j["thresholds"] = thresholds;
    j["backtest"] = {{"initial_cash", backtest.initial_cash},
                     {"entry_ratio", backtest.entry_ratio},
                     {"commission_rate", backtest.commission_rate},
                     {"tax_rate", backtest.tax_rate},
                     {"sidecut", backtest.sidecut},
                     {"risk_free_rate", backtest.risk_free_rate},
                     {"random_runs", backtest.random_runs}};
    if (close_filter)
        j["close_filter"] = {{"min", close_filter->min}, {"max", close_filter->max}};
    else
        j["close_filter"] = nullptr;
    j["min_proportion"] = min_proportion;
    if (benchmark_return) j["benchmark_return"] = *benchmark_return;
    return j.dump();
}

std::string PipelineConfig::hash8() const {
    auto text = canonical_json();
    std::uint64_t h = binio::fnv1a(text.data(), text.size());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", std::uint32_t(h ^ (h >> 32)));
    return buf;
}

std::string threshold_token(double threshold) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", threshold);
    std::string s = buf;
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
    return s;
}

std::string run_name(const LabelSpec& spec, double threshold, bool sidecut) {
    return spec.name() + "_threshold_" + threshold_token(threshold) + "_sidecut_" +
           (sidecut ? "True" : "False");
}

namespace {

std::filesystem::path join(const std::filesystem::path& dir, const std::string& stem,
                           const std::string& hash, const char* ext) {
    return dir / (stem + "_" + hash + ext);
}

}  // namespace

std::filesystem::path ArtifactPaths::dataset(const LabelSpec& spec, const std::string& split) const {
    return join(out_dir, "dataset_" + spec.name() + "_" + split, hash, ".bin");
}
std::filesystem::path ArtifactPaths::manifest(const LabelSpec& spec, const std::string& split) const {
    return join(out_dir, "manifest_" + spec.name() + "_" + split, hash, ".csv");
}
std::filesystem::path ArtifactPaths::stats() const { return join(out_dir, "stats", hash, ".csv"); }
std::filesystem::path ArtifactPaths::checkpoint(const LabelSpec& spec) const {
    return join(out_dir, "model_" + spec.name(), hash, ".ckpt");
}
std::filesystem::path ArtifactPaths::history(const LabelSpec& spec) const {
    return join(out_dir, "history_" + spec.name(), hash, ".csv");
}
std::filesystem::path ArtifactPaths::predictions(const LabelSpec& spec,
                                                 const std::string& split) const {
    return join(out_dir, "predictions_" + spec.name() + "_" + split, hash, ".csv");
}
std::filesystem::path ArtifactPaths::metrics(const LabelSpec& spec, const std::string& split) const {
    return join(out_dir, "metrics_" + spec.name() + "_" + split, hash, ".csv");
}
std::filesystem::path ArtifactPaths::selected(const std::string& split) const {
    return join(out_dir, "selected_" + split, hash, ".csv");
}
std::filesystem::path ArtifactPaths::reports(const std::string& split) const {
    return join(out_dir, "backtests_" + split, hash, ".csv");
}
std::filesystem::path ArtifactPaths::trades(const std::string& run, const std::string& split) const {
    return join(out_dir, "trades_" + run + "_" + split, hash, ".csv");
}
std::filesystem::path ArtifactPaths::equity(const std::string& run, const std::string& split) const {
    return join(out_dir, "equity_" + run + "_" + split, hash, ".csv");
}
std::filesystem::path ArtifactPaths::report_table(const std::string& split) const {
    return join(out_dir, "report_" + split, hash, ".csv");
}

}  // namespace barriernet
