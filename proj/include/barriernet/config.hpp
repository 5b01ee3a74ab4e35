#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "barriernet/backtest.hpp"
#include "barriernet/labeling.hpp"
#include "barriernet/resnet.hpp"

namespace barriernet {

// Optional close-price band for universe filtering (US-style markets).
struct CloseFilter {
    double min = 2.0;
    double max = 2000.0;
};

// Everything a pipeline run needs, loaded from versioned JSON. Unset fields
// take market-profile defaults: KR trades 10,000,000 cash with no close
// filter, US trades 10,000 cash filtered to closes in [2, 2000].
struct PipelineConfig {
    int version = 1;
    std::string profile = "KR";
    std::filesystem::path data_dir = "data";
    std::filesystem::path out_dir = "artifacts";
    std::uint64_t seed = 7;
    int window = 600;

    std::vector<LabelSpec> labels = {{5, 0.10}};
    DateRange train_split{Date(2006, 1, 1), Date(2015, 12, 31)};
    DateRange validation_split{Date(2016, 1, 1), Date(2019, 12, 31)};
    DateRange test_split{Date(2020, 1, 1), Date(2022, 12, 31)};

    NetworkConfig network;
    TrainConfig train;
    std::vector<double> thresholds = kDefaultThresholds;
    BacktestConfig backtest{.initial_cash = 10'000'000.0};  // KR profile default
    std::optional<CloseFilter> close_filter;
    double min_proportion = 1e-5;
    std::optional<double> benchmark_return;  // reported next to strategies when given

    // Parses and validates; unknown keys are rejected with their JSON path.
    static PipelineConfig load(const std::filesystem::path& path);
    static PipelineConfig from_json_text(const std::string& text, const std::string& origin);

    void validate() const;

    // FNV-1a of the canonical serialized form, as 8 lowercase hex digits.
    // Artifact filenames embed it so runs with different configs never mix.
    std::string hash8() const;

    std::string canonical_json() const;
};

// "label_5_tp10_ls10_threshold_0.99_sidecut_True" style run names.
std::string run_name(const LabelSpec& spec, double threshold, bool sidecut);

// Threshold rendered for run names: always at least one decimal ("0.0"),
// trailing zeros otherwise trimmed ("0.99", "0.9995").
std::string threshold_token(double threshold);

// Artifact locations under out_dir, all carrying the config hash.
struct ArtifactPaths {
    std::filesystem::path out_dir;
    std::string hash;

    ArtifactPaths(const PipelineConfig& cfg) : out_dir(cfg.out_dir), hash(cfg.hash8()) {}

    std::filesystem::path dataset(const LabelSpec& spec, const std::string& split) const;
    std::filesystem::path manifest(const LabelSpec& spec, const std::string& split) const;
    std::filesystem::path stats() const;
    std::filesystem::path checkpoint(const LabelSpec& spec) const;
    std::filesystem::path history(const LabelSpec& spec) const;
    std::filesystem::path predictions(const LabelSpec& spec, const std::string& split) const;
    std::filesystem::path metrics(const LabelSpec& spec, const std::string& split) const;
    std::filesystem::path selected(const std::string& split) const;
    std::filesystem::path reports(const std::string& split) const;
    std::filesystem::path trades(const std::string& run, const std::string& split) const;
    std::filesystem::path equity(const std::string& run, const std::string& split) const;
    std::filesystem::path report_table(const std::string& split) const;
};

// BARRIERNET_DATA_DIR, when set, overrides the configured data directory.
inline constexpr const char* kDataDirEnv = "BARRIERNET_DATA_DIR";

}  // namespace barriernet
