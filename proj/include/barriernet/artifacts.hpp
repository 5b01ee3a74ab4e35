#pragma once

#include <filesystem>
#include <vector>

#include "barriernet/backtest.hpp"
#include "barriernet/evaluation.hpp"

// CSV artifact files shared by the pipeline steps. Numbers are written with
// round-trip precision so a downstream step sees exactly what the producer
// computed; undefined values appear as "nan" / "inf".

namespace barriernet {

void save_predictions(const std::filesystem::path& path,
                      const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

void save_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> load_metrics_csv(const std::filesystem::path& path);

void save_selected_csv(const std::filesystem::path& path,
                       const std::vector<SelectedConfig>& configs);
std::vector<SelectedConfig> load_selected_csv(const std::filesystem::path& path);

void save_reports_csv(const std::filesystem::path& path,
                      const std::vector<BacktestReport>& reports);
std::vector<BacktestReport> load_reports_csv(const std::filesystem::path& path);

void save_trades_csv(const std::filesystem::path& path, const std::vector<TradeRecord>& trades);

void save_equity_csv(const std::filesystem::path& path, const std::vector<EquityPoint>& curve);

}  // namespace barriernet
