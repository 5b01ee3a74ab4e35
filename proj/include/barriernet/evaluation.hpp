#pragma once

#include <array>
#include <string>
#include <vector>

#include "barriernet/date.hpp"
#include "barriernet/resnet.hpp"

namespace barriernet {

// One model output joined with its ground truth.
struct PredictionRecord {
    std::string ticker;
    Date date;
    ClassProbs probs;
    int predicted = 0;      // argmax, ties toward the larger index
    double confidence = 0;  // max of the three probabilities
    int true_label = 0;

    static PredictionRecord make(std::string ticker, Date date, ClassProbs probs, int true_label) {
        PredictionRecord r;
        r.ticker = std::move(ticker);
        r.date = date;
        r.probs = probs;
        r.predicted = probs.argmax();
        r.confidence = probs.confidence();
        r.true_label = true_label;
        return r;
    }
};

// Selective-classification metrics at one confidence threshold. Metrics that
// cannot be computed are NaN and render as "nan" in tables.
struct MetricsRow {
    double threshold = 0;
    double accuracy = 0;
    double f1_macro = 0;
    std::array<double, 3> precision{};
    std::array<double, 3> recall{};
    std::array<double, 3> f1{};
    double proportion = 0;    // retained records / all records
    int classes_counted = 0;  // classes that entered the macro mean
};

// Default sweep thresholds, from permissive to highly selective.
inline const std::vector<double> kDefaultThresholds = {0, 0.7, 0.8, 0.9, 0.99, 0.999, 0.9995};

// Metrics over records with confidence >= threshold. A class enters the macro
// mean only if it appears among retained true or predicted labels; with
// undefined_as_zero the absent classes score 0 instead of being skipped.
// Throws ValidationError on an empty record list; zero retained records yield
// proportion 0 with NaN metrics.
MetricsRow confusion_stats(const std::vector<PredictionRecord>& records, double threshold,
                           bool undefined_as_zero = false);

// One row per threshold. Thresholds must be sorted ascending.
std::vector<MetricsRow> threshold_sweep(const std::vector<PredictionRecord>& records,
                                        const std::vector<double>& thresholds,
                                        bool undefined_as_zero = false);

struct SelectedConfig {
    std::string label_name;
    double threshold = 0;
    double f1_macro = 0;
    double accuracy = 0;
    double proportion = 0;
};

// Per label: the threshold maximizing f1_macro (ties to the lower threshold,
// which keeps more trades). Entries whose proportion does not exceed
// min_proportion are dropped; the survivors are ordered by f1_macro
// descending. An empty result means everything was filtered out.
std::vector<SelectedConfig> select_configs(
    const std::vector<std::pair<std::string, std::vector<MetricsRow>>>& sweeps,
    double min_proportion = 1e-5);

}  // namespace barriernet
