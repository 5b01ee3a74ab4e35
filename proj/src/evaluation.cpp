#include "barriernet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "barriernet/errors.hpp"

namespace barriernet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

MetricsRow confusion_stats(const std::vector<PredictionRecord>& records, double threshold,
                           bool undefined_as_zero) {
    if (records.empty()) throw ValidationError("confusion_stats: empty record list");

    MetricsRow row;
    row.threshold = threshold;

    std::size_t retained = 0, correct = 0;
    std::array<std::size_t, 3> tp{}, fp{}, fn{};
    for (const auto& r : records) {
        if (r.confidence < threshold) continue;
        ++retained;
        if (r.predicted == r.true_label) {
            ++correct;
            ++tp[std::size_t(r.true_label)];
        } else {
            ++fp[std::size_t(r.predicted)];
            ++fn[std::size_t(r.true_label)];
        }
    }

    row.proportion = double(retained) / double(records.size());
    if (retained == 0) {
        row.accuracy = row.f1_macro = kNaN;
        row.precision = {kNaN, kNaN, kNaN};
        row.recall = {kNaN, kNaN, kNaN};
        row.f1 = {kNaN, kNaN, kNaN};
        return row;
    }

    row.accuracy = double(correct) / double(retained);
    double f1_sum = 0;
    for (int c = 0; c < 3; ++c) {
        std::size_t t = tp[c], p = fp[c], n = fn[c];
        row.precision[c] = (t + p) > 0 ? double(t) / double(t + p) : kNaN;
        row.recall[c] = (t + n) > 0 ? double(t) / double(t + n) : kNaN;
        if (t + p + n > 0) {
            // 2tp/(2tp+fp+fn): the harmonic mean of precision and recall
            // wherever both are defined, and 0 when tp is 0.
            row.f1[c] = 2.0 * double(t) / double(2 * t + p + n);
            f1_sum += row.f1[c];
            ++row.classes_counted;
        } else {
            row.f1[c] = kNaN;
        }
    }
    if (undefined_as_zero)
        row.f1_macro = f1_sum / 3.0;
    else
        row.f1_macro = row.classes_counted > 0 ? f1_sum / double(row.classes_counted) : kNaN;
    return row;
}

std::vector<MetricsRow> threshold_sweep(const std::vector<PredictionRecord>& records,
                                        const std::vector<double>& thresholds,
                                        bool undefined_as_zero) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw ConfigError("threshold_sweep: thresholds must be sorted ascending");
    std::vector<MetricsRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) rows.push_back(confusion_stats(records, t, undefined_as_zero));
    return rows;
}

std::vector<SelectedConfig> select_configs(
    const std::vector<std::pair<std::string, std::vector<MetricsRow>>>& sweeps,
    double min_proportion) {
    std::vector<SelectedConfig> out;
    for (const auto& [name, rows] : sweeps) {
        const MetricsRow* best = nullptr;
        for (const auto& row : rows) {
            if (std::isnan(row.f1_macro)) continue;
            if (!best || row.f1_macro > best->f1_macro) best = &row;  // first max: lower threshold
        }
        if (!best) continue;
        if (!(best->proportion > min_proportion)) continue;
        out.push_back({name, best->threshold, best->f1_macro, best->accuracy, best->proportion});
    }
    std::stable_sort(out.begin(), out.end(), [](const SelectedConfig& a, const SelectedConfig& b) {
        if (a.f1_macro != b.f1_macro) return a.f1_macro > b.f1_macro;
        return a.label_name < b.label_name;
    });
    return out;
}

}  // namespace barriernet
