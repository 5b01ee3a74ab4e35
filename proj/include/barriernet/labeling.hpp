#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "barriernet/market_data.hpp"

namespace barriernet {

// Class codes: 0 = fell to the down barrier first, 1 = stayed inside the band
// ("sideways"), 2 = rose to the up barrier first.
inline constexpr int kLabelFall = 0;
inline constexpr int kLabelSide = 1;
inline constexpr int kLabelRise = 2;

// Horizon in trading days plus the symmetric barrier as a fraction of the
// decision day's close.
struct LabelSpec {
    int horizon_days = 5;
    double barrier_pct = 0.10;

    // e.g. "label_5_tp10_ls10"
    std::string name() const;

    bool operator==(const LabelSpec&) const = default;
};

struct LabelResult {
    int label = kLabelSide;
    bool uncertain = false;  // both barriers touched on the same bar
};

// First-hit label over bars t+1 .. t+D relative to close at t.
// The first bar that touches a barrier decides: up only -> (2,false),
// down only -> (0,false), both on that bar -> (2,true). No touch -> (1,false).
// Throws InsufficientDataError when fewer than D future bars exist.
LabelResult assign_label(const OhlcvSeries& series, std::size_t t, const LabelSpec& spec);

struct LabeledSample {
    std::string ticker;
    Date decision_date;
    double reference_close = 0;
    FeatureWindow window;
    int label = kLabelSide;
    bool uncertain = false;
};

struct DatasetBuildCounts {
    std::size_t emitted = 0;
    std::size_t skipped_history = 0;  // decision date in split but < window bars behind it
    std::size_t skipped_future = 0;   // decision date in split but < D bars ahead of it
};

struct Dataset {
    LabelSpec spec;
    int window = 600;
    std::vector<LabeledSample> samples;  // ordered by (ticker, date)
    DatasetBuildCounts counts;
};

// Every eligible (ticker, date) pair with decision_date in `split`, exactly
// once, ordered by ticker then date. Eligible means `window` past bars
// (inclusive of the decision bar) and D future bars.
Dataset build_dataset(const std::vector<OhlcvSeries>& universe, const LabelSpec& spec,
                      const DateRange& split, int window = 600);

struct DatasetStats {
    double rise_prop = 0;
    double fall_prop = 0;
    double side_prop = 0;
    double uncertain_prop = 0;
    std::size_t sample_count = 0;

    // "rise/fall/side" rounded to two decimals, the table cell format.
    std::string proportions_string() const;
};

// Throws ValidationError on an empty sample list.
DatasetStats dataset_statistics(const std::vector<LabeledSample>& samples);

// Statistics straight from (label, uncertain) pairs; used by manifest readers
// that never materialize windows.
DatasetStats dataset_statistics(const std::vector<std::pair<int, bool>>& labels);

}  // namespace barriernet
