#include "barriernet/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "barriernet/errors.hpp"

namespace barriernet {

namespace {

// "10" for 0.10, "12.5" for 0.125.
std::string pct_token(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", pct * 100.0);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

}  // namespace

std::string LabelSpec::name() const {
    std::string p = pct_token(barrier_pct);
    return "label_" + std::to_string(horizon_days) + "_tp" + p + "_ls" + p;
}

LabelResult assign_label(const OhlcvSeries& series, std::size_t t, const LabelSpec& spec) {
    if (spec.horizon_days < 1) throw ValidationError("assign_label: horizon_days must be >= 1");
    if (!(spec.barrier_pct > 0 && spec.barrier_pct < 1))
        throw ValidationError("assign_label: barrier_pct must be in (0,1)");
    if (t >= series.bars.size())
        throw ValidationError("assign_label: index " + std::to_string(t) + " out of range");

    const std::size_t d = std::size_t(spec.horizon_days);
    if (series.bars.size() - 1 - t < d)
        throw InsufficientDataError("assign_label: need " + std::to_string(d) + " future bars at index " +
                                    std::to_string(t) + ", have " +
                                    std::to_string(series.bars.size() - 1 - t));

    const double ref = series.bars[t].close;
    const double up = ref * (1.0 + spec.barrier_pct);
    const double down = ref * (1.0 - spec.barrier_pct);

    // First offsets at which each barrier is touched; d+1 = never.
    std::size_t first_up = d + 1, first_down = d + 1;
    for (std::size_t i = 1; i <= d; ++i) {
        if (series.bars[t + i].high >= up) {
            first_up = i;
            break;
        }
    }
    for (std::size_t i = 1; i <= d; ++i) {
        if (series.bars[t + i].low <= down) {
            first_down = i;
            break;
        }
    }

    if (first_up > d && first_down > d) return {kLabelSide, false};
    if (first_up < first_down) return {kLabelRise, false};
    if (first_down < first_up) return {kLabelFall, false};
    return {kLabelRise, true};  // same bar: order unknowable from daily data
}

Dataset build_dataset(const std::vector<OhlcvSeries>& universe, const LabelSpec& spec,
                      const DateRange& split, int window) {
    if (!split.valid()) throw ValidationError("build_dataset: empty split range");
    Dataset ds;
    ds.spec = spec;
    ds.window = window;

    std::vector<const OhlcvSeries*> ordered;
    ordered.reserve(universe.size());
    for (const auto& s : universe) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const OhlcvSeries* a, const OhlcvSeries* b) { return a->ticker < b->ticker; });

    const std::size_t d = std::size_t(spec.horizon_days);
    for (const OhlcvSeries* s : ordered) {
        const auto& bars = s->bars;
        for (std::size_t t = s->lower_bound(split.begin); t < bars.size() && bars[t].date <= split.end;
             ++t) {
            if (t + 1 < std::size_t(window)) {
                ++ds.counts.skipped_history;
                continue;
            }
            if (bars.size() - 1 - t < d) {
                ++ds.counts.skipped_future;
                continue;
            }
            LabelResult r = assign_label(*s, t, spec);
            LabeledSample sample;
            sample.ticker = s->ticker;
            sample.decision_date = bars[t].date;
            sample.reference_close = bars[t].close;
            sample.window = build_feature_window(*s, t, window);
            sample.label = r.label;
            sample.uncertain = r.uncertain;
            ds.samples.push_back(std::move(sample));
            ++ds.counts.emitted;
        }
    }
    return ds;
}

std::string DatasetStats::proportions_string() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f/%.2f/%.2f", rise_prop, fall_prop, side_prop);
    return buf;
}

namespace {

DatasetStats stats_from_counts(std::size_t n, std::size_t rise, std::size_t fall, std::size_t side,
                               std::size_t uncertain) {
    if (n == 0) throw ValidationError("dataset_statistics: empty sample list");
    DatasetStats st;
    st.sample_count = n;
    st.rise_prop = double(rise) / double(n);
    st.fall_prop = double(fall) / double(n);
    st.side_prop = double(side) / double(n);
    st.uncertain_prop = double(uncertain) / double(n);
    return st;
}

}  // namespace

DatasetStats dataset_statistics(const std::vector<LabeledSample>& samples) {
    std::size_t rise = 0, fall = 0, side = 0, uncertain = 0;
    for (const auto& s : samples) {
        if (s.label == kLabelRise) ++rise;
        else if (s.label == kLabelFall) ++fall;
        else ++side;
        if (s.uncertain) ++uncertain;
    }
    return stats_from_counts(samples.size(), rise, fall, side, uncertain);
}

DatasetStats dataset_statistics(const std::vector<std::pair<int, bool>>& labels) {
    std::size_t rise = 0, fall = 0, side = 0, uncertain = 0;
    for (const auto& [label, unc] : labels) {
        if (label == kLabelRise) ++rise;
        else if (label == kLabelFall) ++fall;
        else ++side;
        if (unc) ++uncertain;
    }
    return stats_from_counts(labels.size(), rise, fall, side, uncertain);
}

}  // namespace barriernet
