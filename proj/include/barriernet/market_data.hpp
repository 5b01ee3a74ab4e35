#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "barriernet/date.hpp"

namespace barriernet {

// One daily candle. Prices are strictly positive, volume is a share count.
struct Bar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    std::int64_t volume = 0;
};

// Returns the name of the first field that breaks a Bar invariant, or nullptr.
const char* bar_violation(const Bar& b);

// Date-ordered daily history of one ticker. Dates are strictly increasing.
struct OhlcvSeries {
    std::string ticker;
    std::vector<Bar> bars;

    bool empty() const { return bars.empty(); }
    std::size_t size() const { return bars.size(); }

    // Index of the first bar with date >= d, bars.size() if none.
    std::size_t lower_bound(Date d) const;
    // Index of the bar at exactly d, or npos.
    std::size_t index_of(Date d) const;

    static constexpr std::size_t npos = std::size_t(-1);
};

// 5 x length matrix of log-transformed features, row-major.
// Row order: open, high, low, close, volume. Columns run oldest -> newest.
// Price rows hold log10(price); the volume row holds log10(1 + volume).
class FeatureWindow {
public:
    static constexpr int kRows = 5;

    FeatureWindow() = default;
    explicit FeatureWindow(int length) : length_(length), values_(std::size_t(kRows) * length, 0.0) {}

    int length() const { return length_; }

    double at(int row, int col) const { return values_[std::size_t(row) * length_ + col]; }
    double& at(int row, int col) { return values_[std::size_t(row) * length_ + col]; }

    const std::vector<double>& data() const { return values_; }
    std::vector<double>& data() { return values_; }

private:
    int length_ = 0;
    std::vector<double> values_;
};

// Reads delimiter-separated rows "date,open,high,low,close,volume" (ISO dates,
// optional header) into a validated, date-sorted series.
// Throws ParseError (with line number) on malformed rows and ValidationError
// (naming the field) on bar-invariant violations or duplicate dates.
OhlcvSeries parse_ohlcv(std::istream& in, std::string ticker);

// parse_ohlcv over a file; ticker is the file stem.
OhlcvSeries load_ohlcv_file(const std::filesystem::path& file);

// Writes "date,open,high,low,close,volume" with a header, prices to four
// decimals. load_ohlcv_file(save_ohlcv_file(s)) round-trips generated data.
void save_ohlcv_file(const std::filesystem::path& file, const OhlcvSeries& series);

// Loads every "*.csv" under dir, sorted by ticker.
std::vector<OhlcvSeries> load_ohlcv_dir(const std::filesystem::path& dir);

// True iff every close within `range` lies inside [min_close, max_close].
// Throws ValidationError when the series has no bars inside `range`.
bool filter_universe(const OhlcvSeries& series, double min_close, double max_close,
                     const DateRange& range);

// Log-feature window over the `window` bars ending at end_index inclusive.
// Throws InsufficientDataError naming required vs available length.
FeatureWindow build_feature_window(const OhlcvSeries& series, std::size_t end_index,
                                   int window = 600);

}  // namespace barriernet
