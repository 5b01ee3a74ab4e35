#include "barriernet/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "barriernet/errors.hpp"

namespace barriernet {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

const char* bar_violation(const Bar& b) {
    if (!(b.open > 0)) return "open";
    if (!(b.high > 0)) return "high";
    if (!(b.low > 0)) return "low";
    if (!(b.close > 0)) return "close";
    if (b.volume < 0) return "volume";
    if (b.low > std::min(b.open, b.close)) return "low";
    if (b.high < std::max(b.open, b.close)) return "high";
    return nullptr;
}

std::size_t OhlcvSeries::lower_bound(Date d) const {
    auto it = std::lower_bound(bars.begin(), bars.end(), d,
                               [](const Bar& b, Date x) { return b.date < x; });
    return std::size_t(it - bars.begin());
}

std::size_t OhlcvSeries::index_of(Date d) const {
    std::size_t i = lower_bound(d);
    if (i < bars.size() && bars[i].date == d) return i;
    return npos;
}

OhlcvSeries parse_ohlcv(std::istream& in, std::string ticker) {
    OhlcvSeries series;
    series.ticker = std::move(ticker);

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;

        auto fields = split_fields(sv, ',');
        if (fields.size() != 6)
            throw ParseError(series.ticker + " line " + std::to_string(line_no) + ": expected 6 fields, got " +
                             std::to_string(fields.size()));
        for (auto& f : fields) f = trim(f);

        auto date = Date::parse(fields[0]);
        if (!date) {
            // A header row is allowed once, at the top.
            if (line_no == 1 && series.bars.empty()) continue;
            throw ParseError(series.ticker + " line " + std::to_string(line_no) + ": bad date '" +
                             std::string(fields[0]) + "'");
        }

        Bar bar;
        bar.date = *date;
        static const char* names[4] = {"open", "high", "low", "close"};
        double px[4];
        for (int i = 0; i < 4; ++i) {
            if (!parse_double(fields[1 + i], px[i]) || !std::isfinite(px[i]))
                throw ParseError(series.ticker + " line " + std::to_string(line_no) + ": bad " + names[i] +
                                 " '" + std::string(fields[1 + i]) + "'");
        }
        bar.open = px[0];
        bar.high = px[1];
        bar.low = px[2];
        bar.close = px[3];

        double vol;
        if (!parse_double(fields[5], vol) || !std::isfinite(vol))
            throw ParseError(series.ticker + " line " + std::to_string(line_no) + ": bad volume '" +
                             std::string(fields[5]) + "'");
        if (vol < 0 || vol != std::floor(vol))
            throw ValidationError(series.ticker + " line " + std::to_string(line_no) +
                                  ": field volume must be a non-negative integer count");
        bar.volume = std::int64_t(vol);

        if (const char* field = bar_violation(bar))
            throw ValidationError(series.ticker + " line " + std::to_string(line_no) + ": field " + field +
                                  " violates bar invariants");
        series.bars.push_back(bar);
    }

    std::stable_sort(series.bars.begin(), series.bars.end(),
                     [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < series.bars.size(); ++i) {
        if (series.bars[i].date == series.bars[i - 1].date)
            throw ValidationError(series.ticker + ": duplicate date " + series.bars[i].date.to_string());
    }
    return series;
}

OhlcvSeries load_ohlcv_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    return parse_ohlcv(in, file.stem().string());
}

void save_ohlcv_file(const std::filesystem::path& file, const OhlcvSeries& series) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << "date,open,high,low,close,volume\n";
    char buf[160];
    for (const auto& b : series.bars) {
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%.4f,%lld", b.date.to_string().c_str(),
                      b.open, b.high, b.low, b.close, static_cast<long long>(b.volume));
        out << buf << '\n';
    }
    if (!out) throw IoError("write failed for " + file.string());
}

std::vector<OhlcvSeries> load_ohlcv_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("data directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<OhlcvSeries> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_ohlcv_file(f));
    return out;
}

bool filter_universe(const OhlcvSeries& series, double min_close, double max_close,
                     const DateRange& range) {
    if (!(min_close < max_close)) throw ValidationError("filter_universe: min_close must be < max_close");
    std::size_t begin = series.lower_bound(range.begin);
    bool any = false;
    for (std::size_t i = begin; i < series.bars.size() && series.bars[i].date <= range.end; ++i) {
        any = true;
        double c = series.bars[i].close;
        if (c < min_close || c > max_close) return false;
    }
    if (!any)
        throw ValidationError("filter_universe: " + series.ticker + " has no bars in " +
                              range.begin.to_string() + ".." + range.end.to_string());
    return true;
}

FeatureWindow build_feature_window(const OhlcvSeries& series, std::size_t end_index, int window) {
    if (window < 1) throw ValidationError("build_feature_window: window must be >= 1");
    if (end_index >= series.bars.size())
        throw ValidationError("build_feature_window: end_index " + std::to_string(end_index) +
                              " out of range for " + std::to_string(series.bars.size()) + " bars");
    std::size_t available = end_index + 1;
    if (available < std::size_t(window))
        throw InsufficientDataError("build_feature_window: need " + std::to_string(window) +
                                    " bars, have " + std::to_string(available));

    FeatureWindow w(window);
    std::size_t first = end_index + 1 - std::size_t(window);
    for (int col = 0; col < window; ++col) {
        const Bar& b = series.bars[first + col];
        w.at(0, col) = std::log10(b.open);
        w.at(1, col) = std::log10(b.high);
        w.at(2, col) = std::log10(b.low);
        w.at(3, col) = std::log10(b.close);
        w.at(4, col) = std::log10(1.0 + double(b.volume));
    }
    return w;
}

}  // namespace barriernet
