#include "barriernet/artifacts.hpp"

#include <fstream>

#include "barriernet/csv.hpp"
#include "barriernet/errors.hpp"

namespace barriernet {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

// Line-by-line CSV pull with a mandatory header. Skips blank lines.
class RowReader {
public:
    RowReader(const std::filesystem::path& path, const std::string& header)
        : in_(path), name_(path.filename().string()) {
        if (!in_) throw IoError("cannot open " + path.string());
        std::string line;
        if (!std::getline(in_, line)) throw ParseError(name_ + ": empty file");
        ++lineno_;
        if (line != header)
            throw ParseError(name_ + ": unexpected header '" + line + "', expected '" + header +
                             "'");
        columns_ = csv::split(header, ',').size();
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            if (line.empty()) continue;
            fields = csv::split(line, ',');
            if (fields.size() != columns_)
                throw ParseError(where() + ": expected " + std::to_string(columns_) +
                                 " fields, got " + std::to_string(fields.size()));
            return true;
        }
        return false;
    }

    std::string where() const { return name_ + ":" + std::to_string(lineno_); }

private:
    std::ifstream in_;
    std::string name_;
    std::size_t columns_ = 0;
    std::size_t lineno_ = 0;
};

Date parse_date(const std::string& s, const std::string& where) {
    auto d = Date::parse(s);
    if (!d) throw ParseError(where + ": bad date '" + s + "'");
    return *d;
}

const std::string kPredictionsHeader =
    "ticker,date,p_fall,p_side,p_rise,predicted,confidence,true_label";
const std::string kMetricsHeader =
    "threshold,proportion,accuracy,f1_macro,precision_fall,precision_side,precision_rise,"
    "recall_fall,recall_side,recall_rise,f1_fall,f1_side,f1_rise,classes_counted";
const std::string kSelectedHeader = "label,threshold,f1_macro,accuracy,proportion";
const std::string kReportsHeader =
    "name,total_return,total_trades,win_rate,win_loss_ratio,max_drawdown,sharpe_ratio,"
    "frozen_events,skipped_signals";

}  // namespace

void save_predictions(const std::filesystem::path& path,
                      const std::vector<PredictionRecord>& records) {
    auto out = open_out(path);
    out << kPredictionsHeader << '\n';
    for (const auto& r : records)
        out << r.ticker << ',' << r.date.to_string() << ',' << csv::format_round_trip(r.probs.p0)
            << ',' << csv::format_round_trip(r.probs.p1) << ','
            << csv::format_round_trip(r.probs.p2) << ',' << r.predicted << ','
            << csv::format_round_trip(r.confidence) << ',' << r.true_label << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
    RowReader reader(path, kPredictionsHeader);
    std::vector<PredictionRecord> records;
    std::vector<std::string> f;
    while (reader.next(f)) {
        ClassProbs probs{csv::parse_double(f[2], "p_fall"), csv::parse_double(f[3], "p_side"),
                         csv::parse_double(f[4], "p_rise")};
        auto rec = PredictionRecord::make(f[0], parse_date(f[1], reader.where()), probs,
                                          csv::parse_int(f[7], "true_label"));
        if (rec.predicted != csv::parse_int(f[5], "predicted"))
            throw ParseError(reader.where() + ": predicted column disagrees with probabilities");
        records.push_back(std::move(rec));
    }
    return records;
}

void save_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
    auto out = open_out(path);
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << csv::format_round_trip(r.threshold) << ',' << csv::format_round_trip(r.proportion)
            << ',' << csv::format_round_trip(r.accuracy) << ','
            << csv::format_round_trip(r.f1_macro);
        for (const auto& triple : {r.precision, r.recall, r.f1})
            for (double v : triple) out << ',' << csv::format_round_trip(v);
        out << ',' << r.classes_counted << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<MetricsRow> load_metrics_csv(const std::filesystem::path& path) {
    RowReader reader(path, kMetricsHeader);
    std::vector<MetricsRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        MetricsRow r;
        r.threshold = csv::parse_double(f[0], "threshold");
        r.proportion = csv::parse_double(f[1], "proportion");
        r.accuracy = csv::parse_double(f[2], "accuracy");
        r.f1_macro = csv::parse_double(f[3], "f1_macro");
        for (int c = 0; c < 3; ++c) {
            r.precision[c] = csv::parse_double(f[4 + c], "precision");
            r.recall[c] = csv::parse_double(f[7 + c], "recall");
            r.f1[c] = csv::parse_double(f[10 + c], "f1");
        }
        r.classes_counted = csv::parse_int(f[13], "classes_counted");
        rows.push_back(r);
    }
    return rows;
}

void save_selected_csv(const std::filesystem::path& path,
                       const std::vector<SelectedConfig>& configs) {
    auto out = open_out(path);
    out << kSelectedHeader << '\n';
    for (const auto& c : configs)
        out << c.label_name << ',' << csv::format_round_trip(c.threshold) << ','
            << csv::format_round_trip(c.f1_macro) << ',' << csv::format_round_trip(c.accuracy)
            << ',' << csv::format_round_trip(c.proportion) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SelectedConfig> load_selected_csv(const std::filesystem::path& path) {
    RowReader reader(path, kSelectedHeader);
    std::vector<SelectedConfig> configs;
    std::vector<std::string> f;
    while (reader.next(f)) {
        SelectedConfig c;
        c.label_name = f[0];
        c.threshold = csv::parse_double(f[1], "threshold");
        c.f1_macro = csv::parse_double(f[2], "f1_macro");
        c.accuracy = csv::parse_double(f[3], "accuracy");
        c.proportion = csv::parse_double(f[4], "proportion");
        configs.push_back(std::move(c));
    }
    return configs;
}

void save_reports_csv(const std::filesystem::path& path,
                      const std::vector<BacktestReport>& reports) {
    auto out = open_out(path);
    out << kReportsHeader << '\n';
    for (const auto& r : reports)
        out << r.name << ',' << csv::format_round_trip(r.total_return) << ','
            << csv::format_round_trip(r.total_trades) << ',' << csv::format_round_trip(r.win_rate)
            << ',' << csv::format_round_trip(r.win_loss_ratio) << ','
            << csv::format_round_trip(r.max_drawdown) << ','
            << csv::format_round_trip(r.sharpe_ratio) << ','
            << csv::format_round_trip(r.frozen_events) << ','
            << csv::format_round_trip(r.skipped_signals) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<BacktestReport> load_reports_csv(const std::filesystem::path& path) {
    RowReader reader(path, kReportsHeader);
    std::vector<BacktestReport> reports;
    std::vector<std::string> f;
    while (reader.next(f)) {
        BacktestReport r;
        r.name = f[0];
        r.total_return = csv::parse_double(f[1], "total_return");
        r.total_trades = csv::parse_double(f[2], "total_trades");
        r.win_rate = csv::parse_double(f[3], "win_rate");
        r.win_loss_ratio = csv::parse_double(f[4], "win_loss_ratio");
        r.max_drawdown = csv::parse_double(f[5], "max_drawdown");
        r.sharpe_ratio = csv::parse_double(f[6], "sharpe_ratio");
        r.frozen_events = csv::parse_double(f[7], "frozen_events");
        r.skipped_signals = csv::parse_double(f[8], "skipped_signals");
        reports.push_back(std::move(r));
    }
    return reports;
}

void save_trades_csv(const std::filesystem::path& path, const std::vector<TradeRecord>& trades) {
    auto out = open_out(path);
    out << "ticker,entry_date,exit_date,entry_price,exit_price,shares,gross_pnl,fees,tax,"
           "net_pnl,exit_reason\n";
    for (const auto& t : trades)
        out << t.ticker << ',' << t.entry_date.to_string() << ',' << t.exit_date.to_string() << ','
            << csv::format_round_trip(t.entry_price) << ',' << csv::format_round_trip(t.exit_price)
            << ',' << t.shares << ',' << csv::format_round_trip(t.gross_pnl) << ','
            << csv::format_round_trip(t.fees) << ',' << csv::format_round_trip(t.tax) << ','
            << csv::format_round_trip(t.net_pnl) << ',' << to_string(t.exit_reason) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

void save_equity_csv(const std::filesystem::path& path, const std::vector<EquityPoint>& curve) {
    auto out = open_out(path);
    out << "date,equity\n";
    for (const auto& p : curve)
        out << p.date.to_string() << ',' << csv::format_round_trip(p.equity) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace barriernet
