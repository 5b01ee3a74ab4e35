#include "barriernet/dataset_io.hpp"

#include <fstream>

#include "barriernet/binio.hpp"
#include "barriernet/csv.hpp"
#include "barriernet/errors.hpp"

namespace barriernet {

namespace {
constexpr std::uint32_t kDatasetVersion = 1;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    binio::Writer w(out);
    w.raw(kDatasetMagic, 8);
    w.value(kDatasetVersion);
    w.value(std::int32_t(ds.spec.horizon_days));
    w.value(double(ds.spec.barrier_pct));
    w.value(std::int32_t(ds.window));
    w.value(std::uint64_t(ds.counts.emitted));
    w.value(std::uint64_t(ds.counts.skipped_history));
    w.value(std::uint64_t(ds.counts.skipped_future));
    w.value(std::uint64_t(ds.samples.size()));
    for (const auto& s : ds.samples) {
        w.string(s.ticker);
        w.value(std::int32_t(s.decision_date.serial()));
        w.value(double(s.reference_close));
        w.value(std::int8_t(s.label));
        w.value(std::uint8_t(s.uncertain ? 1 : 0));
        if (s.window.length() != ds.window)
            throw ValidationError("sample window length " + std::to_string(s.window.length()) +
                                  " does not match dataset window " + std::to_string(ds.window));
        w.raw(s.window.data().data(), s.window.data().size() * sizeof(double));
    }
    w.finish();
    if (!out) throw IoError("write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    binio::Reader r(in, path.filename().string());
    char magic[8];
    r.raw(magic, 8);
    if (std::string_view(magic, 8) != std::string_view(kDatasetMagic, 8))
        throw IoError(path.filename().string() + ": not a dataset file");
    auto version = r.value<std::uint32_t>();
    if (version != kDatasetVersion)
        throw IoError(path.filename().string() + ": unsupported dataset version " +
                      std::to_string(version));

    Dataset ds;
    ds.spec.horizon_days = r.value<std::int32_t>();
    ds.spec.barrier_pct = r.value<double>();
    ds.window = r.value<std::int32_t>();
    if (ds.window < 1 || ds.window > 1 << 20)
        throw IoError(path.filename().string() + ": implausible window length " +
                      std::to_string(ds.window));
    ds.counts.emitted = r.value<std::uint64_t>();
    ds.counts.skipped_history = r.value<std::uint64_t>();
    ds.counts.skipped_future = r.value<std::uint64_t>();
    auto n = r.value<std::uint64_t>();
    if (n > (1ULL << 32))
        throw IoError(path.filename().string() + ": implausible sample count " + std::to_string(n));

    ds.samples.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        LabeledSample s;
        s.ticker = r.string();
        s.decision_date = Date::from_serial(r.value<std::int32_t>());
        s.reference_close = r.value<double>();
        s.label = r.value<std::int8_t>();
        s.uncertain = r.value<std::uint8_t>() != 0;
        if (s.label < 0 || s.label > 2)
            throw IoError(path.filename().string() + ": bad label " + std::to_string(s.label));
        s.window = FeatureWindow(ds.window);
        r.raw(s.window.data().data(), s.window.data().size() * sizeof(double));
        ds.samples.push_back(std::move(s));
    }
    r.verify();
    return ds;
}

void write_manifest(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "ticker,date,label,uncertain\n";
    for (const auto& s : ds.samples)
        out << s.ticker << ',' << s.decision_date.to_string() << ',' << s.label << ','
            << (s.uncertain ? 1 : 0) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ManifestRow> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::vector<ManifestRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("ticker,", 0) == 0) continue;
        auto fields = csv::split(line, ',');
        if (fields.size() != 4)
            throw ParseError(path.filename().string() + ":" + std::to_string(lineno) +
                             ": expected 4 fields, got " + std::to_string(fields.size()));
        ManifestRow row;
        row.ticker = fields[0];
        auto d = Date::parse(fields[1]);
        if (!d)
            throw ParseError(path.filename().string() + ":" + std::to_string(lineno) +
                             ": bad date '" + fields[1] + "'");
        row.date = *d;
        row.label = csv::parse_int(fields[2], "label");
        row.uncertain = csv::parse_int(fields[3], "uncertain") != 0;
        if (row.label < 0 || row.label > 2)
            throw ParseError(path.filename().string() + ":" + std::to_string(lineno) +
                             ": bad label " + fields[2]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace barriernet
