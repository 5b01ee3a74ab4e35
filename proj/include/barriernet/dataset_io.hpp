#pragma once

#include <filesystem>
#include <vector>

#include "barriernet/labeling.hpp"

namespace barriernet {

inline constexpr char kDatasetMagic[9] = "BNETDS01";

// Binary dataset: magic, version, label spec, window length, build counts,
// then each sample (ticker, date, reference close, label, uncertain flag,
// 5 x window feature doubles), then an FNV-1a 64 digest of everything above.
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

// Throws IoError on truncation, bad magic or version, or checksum mismatch.
Dataset load_dataset(const std::filesystem::path& path);

// One row per sample, no feature data. Lets downstream steps (stats, joins
// with predictions) avoid loading windows.
struct ManifestRow {
    std::string ticker;
    Date date;
    int label = kLabelSide;
    bool uncertain = false;
};

void write_manifest(const std::filesystem::path& path, const Dataset& ds);

std::vector<ManifestRow> load_manifest(const std::filesystem::path& path);

}  // namespace barriernet
