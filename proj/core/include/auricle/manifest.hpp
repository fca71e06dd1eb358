#pragma once

#include <string>
#include <vector>

namespace auricle {

// One dataset record: a WAV path and, for labeled sets, a class index.
struct ManifestEntry {
    std::string path;
    int label = -1;  // -1 = unlabeled

    bool has_label() const { return label >= 0; }
};

// Line-delimited manifest, one flat JSON object per line with fields `path`
// and optional non-negative `label`. Blank lines are skipped, order is kept,
// and errors cite 1-based line numbers. Relative paths are resolved against
// the manifest's own directory.
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Inverse of load_manifest; paths are written as given.
void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

}  // namespace auricle
