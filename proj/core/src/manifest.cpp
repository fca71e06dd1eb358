#include "auricle/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "auricle/errors.hpp"

namespace auricle {

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("manifest: cannot open '" + path + "'");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    std::vector<ManifestEntry> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(lineno);

        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ManifestError(where + ": not a valid record: " + e.what());
        }
        if (!rec.is_object()) throw ManifestError(where + ": record must be an object");
        if (!rec.contains("path") || !rec["path"].is_string()) {
            throw ManifestError(where + ": missing string field 'path'");
        }

        ManifestEntry entry;
        entry.path = rec["path"].get<std::string>();
        if (rec.contains("label")) {
            if (!rec["label"].is_number_unsigned()) {
                throw ManifestError(where + ": 'label' must be a non-negative integer");
            }
            entry.label = rec["label"].get<int>();
        }
        const std::filesystem::path p(entry.path);
        if (p.is_relative() && !base.empty()) entry.path = (base / p).string();
        out.push_back(std::move(entry));
    }
    return out;
}

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("manifest: cannot open '" + path + "' for writing");
    for (const ManifestEntry& e : entries) {
        nlohmann::json rec;
        rec["path"] = e.path;
        if (e.has_label()) rec["label"] = e.label;
        f << rec.dump() << "\n";
    }
    if (!f) throw IoError("manifest: short write to '" + path + "'");
}

}  // namespace auricle
