#pragma once

// Dataset manifests: one JSON object per line with keys
//   path (string), label ("cover" | "stego"), scheme (optional string),
//   role ("train" | "eval" | "unsplit", optional, default "unsplit").

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "stegica/error.hpp"

namespace stegica {

enum class Label { cover = 0, stego = 1 };
enum class Role { train, eval, unsplit };

inline std::string_view to_string(Label l) { return l == Label::cover ? "cover" : "stego"; }

inline std::string_view to_string(Role r) {
    switch (r) {
    case Role::train: return "train";
    case Role::eval: return "eval";
    case Role::unsplit: break;
    }
    return "unsplit";
}

inline Label parse_label(std::string_view s) {
    if (s == "cover") return Label::cover;
    if (s == "stego") return Label::stego;
    throw DataError("unknown label '" + std::string(s) + "' (expected cover or stego)");
}

inline Role parse_role(std::string_view s) {
    if (s == "train") return Role::train;
    if (s == "eval") return Role::eval;
    if (s == "unsplit") return Role::unsplit;
    throw DataError("unknown role '" + std::string(s) + "' (expected train, eval or unsplit)");
}

struct ManifestEntry {
    std::string path;
    Label label = Label::cover;
    std::optional<std::string> scheme;
    Role role = Role::unsplit;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct LabelCounts {
    std::size_t cover = 0;
    std::size_t stego = 0;

    bool balanced() const { return cover == stego; }
};

class DatasetManifest {
public:
    DatasetManifest() = default;

    /// Appends an entry; throws DataError on a duplicate path.
    void add(ManifestEntry e) {
        if (!paths_.insert(e.path).second) throw DataError("duplicate manifest path '" + e.path + "'");
        entries_.push_back(std::move(e));
    }

    const std::vector<ManifestEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    LabelCounts counts() const {
        LabelCounts c;
        for (const auto& e : entries_) (e.label == Label::cover ? c.cover : c.stego)++;
        return c;
    }

    friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) { return a.entries_ == b.entries_; }

private:
    std::vector<ManifestEntry> entries_;
    std::unordered_set<std::string> paths_;
};

inline std::string manifest_line(const ManifestEntry& e) {
    nlohmann::ordered_json j;
    j["path"] = e.path;
    j["label"] = to_string(e.label);
    if (e.scheme) j["scheme"] = *e.scheme;
    j["role"] = to_string(e.role);
    return j.dump();
}

inline ManifestEntry parse_manifest_line(std::string_view line, std::size_t lineno) {
    const auto where = "manifest line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& ex) {
        throw DataError(where + ex.what());
    }
    if (!j.is_object()) throw DataError(where + "expected a JSON object");
    if (!j.contains("path") || !j["path"].is_string()) throw DataError(where + "missing string key 'path'");
    if (!j.contains("label") || !j["label"].is_string()) throw DataError(where + "missing string key 'label'");
    ManifestEntry e;
    e.path = j["path"].get<std::string>();
    try {
        e.label = parse_label(j["label"].get<std::string>());
        if (j.contains("role")) {
            if (!j["role"].is_string()) throw DataError("'role' must be a string");
            e.role = parse_role(j["role"].get<std::string>());
        }
    } catch (const DataError& ex) {
        throw DataError(where + ex.what());
    }
    if (j.contains("scheme") && !j["scheme"].is_null()) {
        if (!j["scheme"].is_string()) throw DataError(where + "'scheme' must be a string");
        e.scheme = j["scheme"].get<std::string>();
    }
    return e;
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    DatasetManifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        m.add(parse_manifest_line(line, lineno));
    }
    return m;
}

inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest " + path.string());
    for (const auto& e : m.entries()) out << manifest_line(e) << '\n';
    if (!out) throw DataError("write failure on " + path.string());
}

/// Resolves a manifest path relative to the directory holding the manifest.
inline std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path, const std::string& entry) {
    std::filesystem::path p(entry);
    if (p.is_absolute()) return p;
    return manifest_path.parent_path() / p;
}

} // namespace stegica
