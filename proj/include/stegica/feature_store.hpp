#pragma once

// Feature CSV:
//   path,label,mu1,mu2,sigma1,sigma2,gamma1,gamma2,kappa1,kappa2
// label is 0 (cover) or 1 (stego); reals use 17 significant digits so that
// every finite double round-trips exactly.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/manifest.hpp"

namespace stegica {

inline constexpr std::size_t kFeatureDim = 8;

inline constexpr std::array<std::string_view, 10> kFeatureColumns = {
    "path", "label", "mu1", "mu2", "sigma1", "sigma2", "gamma1", "gamma2", "kappa1", "kappa2"};

struct FeatureRecord {
    std::string path;
    Label label = Label::cover;
    std::array<double, kFeatureDim> features{};

    friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string csv_quote(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::vector<std::string> csv_split(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

inline double parse_real(const std::string& s, std::size_t lineno) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("feature file line " + std::to_string(lineno) + ": bad number '" + s + "'");
    if (!std::isfinite(v)) throw DataError("feature file line " + std::to_string(lineno) + ": non-finite value");
    return v;
}

} // namespace detail

inline std::string feature_header() {
    std::string h;
    for (std::size_t i = 0; i < kFeatureColumns.size(); ++i) {
        if (i) h += ',';
        h += kFeatureColumns[i];
    }
    return h;
}

inline void write_features(const std::vector<FeatureRecord>& records, std::ostream& out) {
    out << feature_header() << '\n';
    for (const auto& r : records) {
        for (double v : r.features)
            if (!std::isfinite(v)) throw DataError("non-finite feature value for '" + r.path + "'");
        out << detail::csv_quote(r.path) << ',' << static_cast<int>(r.label);
        for (double v : r.features) out << ',' << format_real(v);
        out << '\n';
    }
}

inline void write_features(const std::vector<FeatureRecord>& records, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_features(records, buf);
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << buf.str();
    if (!out) throw DataError("write failure on " + path.string());
}

inline std::vector<FeatureRecord> read_features(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("feature file is empty (missing header)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::csv_split(line);
    for (std::size_t i = 0; i < kFeatureColumns.size(); ++i) {
        if (i >= header.size() || header[i] != kFeatureColumns[i])
            throw DataError("feature file header mismatch: expected column '" + std::string(kFeatureColumns[i]) +
                            "' at position " + std::to_string(i + 1));
    }
    if (header.size() != kFeatureColumns.size())
        throw DataError("feature file header has unexpected extra column '" + header[kFeatureColumns.size()] + "'");

    std::vector<FeatureRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::csv_split(line);
        if (f.size() != kFeatureColumns.size())
            throw DataError("feature file line " + std::to_string(lineno) + ": expected " +
                            std::to_string(kFeatureColumns.size()) + " fields, got " + std::to_string(f.size()));
        FeatureRecord r;
        r.path = f[0];
        if (f[1] == "0") {
            r.label = Label::cover;
        } else if (f[1] == "1") {
            r.label = Label::stego;
        } else {
            throw DataError("feature file line " + std::to_string(lineno) + ": label must be 0 or 1");
        }
        for (std::size_t k = 0; k < kFeatureDim; ++k) r.features[k] = detail::parse_real(f[k + 2], lineno);
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<FeatureRecord> read_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return read_features(in);
}

} // namespace stegica
