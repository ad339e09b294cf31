#pragma once

// Versioned text serialization of a trained SVM:
//
//   stegica-svm 1
//   dim <d>
//   gamma_k <real>
//   C <real>
//   bias <real>
//   mean <d reals>
//   scale <d reals>
//   support_vectors <M>
//   <dual coef> <d reals>      (M lines)
//   end
//
// Reals are written with 17 significant digits, so a reload is exact.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/feature_store.hpp"
#include "stegica/svm.hpp"

namespace stegica {

inline constexpr const char* kModelTag = "stegica-svm";
inline constexpr int kModelVersion = 1;

inline void save_model(const SVMModel& m, std::ostream& out) {
    if (m.support_vectors.rows() == 0) throw DataError("refusing to save a model with no support vectors");
    const Eigen::Index d = m.dim();
    if (m.standardizer.dim() != d || m.dual_coefs.size() != m.support_vectors.rows())
        throw DataError("inconsistent model dimensions");
    out << kModelTag << ' ' << kModelVersion << '\n';
    out << "dim " << d << '\n';
    out << "gamma_k " << format_real(m.gamma_k) << '\n';
    out << "C " << format_real(m.C) << '\n';
    out << "bias " << format_real(m.bias) << '\n';
    out << "mean";
    for (Eigen::Index k = 0; k < d; ++k) out << ' ' << format_real(m.standardizer.mean(k));
    out << "\nscale";
    for (Eigen::Index k = 0; k < d; ++k) out << ' ' << format_real(m.standardizer.scale(k));
    out << "\nsupport_vectors " << m.support_vectors.rows() << '\n';
    for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
        out << format_real(m.dual_coefs(i));
        for (Eigen::Index k = 0; k < d; ++k) out << ' ' << format_real(m.support_vectors(i, k));
        out << '\n';
    }
    out << "end\n";
}

inline void save_model(const SVMModel& m, const std::filesystem::path& path) {
    std::ostringstream buf;
    save_model(m, buf);
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << buf.str();
    if (!out) throw DataError("write failure on " + path.string());
}

namespace detail {

class ModelReader {
public:
    explicit ModelReader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw DataError("model file is truncated");
        return w;
    }

    void expect(const std::string& key) {
        const std::string w = word();
        if (w != key) throw DataError("model file: expected '" + key + "', found '" + w + "'");
    }

    double real() {
        const std::string w = word();
        double v = 0.0;
        const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || p != w.data() + w.size() || !std::isfinite(v))
            throw DataError("model file: bad number '" + w + "'");
        return v;
    }

    long integer() {
        const std::string w = word();
        long v = 0;
        const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || p != w.data() + w.size() || v < 0)
            throw DataError("model file: bad count '" + w + "'");
        return v;
    }

private:
    std::istream& in_;
};

} // namespace detail

inline SVMModel load_model(std::istream& in) {
    detail::ModelReader r(in);
    if (r.word() != kModelTag) throw DataError("not a stegica SVM model file");
    const std::string version = r.word();
    if (version != std::to_string(kModelVersion))
        throw DataError("unsupported model version '" + version + "' (expected " + std::to_string(kModelVersion) + ")");
    SVMModel m;
    r.expect("dim");
    const long d = r.integer();
    if (d == 0) throw DataError("model file: zero dimension");
    r.expect("gamma_k");
    m.gamma_k = r.real();
    r.expect("C");
    m.C = r.real();
    r.expect("bias");
    m.bias = r.real();
    m.standardizer.mean.resize(d);
    m.standardizer.scale.resize(d);
    r.expect("mean");
    for (long k = 0; k < d; ++k) m.standardizer.mean(k) = r.real();
    r.expect("scale");
    for (long k = 0; k < d; ++k) m.standardizer.scale(k) = r.real();
    r.expect("support_vectors");
    const long count = r.integer();
    if (count == 0) throw DataError("model file: no support vectors");
    m.support_vectors.resize(count, d);
    m.dual_coefs.resize(count);
    for (long i = 0; i < count; ++i) {
        m.dual_coefs(i) = r.real();
        for (long k = 0; k < d; ++k) m.support_vectors(i, k) = r.real();
    }
    r.expect("end");
    if (!(m.gamma_k > 0) || !(m.C > 0)) throw DataError("model file: gamma_k and C must be positive");
    for (long k = 0; k < d; ++k)
        if (!(m.standardizer.scale(k) > 0)) throw DataError("model file: scale entries must be positive");
    return m;
}

inline SVMModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return load_model(in);
}

} // namespace stegica
