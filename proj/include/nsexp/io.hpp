#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsexp/analysis.hpp"
#include "nsexp/error.hpp"
#include "nsexp/expansion.hpp"
#include "nsexp/galerkin.hpp"
#include "nsexp/polynomial.hpp"

namespace nsexp::io {

using json = nlohmann::json;

/// Input that does not match the scenario schema; the message starts with the field path.
class SchemaError : public InvalidInput {
public:
    SchemaError(const std::string& path, const std::string& msg) : InvalidInput(path + ": " + msg), path_(path) {}
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// 17 significant digits.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Shortest round-trip form, for file names and labels.
inline std::string short_fmt(double x) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

inline std::string spec_label(const NormSpec& s) { return "a" + short_fmt(s.alpha) + "_s" + short_fmt(s.sigma); }

// ---------------------------------------------------------------- literals

inline json field_to_json(const SpectralField& f) {
    json arr = json::array();
    for (const auto& e : f.entries()) {
        arr.push_back({{"k", {e.k.k1, e.k.k2, e.k.k3}},
                       {"re", {e.c[0].real(), e.c[1].real(), e.c[2].real()}},
                       {"im", {e.c[0].imag(), e.c[1].imag(), e.c[2].imag()}}});
    }
    return arr;
}

namespace detail {

inline const json& member(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "required field is missing");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    return j.get<double>();
}

inline long long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
    return j.get<long long>();
}

inline std::array<double, 3> triple(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw SchemaError(path, "expected an array of 3 numbers");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

}  // namespace detail

/// Parses a field literal: one record per Hermitian pair; the conjugate mode is implied.
inline SpectralField field_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of mode records");
    std::map<WaveVector, Vec3> acc;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const json& kj = detail::member(j[i], "k", p);
        if (!kj.is_array() || kj.size() != 3) throw SchemaError(p + ".k", "expected an array of 3 integers");
        const WaveVector k{static_cast<int>(detail::integer(kj[0], p + ".k[0]")),
                           static_cast<int>(detail::integer(kj[1], p + ".k[1]")),
                           static_cast<int>(detail::integer(kj[2], p + ".k[2]"))};
        if (k.is_zero()) throw SchemaError(p + ".k", "the zero mode is not allowed (zero-average fields)");
        const auto re = detail::triple(detail::member(j[i], "re", p), p + ".re");
        std::array<double, 3> im{};
        if (j[i].contains("im")) im = detail::triple(j[i]["im"], p + ".im");
        Vec3 c{Complex(re[0], im[0]), Complex(re[1], im[1]), Complex(re[2], im[2])};
        WaveVector key = k;
        if (!k.is_canonical()) {
            key = -k;
            c = conj(c);
        }
        if (acc.count(key)) throw SchemaError(p + ".k", "mode " + k.to_string() + " repeats a Hermitian pair");
        acc[key] = c;
    }
    return SpectralField::from_map(acc);
}

inline json poly_to_json(const FieldPolynomial& p) {
    json arr = json::array();
    for (const auto& c : p.coeffs()) arr.push_back(field_to_json(c));
    return {{"degree_coeffs", arr}};
}

inline FieldPolynomial poly_from_json(const json& j, const std::string& path) {
    const json& arr = detail::member(j, "degree_coeffs", path);
    if (!arr.is_array()) throw SchemaError(path + ".degree_coeffs", "expected an array of field literals");
    std::vector<SpectralField> coeffs;
    for (std::size_t d = 0; d < arr.size(); ++d)
        coeffs.push_back(field_from_json(arr[d], path + ".degree_coeffs[" + std::to_string(d) + "]"));
    return FieldPolynomial(std::move(coeffs));
}

inline json force_to_json(const ForceExpansion& f) {
    json terms = json::array();
    for (const auto& t : f.terms) {
        json tj = poly_to_json(t.f);
        tj["n"] = t.n;
        terms.push_back(tj);
    }
    json rem = json::array();
    for (const auto& r : f.remainder) rem.push_back({{"rate", r.rate}, {"field", field_to_json(r.field)}});
    return {{"terms", terms}, {"remainder", rem}};
}

inline ForceExpansion force_from_json(const json& j, const std::string& path) {
    ForceExpansion f;
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    if (j.contains("terms")) {
        const json& terms = j["terms"];
        if (!terms.is_array()) throw SchemaError(path + ".terms", "expected an array");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string p = path + ".terms[" + std::to_string(i) + "]";
            const long long n = detail::integer(detail::member(terms[i], "n", p), p + ".n");
            if (n < 1) throw SchemaError(p + ".n", "level must be >= 1");
            f.terms.push_back({static_cast<int>(n), poly_from_json(terms[i], p)});
        }
    }
    if (j.contains("remainder")) {
        const json& rem = j["remainder"];
        if (!rem.is_array()) throw SchemaError(path + ".remainder", "expected an array");
        for (std::size_t i = 0; i < rem.size(); ++i) {
            const std::string p = path + ".remainder[" + std::to_string(i) + "]";
            f.remainder.push_back({detail::number(detail::member(rem[i], "rate", p), p + ".rate"),
                                   field_from_json(detail::member(rem[i], "field", p), p + ".field")});
        }
    }
    try {
        f.validate();
    } catch (const InvalidInput& e) {
        throw SchemaError(path, e.what());
    }
    return f;
}

inline json resonant_to_json(const ResonantData& r) {
    json o = json::object();
    for (const auto& [n, xi] : r) o[std::to_string(n)] = field_to_json(xi);
    return o;
}

inline ResonantData resonant_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object keyed by level");
    ResonantData r;
    for (auto it = j.begin(); it != j.end(); ++it) {
        int n = 0;
        auto [p, ec] = std::from_chars(it.key().data(), it.key().data() + it.key().size(), n);
        if (ec != std::errc{} || p != it.key().data() + it.key().size() || n < 1)
            throw SchemaError(path + "." + it.key(), "key must be a positive level number");
        r[n] = field_from_json(it.value(), path + "." + it.key());
    }
    return r;
}

inline json expansion_to_json(const ExpansionResult& r, const ResonantData& resonant) {
    json levels = json::array();
    for (const auto& t : r.terms) {
        json lj = poly_to_json(t.q);
        lj["n"] = t.n;
        levels.push_back(lj);
    }
    json res = json::object();
    for (const auto& [n, v] : r.residuals) res[std::to_string(n)] = v;
    json log = json::array();
    for (const auto& h : r.resonance_log) log.push_back({{"n", h.n}, {"eigenvalue", h.eigenvalue}});
    return {{"levels", levels}, {"residuals", res}, {"resonance_log", log}, {"resonant_data", resonant_to_json(resonant)}};
}

/// Reads one per-level document {"n": n, "degree_coeffs": [...]}.
inline ExpansionTerm term_from_json(const json& j, const std::string& path) {
    const long long n = detail::integer(detail::member(j, "n", path), path + ".n");
    if (n < 1) throw SchemaError(path + ".n", "level must be >= 1");
    return {static_cast<int>(n), poly_from_json(j, path)};
}

inline json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw InvalidInput("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(p.string() + ": malformed JSON: " + e.what());
    }
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << s;
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(1) + "\n"); }

/// Loads q_n documents (q_<n>.json) from a directory, ordered by level.
inline std::vector<ExpansionTerm> read_expansion_dir(const std::filesystem::path& dir) {
    std::vector<ExpansionTerm> terms;
    for (int n = 1;; ++n) {
        const auto p = dir / ("q_" + std::to_string(n) + ".json");
        if (!std::filesystem::exists(p)) break;
        terms.push_back(term_from_json(read_json_file(p), p.filename().string()));
        if (terms.back().n != n) throw SchemaError(p.filename().string() + ".n", "does not match the file's level");
    }
    return terms;
}

// ---------------------------------------------------------------- CSV

/// Header `t, re(k1 u1), im(k1 u1), ...`; mode j of the manifest is column group kj.
inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t";
    for (std::size_t j = 0; j < traj.modes.size(); ++j)
        for (int c = 1; c <= 3; ++c) os << ",re(k" << j + 1 << " u" << c << "),im(k" << j + 1 << " u" << c << ")";
    os << "\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << fmt(traj.times[i]);
        for (const auto& k : traj.modes) {
            const Vec3 v = traj.states[i].at(k);
            for (int c = 0; c < 3; ++c) os << "," << fmt(v[c].real()) << "," << fmt(v[c].imag());
        }
        os << "\n";
    }
    return os.str();
}

inline std::string mode_manifest_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "mode,k1,k2,k3,eigenvalue\n";
    for (std::size_t j = 0; j < traj.modes.size(); ++j) {
        const auto& k = traj.modes[j];
        os << "k" << j + 1 << "," << k.k1 << "," << k.k2 << "," << k.k3 << "," << k.eigenvalue() << "\n";
    }
    return os.str();
}

inline std::string series_csv(const NormSeries& s) {
    std::ostringstream os;
    os << "t,value\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) os << fmt(s.times[i]) << "," << fmt(s.values[i]) << "\n";
    return os.str();
}

/// gnuplot-ready two-column TSV with the fit in comment lines.
inline std::string series_tsv(const NormSeries& s, const RateFit& fit) {
    std::ostringstream os;
    if (fit.floor_dominated)
        os << "# slope=floor-dominated\n";
    else
        os << "# slope=" << fmt(fit.slope) << "\n# intercept=" << fmt(fit.intercept) << "\n# rms=" << fmt(fit.rms_residual)
           << "\n";
    os << "# window=" << fmt(fit.window.t_a) << " " << fmt(fit.window.t_b) << "\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) os << fmt(s.times[i]) << "\t" << fmt(s.values[i]) << "\n";
    return os.str();
}

}  // namespace nsexp::io
