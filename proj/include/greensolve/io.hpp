#pragma once

// JSON and CSV encodings for matrices, generators, spectrum sets, trig
// polynomials, sampled functions, Green tables and solver reports.

#include "greensolve/errors.hpp"
#include "greensolve/generator.hpp"
#include "greensolve/green.hpp"
#include "greensolve/harmonic.hpp"
#include "greensolve/sets.hpp"
#include "greensolve/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace greensolve::io {

using json = nlohmann::json;
using harmonic::SampledFunction;
using harmonic::TrigPolynomial;
using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::cplx;

namespace detail {

/// Infinite endpoints travel as null.
inline json endpoint(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double endpoint(const json& j, double infinity) {
    if (j.is_null()) return infinity;
    if (!j.is_number()) throw ConfigError("interval endpoint must be a number or null");
    return j.get<double>();
}

inline const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

inline double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError(what + " must be a number");
    return j.get<double>();
}

inline std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

// ---- vectors and matrices -------------------------------------------------

inline json to_json(const ComplexVector& v) {
    json re = json::array(), im = json::array();
    for (const auto& z : v) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    return {{"re", re}, {"im", im}};
}

/// {"re": [...], "im": [...]} with "im" optional, or a bare array of reals.
inline ComplexVector vector_from_json(const json& j) {
    if (j.is_array()) {
        ComplexVector v(j.size());
        for (std::size_t i = 0; i < j.size(); ++i) v[i] = detail::number(j[i], "vector entry");
        return v;
    }
    const auto& re = detail::require(j, "re", "vector");
    if (!re.is_array()) throw ConfigError("vector: \"re\" must be an array");
    ComplexVector v(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) v[i] = detail::number(re[i], "vector entry");
    if (j.contains("im")) {
        const auto& im = j.at("im");
        if (!im.is_array() || im.size() != re.size()) throw ConfigError("vector: \"im\" must match \"re\"");
        for (std::size_t i = 0; i < im.size(); ++i) v[i] += cplx(0.0, detail::number(im[i], "vector entry"));
    }
    return v;
}

inline json to_json(const ComplexMatrix& m) {
    json re = json::array(), im = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array(), s = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            r.push_back(m(i, j).real());
            s.push_back(m(i, j).imag());
        }
        re.push_back(r);
        im.push_back(s);
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

/// {"rows", "cols", "re": [[...]], "im": [[...]]}; rows, cols and im optional.
/// {"diagonal": vector} builds a diagonal matrix.
inline ComplexMatrix matrix_from_json(const json& j) {
    if (j.is_object() && j.contains("diagonal")) {
        const auto d = vector_from_json(j.at("diagonal"));
        return ComplexMatrix::diagonal(std::vector<cplx>(d.begin(), d.end()));
    }
    const auto& re = detail::require(j, "re", "matrix");
    if (!re.is_array() || re.empty()) throw ConfigError("matrix: \"re\" must be a nonempty array of rows");
    const std::size_t rows = re.size(), cols = re[0].is_array() ? re[0].size() : 0;
    if (cols == 0) throw ConfigError("matrix: rows must be nonempty arrays");
    if (j.contains("rows") && j.at("rows").get<std::size_t>() != rows) throw ConfigError("matrix: \"rows\" disagrees with the data");
    if (j.contains("cols") && j.at("cols").get<std::size_t>() != cols) throw ConfigError("matrix: \"cols\" disagrees with the data");
    ComplexMatrix m(rows, cols);
    const json* im = j.contains("im") ? &j.at("im") : nullptr;
    if (im && (!im->is_array() || im->size() != rows)) throw ConfigError("matrix: \"im\" must match \"re\"");
    for (std::size_t r = 0; r < rows; ++r) {
        if (!re[r].is_array() || re[r].size() != cols) throw ConfigError("matrix: ragged rows");
        if (im && (!(*im)[r].is_array() || (*im)[r].size() != cols)) throw ConfigError("matrix: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            double x = detail::number(re[r][c], "matrix entry");
            double y = im ? detail::number((*im)[r][c], "matrix entry") : 0.0;
            m(r, c) = cplx(x, y);
        }
    }
    return m;
}

// ---- generators -----------------------------------------------------------

inline json to_json(const gen::GeneratorSpec& g) {
    json j;
    if (g.is_matrix()) {
        j["kind"] = "matrix";
        j["matrix"] = to_json(g.matrix());
    } else {
        j["kind"] = "oracle";
        json poles = json::array();
        for (const auto& p : g.matrix().diagonal_entries()) poles.push_back({{"re", p.real()}, {"im", p.imag()}});
        j["poles"] = poles;
    }
    j["theta"] = g.theta();
    return j;
}

/// {"kind": "matrix", "matrix": {...}} or {"kind": "oracle", "poles": [{"re", "im"}]},
/// optionally with "theta". An oracle may also be given as a family
/// {"family": {"exponent": e, "count": n}} for poles -k^e + ik.
inline gen::GeneratorSpec generator_from_json(const json& j) {
    const std::string kind = detail::require(j, "kind", "generator").get<std::string>();
    std::optional<double> theta;
    if (j.contains("theta") && !j.at("theta").is_null()) theta = detail::number(j.at("theta"), "generator theta");
    if (kind == "matrix") return gen::GeneratorSpec::from_matrix(matrix_from_json(detail::require(j, "matrix", "generator")), theta);
    if (kind == "oracle") {
        std::vector<cplx> poles;
        if (j.contains("family")) {
            const auto& f = j.at("family");
            const double e = detail::number(detail::require(f, "exponent", "family"), "family exponent");
            const int n = detail::require(f, "count", "family").get<int>();
            if (n < 1) throw ConfigError("family count must be positive");
            for (int k = 1; k <= n; ++k) poles.emplace_back(-std::pow(k, e), k);
        } else {
            const auto& list = detail::require(j, "poles", "generator");
            if (!list.is_array() || list.empty()) throw ConfigError("generator: \"poles\" must be a nonempty array");
            for (const auto& p : list)
                poles.emplace_back(detail::number(detail::require(p, "re", "pole"), "pole"), p.contains("im") ? detail::number(p.at("im"), "pole") : 0.0);
        }
        return gen::GeneratorSpec::from_poles(std::move(poles), theta);
    }
    throw ConfigError("generator kind must be \"matrix\" or \"oracle\"");
}

// ---- spectrum sets --------------------------------------------------------

inline json to_json(const SpectrumSet& s) {
    json pts = json::array(), ivs = json::array();
    for (double p : s.points()) pts.push_back(p);
    for (const auto& iv : s.intervals()) ivs.push_back(json::array({detail::endpoint(iv.lo), detail::endpoint(iv.hi)}));
    return {{"points", pts}, {"intervals", ivs}};
}

/// "R" for the whole line, otherwise {"points": [...], "intervals": [[lo, hi], ...]}
/// with null for an infinite endpoint.
inline SpectrumSet spectrum_set_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "R") return SpectrumSet::whole_line();
        throw ConfigError("spectrum set string must be \"R\"");
    }
    if (!j.is_object()) throw ConfigError("spectrum set must be an object or \"R\"");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pts;
    std::vector<Interval> ivs;
    if (j.contains("points"))
        for (const auto& p : j.at("points")) pts.push_back(detail::number(p, "spectrum point"));
    if (j.contains("intervals"))
        for (const auto& iv : j.at("intervals")) {
            if (!iv.is_array() || iv.size() != 2) throw ConfigError("interval must be a pair [lo, hi]");
            const double lo = detail::endpoint(iv[0], -inf), hi = detail::endpoint(iv[1], inf);
            if (lo > hi) throw ConfigError("interval has lo > hi");
            ivs.push_back({lo, hi});
        }
    return SpectrumSet(std::move(pts), std::move(ivs));
}

// ---- trig polynomials -----------------------------------------------------

inline json to_json(const TrigPolynomial& p) {
    json terms = json::array();
    for (const auto& t : p.terms()) terms.push_back({{"lambda", t.lambda}, {"x", to_json(t.x)}});
    return {{"dimension", p.dimension()}, {"terms", terms}};
}

inline TrigPolynomial trig_from_json(const json& j, std::size_t dim) {
    const auto& terms = detail::require(j, "terms", "trig input");
    if (!terms.is_array()) throw ConfigError("trig input: \"terms\" must be an array");
    TrigPolynomial p(dim);
    for (const auto& t : terms) {
        const double lambda = detail::number(detail::require(t, "lambda", "trig term"), "lambda");
        auto x = vector_from_json(detail::require(t, "x", "trig term"));
        if (x.size() != dim) throw ConfigError("trig term amplitude has the wrong dimension");
        p.add(lambda, std::move(x));
    }
    return p;
}

// ---- sampled functions (CSV) ----------------------------------------------

/// Header "t0,step,dim", one line of those values, then one row per sample
/// with interleaved re,im per component.
inline void write_sampled_csv(std::ostream& os, const SampledFunction& f) {
    os << "t0,step,dim\n" << detail::format(f.t0()) << ',' << detail::format(f.step()) << ',' << f.dimension() << '\n';
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (std::size_t d = 0; d < f.dimension(); ++d) {
            if (d) os << ',';
            os << detail::format(f[i][d].real()) << ',' << detail::format(f[i][d].imag());
        }
        os << '\n';
    }
}

inline SampledFunction read_sampled_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("t0,step,dim", 0) != 0) throw ConfigError("sampled CSV: missing t0,step,dim header");
    if (!std::getline(is, line)) throw ConfigError("sampled CSV: missing header values");
    double t0 = 0.0, step = 0.0;
    std::size_t dim = 0;
    {
        std::istringstream hs(line);
        char c1 = 0, c2 = 0;
        if (!(hs >> t0 >> c1 >> step >> c2 >> dim) || c1 != ',' || c2 != ',' || dim == 0) throw ConfigError("sampled CSV: bad header values");
    }
    std::vector<ComplexVector> values;
    std::size_t row = 2;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::vector<double> nums;
        std::string cell;
        while (std::getline(rs, cell, ',')) {
            try {
                std::size_t used = 0;
                nums.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ConfigError("sampled CSV: bad number on row " + std::to_string(row));
            }
        }
        if (nums.size() != 2 * dim) throw ConfigError("sampled CSV: row " + std::to_string(row) + " has the wrong width");
        ComplexVector v(dim);
        for (std::size_t d = 0; d < dim; ++d) v[d] = cplx(nums[2 * d], nums[2 * d + 1]);
        values.push_back(std::move(v));
    }
    if (values.empty()) throw ConfigError("sampled CSV: no samples");
    try {
        return SampledFunction(t0, step, std::move(values));
    } catch (const Error& e) {
        throw ConfigError(std::string("sampled CSV: ") + e.what());
    }
}

inline SampledFunction read_sampled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return read_sampled_csv(in);
}

inline void write_sampled_csv(const std::string& path, const SampledFunction& f) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    write_sampled_csv(out, f);
}

// ---- Green function table -------------------------------------------------

/// Columns t, re_G<i><j>, im_G<i><j> on t = k step for 0 < |t| <= reach.
inline void write_green_csv(std::ostream& os, const green::GreenFunction& gf, double reach, double step) {
    const std::size_t n = gf.dimension();
    os << 't';
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) os << ",re_G" << i << j << ",im_G" << i << j;
    os << '\n';
    const long count = static_cast<long>(std::floor(reach / step + 1e-9));
    for (long k = -count; k <= count; ++k) {
        if (k == 0) continue;
        const double t = static_cast<double>(k) * step;
        const auto g = gf.at(t);
        os << detail::format(t);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) os << ',' << detail::format(g(i, j).real()) << ',' << detail::format(g(i, j).imag());
        os << '\n';
    }
}

/// Rows of a Green table as (t, G(t)).
inline std::vector<std::pair<double, ComplexMatrix>> read_green_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("t,", 0) != 0) throw ConfigError("green CSV: bad header");
    const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    const std::size_t n = static_cast<std::size_t>(std::llround(std::sqrt(cols / 2.0)));
    if (2 * n * n != cols) throw ConfigError("green CSV: header is not a square table");
    std::vector<std::pair<double, ComplexMatrix>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::string cell;
        std::vector<double> nums;
        while (std::getline(rs, cell, ',')) nums.push_back(std::stod(cell));
        if (nums.size() != cols + 1) throw ConfigError("green CSV: ragged row");
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = cplx(nums[1 + 2 * (i * n + j)], nums[2 + 2 * (i * n + j)]);
        rows.push_back({nums[0], std::move(m)});
    }
    return rows;
}

// ---- reports --------------------------------------------------------------

/// NaN and infinities have no JSON spelling; they are written as null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json intervals_json(const std::vector<Interval>& ivs) {
    json out = json::array();
    for (const auto& iv : ivs) out.push_back(json::array({detail::endpoint(iv.lo), detail::endpoint(iv.hi)}));
    return out;
}

inline json to_json(const solver::MildSolutionReport& r) {
    json moc = json::array();
    for (const auto& [h, w] : r.modulus_of_continuity) moc.push_back({{"h", h}, {"sup_increment", num(w)}});
    json j{
        {"residual_variation_of_constants", num(r.residual_variation_of_constants)},
        {"residual_integral_form", num(r.residual_integral_form)},
        {"sup_norm", num(r.sup_norm)},
        {"modulus_of_continuity", moc},
        {"spectrum_check", r.spectrum_check},
        {"input_spectrum", to_json(r.input_spectrum)},
        {"solution_spectrum", to_json(r.solution_spectrum)},
        {"K", r.K},
        {"a", r.a},
        {"delta", r.delta},
        {"eta", num(r.eta)},
        {"solution_window", {{"t0", r.solution.t0()}, {"step", r.solution.step()}, {"size", r.solution.size()}}},
    };
    if (r.green_built) {
        j["green"] = {{"l1_norm", num(r.l1_norm)},
                      {"c2", num(r.c2)},
                      {"truncation_bound", num(r.truncation_bound)},
                      {"young_bound", num(r.young_bound)},
                      {"margin", r.margin},
                      {"M", intervals_json(r.M)}};
    }
    if (r.trig_solution) {
        j["trig_solution"] = to_json(*r.trig_solution);
        j["convolution_vs_trig"] = num(r.convolution_vs_trig);
    }
    return j;
}

inline json to_json(const solver::SpikeReport& r) {
    json inc = json::array();
    for (const auto& [n, v] : r.increments) inc.push_back({{"n", n}, {"increment", v}});
    return {{"n_max", r.n_max}, {"sup_norm", r.sup_norm}, {"stepanoff_norm", r.stepanoff_norm},
            {"stepanoff_ok", r.stepanoff_ok}, {"increments", inc}};
}

inline json to_json(const gen::DecayFit& f) {
    return {{"theta_hat", f.theta_hat}, {"eta_hat", f.eta_hat}, {"delta", f.delta}};
}

} // namespace greensolve::io
