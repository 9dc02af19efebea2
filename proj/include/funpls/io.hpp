#pragma once

// CSV and JSON input/output.
//
// CSV layouts: curves = n rows of m comma-separated values, no header;
// grid = header `point,weight` then one row per abscissa; responses = one
// value per line. Parse errors carry 1-based line and column.
//
// JSON documents (nlohmann::json): fitted models, spectral models, benchmark
// specs and rate specs. Doubles are written in shortest round-trip form, so
// a serialize/parse cycle is bit-exact.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "funpls/simbench.hpp"

namespace funpls::io {

using nlohmann::json;

class ParseError : public InputError {
public:
    ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& what)
        : InputError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

/// %.17g, the format every numeric CSV field uses.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

struct Field {
    std::string_view text;
    std::size_t column;  // 1-based character column of the first character
};

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    // Trailing blank lines are not rows.
    while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos) lines.pop_back();
    return lines;
}

inline std::vector<Field> split_fields(std::string_view line) {
    std::vector<Field> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t end = line.find(',', start);
        std::string_view f = line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        std::size_t col = start + 1;
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) {
            f.remove_prefix(1);
            ++col;
        }
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
        out.push_back({f, col});
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

inline double parse_double(const Field& f, const std::string& source, std::size_t line) {
    std::string_view s = f.text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(source, line, f.column, "expected a number, got '" + std::string(f.text) + "'");
    if (!std::isfinite(v)) throw ParseError(source, line, f.column, "non-finite value");
    return v;
}

}  // namespace detail

/// n x m matrix of curve values; every row must have the same length.
inline Matrix parse_curves_csv(std::string_view text, const std::string& source = "curves") {
    const auto lines = detail::split_lines(text);
    if (lines.empty()) throw ParseError(source, 1, 1, "no rows");
    std::vector<std::vector<double>> rows;
    rows.reserve(lines.size());
    std::size_t m = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = detail::split_fields(lines[i]);
        if (i == 0) m = fields.size();
        if (fields.size() != m)
            throw ParseError(source, i + 1, 1,
                             "expected " + std::to_string(m) + " values, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(m);
        for (const auto& f : fields) row.push_back(detail::parse_double(f, source, i + 1));
        rows.push_back(std::move(row));
    }
    Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(m));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m; ++j) x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return x;
}

inline Vector parse_responses_csv(std::string_view text, const std::string& source = "responses") {
    const auto lines = detail::split_lines(text);
    if (lines.empty()) throw ParseError(source, 1, 1, "no values");
    Vector y(static_cast<Index>(lines.size()));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = detail::split_fields(lines[i]);
        if (fields.size() != 1) throw ParseError(source, i + 1, fields[1].column - 1, "expected one value per line");
        y(static_cast<Index>(i)) = detail::parse_double(fields[0], source, i + 1);
    }
    return y;
}

/// Header `point,weight`; the interval is [first point, last point].
inline Grid parse_grid_csv(std::string_view text, const std::string& source = "grid") {
    const auto lines = detail::split_lines(text);
    if (lines.empty()) throw ParseError(source, 1, 1, "empty grid file");
    const auto header = detail::split_fields(lines[0]);
    if (header.size() != 2 || header[0].text != "point" || header[1].text != "weight")
        throw ParseError(source, 1, 1, "expected header 'point,weight'");
    const auto m = static_cast<Index>(lines.size() - 1);
    Vector pts(m), w(m);
    for (Index i = 0; i < m; ++i) {
        const std::size_t line = static_cast<std::size_t>(i) + 2;
        const auto fields = detail::split_fields(lines[static_cast<std::size_t>(i) + 1]);
        if (fields.size() != 2) throw ParseError(source, line, 1, "expected 'point,weight'");
        pts(i) = detail::parse_double(fields[0], source, line);
        w(i) = detail::parse_double(fields[1], source, line);
    }
    try {
        return Grid(std::move(pts), std::move(w));
    } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
    }
}

inline Matrix read_curves_csv(const std::filesystem::path& p) { return parse_curves_csv(read_file(p), p.string()); }
inline Vector read_responses_csv(const std::filesystem::path& p) {
    return parse_responses_csv(read_file(p), p.string());
}
inline Grid read_grid_csv(const std::filesystem::path& p) { return parse_grid_csv(read_file(p), p.string()); }

inline std::string curves_to_csv(const Matrix& x) {
    std::string out;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            if (j) out += ',';
            out += fmt17(x(i, j));
        }
        out += '\n';
    }
    return out;
}

inline std::string vector_to_csv(const Vector& v) {
    std::string out;
    for (Index i = 0; i < v.size(); ++i) out += fmt17(v(i)) + '\n';
    return out;
}

inline std::string grid_to_csv(const Grid& g) {
    std::string out = "point,weight\n";
    for (Index i = 0; i < g.size(); ++i) out += fmt17(g.points()(i)) + ',' + fmt17(g.weights()(i)) + '\n';
    return out;
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
    return j.at(key);
}

template <class T>
T get_as(const json& j, const char* key, const std::string& where) {
    try {
        return require(j, key, where).get<T>();
    } catch (const json::exception& e) {
        throw InputError(where + ": field '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    return get_as<T>(j, key, where);
}

inline json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from(const json& j, const std::string& where) {
    try {
        const auto v = j.get<std::vector<double>>();
        return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
    } catch (const json::exception& e) {
        throw InputError(where + ": " + e.what());
    }
}

inline Vector vector_field(const json& j, const char* key, const std::string& where) {
    return vector_from(require(j, key, where), where + "." + key);
}

inline std::vector<Curve> curves_field(const json& j, const char* key, const GridPtr& grid, const std::string& where) {
    const json& arr = require(j, key, where);
    if (!arr.is_array()) throw InputError(where + ": '" + key + "' must be an array of arrays");
    std::vector<Curve> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Vector v = vector_from(arr[i], where + "." + key + "[" + std::to_string(i) + "]");
        if (v.size() != grid->size())
            throw InputError(where + ": " + key + "[" + std::to_string(i) + "] has " + std::to_string(v.size()) +
                             " values, grid has " + std::to_string(grid->size()));
        out.emplace_back(grid, std::move(v));
    }
    return out;
}

inline std::uint64_t seed_field(const json& j, const std::string& where) {
    const json& s = require(j, "seed", where);
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        throw InputError(where + ": seed must be a nonnegative integer");
    return s.get<std::uint64_t>();
}

inline std::size_t count_field(const json& j, const char* key, std::size_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw InputError(where + ": '" + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

inline Curve curve_from(const json& j, const GridPtr& grid, const std::string& where) {
    Vector v = vector_from(j, where);
    if (v.size() != grid->size()) throw InputError(where + ": length does not match grid");
    return Curve(grid, std::move(v));
}

}  // namespace detail

inline json grid_to_json(const Grid& g) {
    return {{"points", detail::to_json(g.points())},
            {"weights", detail::to_json(g.weights())},
            {"lower", g.lower()},
            {"upper", g.upper()}};
}

/// Full form {points, weights, lower, upper}; `weights` may be omitted for
/// trapezoid weights; shorthand {lower, upper, size} is a uniform grid.
inline Grid grid_from_json(const json& j, const std::string& where = "grid") {
    try {
        if (!j.is_object()) throw InputError(where + ": expected an object");
        if (!j.contains("points")) {
            const auto m = static_cast<Index>(detail::count_field(j, "size", 0, where));
            return Grid::uniform(detail::get_as<double>(j, "lower", where), detail::get_as<double>(j, "upper", where), m);
        }
        Vector pts = detail::vector_field(j, "points", where);
        if (!j.contains("weights")) {
            Grid t = Grid::trapezoid(pts);
            if (j.contains("lower") || j.contains("upper"))
                throw InputError(where + ": lower/upper need explicit weights");
            return t;
        }
        Vector w = detail::vector_field(j, "weights", where);
        if (j.contains("lower") || j.contains("upper"))
            return Grid(std::move(pts), std::move(w), detail::get_as<double>(j, "lower", where),
                        detail::get_as<double>(j, "upper", where));
        return Grid(std::move(pts), std::move(w));
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(where + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Fitted models

inline json model_to_json(const LinearModel& m) {
    json basis = json::array();
    for (const Curve& c : m.basis) basis.push_back(detail::to_json(c.values));
    return {{"variant", m.variant},
            {"p", m.p},
            {"grid", grid_to_json(*m.grid())},
            {"mean_curve", detail::to_json(m.mean_curve.values)},
            {"mean_y", m.mean_y},
            {"basis", std::move(basis)},
            {"coefficients", detail::to_json(m.coefficients)}};
}

inline LinearModel model_from_json(const json& j) {
    const std::string where = "model";
    const auto variant = detail::get_as<std::string>(j, "variant", where);
    static const char* known[] = {"raw", "qr_stabilized", "ortho_basis", "classic", "pca"};
    if (std::find(std::begin(known), std::end(known), variant) == std::end(known))
        throw InputError("model: unknown variant '" + variant + "'");
    const std::size_t p = detail::count_field(j, "p", 0, where);
    GridPtr grid = share(grid_from_json(detail::require(j, "grid", where), "model.grid"));
    Curve mean = detail::curve_from(detail::require(j, "mean_curve", where), grid, "model.mean_curve");
    const double mean_y = detail::get_as<double>(j, "mean_y", where);
    std::vector<Curve> basis = detail::curves_field(j, "basis", grid, where);
    Vector coef = detail::vector_field(j, "coefficients", where);
    if (p < 1 || basis.size() != p || static_cast<std::size_t>(coef.size()) != p)
        throw InputError("model: p, basis and coefficients disagree");
    return LinearModel::assemble(variant, p, std::move(mean), mean_y, std::move(basis), std::move(coef));
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Spectral models

inline json spectral_to_json(const SpectralModel& m) {
    json phi = json::array();
    for (const Curve& c : m.eigenfunctions) phi.push_back(detail::to_json(c.values));
    return {{"grid", grid_to_json(*m.grid)},
            {"eigenvalues", detail::to_json(m.eigenvalues)},
            {"eigenfunction_values", std::move(phi)},
            {"slope_coefficients", detail::to_json(m.slope_coefficients)},
            {"noise_sd", m.noise_sd},
            {"mean_curve_values", detail::to_json(m.mean_curve.values)}};
}

/// `eigenfunction_values` may be replaced by "basis": "sine" (the first r
/// orthonormalized sine functions); `mean_curve_values` defaults to zero.
inline SpectralModel spectral_from_json(const json& j) {
    const std::string where = "spectral model";
    GridPtr grid = share(grid_from_json(detail::require(j, "grid", where), "spectral model.grid"));
    Vector theta = detail::vector_field(j, "eigenvalues", where);
    Vector beta = detail::vector_field(j, "slope_coefficients", where);
    const double sigma = detail::get_or<double>(j, "noise_sd", 0.0, where);
    std::vector<Curve> phi;
    if (j.contains("eigenfunction_values")) {
        phi = detail::curves_field(j, "eigenfunction_values", grid, where);
    } else if (detail::get_or<std::string>(j, "basis", "", where) == "sine") {
        phi = sine_basis(grid, static_cast<std::size_t>(theta.size()));
    } else {
        throw InputError(where + ": missing field 'eigenfunction_values'");
    }
    Curve mean = j.contains("mean_curve_values")
                     ? detail::curve_from(j.at("mean_curve_values"), grid, "spectral model.mean_curve_values")
                     : Curve::zero(grid);
    return SpectralModel(grid, std::move(theta), std::move(phi), std::move(beta), sigma, std::move(mean));
}

// ---------------------------------------------------------------------------
// Benchmark and rate specs. Relative file paths resolve against `base`.

namespace detail {

inline SpectralModel model_source(const json& j, const std::filesystem::path& base, const std::string& where) {
    if (j.contains("model")) return spectral_from_json(j.at("model"));
    const auto file = get_as<std::string>(j, "model_file", where);
    json doc;
    try {
        doc = json::parse(read_file(base / file));
    } catch (const json::parse_error& e) {
        throw InputError(file + ": " + e.what());
    }
    return spectral_from_json(doc);
}

}  // namespace detail

inline SimulationSpec simulation_spec_from_json(const json& j, const std::filesystem::path& base = ".") {
    const std::string where = "bench spec";
    if (!j.is_object()) throw InputError(where + ": expected an object");
    SimulationSpec s;
    if (j.contains("curves_file")) {
        if (j.contains("model") || j.contains("model_file"))
            throw InputError(where + ": give either a model or curves_file, not both");
        Matrix x = read_curves_csv(base / detail::get_as<std::string>(j, "curves_file", where));
        GridPtr grid = j.contains("grid_file")
                           ? share(read_grid_csv(base / detail::get_as<std::string>(j, "grid_file", where)))
                           : share(Grid::integer(x.cols()));
        if (grid->size() != x.cols()) throw InputError(where + ": grid does not match the curves");
        s.curves = CurveSet(grid, std::move(x));
        if (j.contains("responses_file"))
            s.responses = read_responses_csv(base / detail::get_as<std::string>(j, "responses_file", where));
    } else {
        s.model = detail::model_source(j, base, where);
    }
    s.pattern = parse_case(detail::get_or<std::string>(j, "case", "custom", where));
    s.components = detail::count_field(j, "components", s.components, where);
    s.n_train = detail::count_field(j, "n_train", s.n_train, where);
    s.n_test = detail::count_field(j, "n_test", s.n_test, where);
    s.replicates = detail::count_field(j, "replicates", s.replicates, where);
    s.seed = detail::seed_field(j, where);
    if (j.contains("p_range")) {
        const auto r = detail::get_as<std::vector<std::size_t>>(j, "p_range", where);
        if (r.size() != 2) throw InputError(where + ": p_range must be [p_min, p_max]");
        s.p_min = r[0];
        s.p_max = r[1];
    } else {
        s.p_min = detail::count_field(j, "p_min", s.p_min, where);
        s.p_max = detail::count_field(j, "p_max", s.p_min, where);
    }
    if (j.contains("methods")) {
        s.methods.clear();
        for (const auto& name : detail::get_as<std::vector<std::string>>(j, "methods", where))
            s.methods.push_back(parse_method(name));
    }
    s.sigma_rule = detail::get_or<bool>(j, "sigma_rule", s.sigma_rule, where);
    s.noise_sd = detail::get_or<double>(j, "noise_sd", s.noise_sd, where);
    s.validate();
    return s;
}

struct RateSpec {
    SpectralModel model;
    std::vector<std::size_t> n_values;
    std::vector<std::size_t> j_values;
    std::size_t replicates;
    std::uint64_t seed;
};

/// An optional "kernel_norm" rescales the model so that the Hilbert-Schmidt
/// norm of K equals it.
inline RateSpec rate_spec_from_json(const json& j, const std::filesystem::path& base = ".") {
    const std::string where = "rate spec";
    if (!j.is_object()) throw InputError(where + ": expected an object");
    SpectralModel model = detail::model_source(j, base, where);
    if (j.contains("kernel_norm")) {
        const double target = detail::get_as<double>(j, "kernel_norm", where);
        if (!(target > 0.0)) throw InputError(where + ": kernel_norm must be positive");
        model = rescaled(model, target / model.kernel_hs_norm());
    }
    RateSpec s{std::move(model), detail::get_as<std::vector<std::size_t>>(j, "n_values", where),
               detail::get_as<std::vector<std::size_t>>(j, "j_values", where),
               detail::count_field(j, "replicates", 1, where), detail::seed_field(j, where)};
    if (s.replicates < 1) throw InputError(where + ": replicates must be >= 1");
    return s;
}

// ---------------------------------------------------------------------------
// Result CSVs

inline std::string records_to_csv(const std::vector<BenchRecord>& records) {
    std::string out = "method,p,replicate,pe,ise,pe_hat,error\n";
    const auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
    for (const auto& r : records) {
        out += std::string(method_name(r.method)) + ',' + std::to_string(r.p) + ',' + std::to_string(r.replicate) +
               ',' + opt(r.pe) + ',' + opt(r.ise) + ',' + opt(r.pe_hat) + ',' + r.error + '\n';
    }
    return out;
}

inline std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "method,p,metric,count,min,q1,median,q3,max\n";
    for (const auto& r : rows) {
        out += std::string(method_name(r.method)) + ',' + std::to_string(r.p) + ',' + r.metric + ',' +
               std::to_string(r.count) + ',' + fmt17(r.min) + ',' + fmt17(r.q1) + ',' + fmt17(r.median) + ',' +
               fmt17(r.q3) + ',' + fmt17(r.max) + '\n';
    }
    return out;
}

inline std::string rates_to_csv(const std::vector<RateRow>& rows) {
    std::string out = "n,j,median_err,h_err,slope\n";
    for (const auto& r : rows)
        out += std::to_string(r.n) + ',' + std::to_string(r.j) + ',' + fmt17(r.median_err) + ',' + fmt17(r.h_err) +
               ',' + fmt17(r.slope) + '\n';
    return out;
}

/// One row per j with both fitted slopes.
inline std::string rate_slopes_to_csv(const std::vector<RateRow>& rows) {
    std::string out = "j,slope,h_slope\n";
    std::vector<std::size_t> seen;
    for (const auto& r : rows) {
        if (std::find(seen.begin(), seen.end(), r.j) != seen.end()) continue;
        seen.push_back(r.j);
        out += std::to_string(r.j) + ',' + fmt17(r.slope) + ',' + fmt17(r.h_slope) + '\n';
    }
    return out;
}

}  // namespace funpls::io
