#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wavechaos/error.hpp"
#include "wavechaos/graph.hpp"
#include "wavechaos/resonance.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/trace.hpp"
#include "wavechaos/types.hpp"
#include "wavechaos/wavefunction.hpp"

namespace wavechaos::io {

// Text helpers ---------------------------------------------------------------

/// 17 significant digits, enough to round-trip any double.
inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

inline double parse_number(const std::string& tok, const std::string& file, std::size_t line) {
    const std::string t = trim(tok);
    double v = 0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    const auto res = std::from_chars(first, last, v);
    if (t.empty() || res.ec != std::errc() || res.ptr != last) {
        throw ParseError(file, line, "expected a number, got '" + t + "'");
    }
    if (!std::isfinite(v)) throw ParseError(file, line, "non-finite value '" + t + "'");
    return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::vector<std::string> lines;
    std::string s;
    while (std::getline(in, s)) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
        lines.push_back(s);
    }
    return lines;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

/// "# key: value" header lines before the data.
inline std::string header_value(const std::vector<std::string>& lines, const std::string& key) {
    for (const auto& l : lines) {
        const auto t = trim(l);
        if (t.empty()) continue;
        if (t[0] != '#') break;
        const auto body = trim(t.substr(1));
        if (body.rfind(key + ":", 0) == 0) return trim(body.substr(key.size() + 1));
    }
    return "";
}

// Matrices -------------------------------------------------------------------

/// Row-major real/imag pairs for a square matrix.
inline CMatrix matrix_from_pairs(const std::vector<double>& v, const std::string& file, std::size_t line) {
    if (v.size() % 2 != 0) throw ParseError(file, line, "odd number of real/imag values");
    const auto n2 = v.size() / 2;
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n2))));
    if (n * n != n2 || n == 0) throw ParseError(file, line, "entry count is not a square matrix");
    CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n2; ++i)
        m(static_cast<Eigen::Index>(i / n), static_cast<Eigen::Index>(i % n)) = Complex(v[2 * i], v[2 * i + 1]);
    return m;
}

inline std::vector<double> numeric_row(const std::string& text, const std::string& file, std::size_t line) {
    std::vector<double> v;
    for (const auto& tok : split(text, ',')) v.push_back(parse_number(tok, file, line));
    return v;
}

inline bool skip_line(const std::string& t) { return t.empty() || t[0] == '#'; }

/// Rows "k, re00, im00, re01, im01, ...".
inline graph::TabulatedK read_tabulated(const std::string& path) {
    const auto lines = read_lines(path);
    graph::TabulatedK t;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto s = trim(lines[i]);
        if (skip_line(s) || std::isalpha(static_cast<unsigned char>(s[0]))) continue;
        auto row = numeric_row(s, path, i + 1);
        if (row.size() < 3) throw ParseError(path, i + 1, "expected k followed by matrix entries");
        const double k = row.front();
        row.erase(row.begin());
        if (!t.k_grid.empty() && !(k > t.k_grid.back())) throw ParseError(path, i + 1, "k grid not strictly ascending");
        t.k_grid.push_back(k);
        t.matrices.push_back(matrix_from_pairs(row, path, i + 1));
    }
    if (t.k_grid.size() < 2) throw ParseError(path, lines.size(), "tabulated condition needs at least 2 grid points");
    return t;
}

/// One matrix row per line, real/imag pairs.
inline CMatrix read_unitary(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<double> all;
    std::size_t rows = 0, last = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto s = trim(lines[i]);
        if (skip_line(s)) continue;
        const auto row = numeric_row(s, path, i + 1);
        all.insert(all.end(), row.begin(), row.end());
        ++rows;
        last = i + 1;
    }
    const CMatrix m = matrix_from_pairs(all, path, last);
    if (static_cast<std::size_t>(m.rows()) != rows) throw ParseError(path, last, "row count does not match matrix size");
    return m;
}

// Graph files ----------------------------------------------------------------

inline std::string unquote(const std::string& s) {
    const auto t = trim(s);
    if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) return t.substr(1, t.size() - 2);
    return t;
}

inline std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

/// Graph file, a TOML subset:
///
///   [vertices]
///   left = "dirichlet"          # neumann | dirichlet | unitary:<csv> | tabulated:<csv>
///   [bonds]
///   b0 = ["left", "right", 1.0] # endpoints and length in meters
///
/// Optional `[graph]` with `disconnected = true`. Matrix files are resolved
/// relative to the graph file.
inline graph::MetricGraph read_graph(const std::string& path) {
    const auto lines = read_lines(path);
    const auto dir = std::filesystem::path(path).parent_path();
    graph::MetricGraph g;
    std::string section;
    struct PendingBond {
        std::string id, a, b;
        double length;
        std::size_t line;
    };
    std::vector<PendingBond> bonds;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        const auto s = trim(strip_comment(lines[i]));
        if (s.empty()) continue;
        if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
            section = trim(s.substr(1, s.size() - 2));
            if (section != "vertices" && section != "bonds" && section != "graph")
                throw ParseError(path, ln, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(path, ln, "expected 'key = value'");
        const auto key = unquote(s.substr(0, eq));
        const auto value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError(path, ln, "empty key");
        if (section == "graph") {
            if (key == "disconnected") {
                if (value != "true" && value != "false") throw ParseError(path, ln, "disconnected must be true or false");
                g.allow_disconnected(value == "true");
            } else {
                throw ParseError(path, ln, "unknown graph option '" + key + "'");
            }
        } else if (section == "vertices") {
            const auto cond = unquote(value);
            graph::VertexCondition c;
            if (cond == "neumann") {
                c = graph::Neumann{};
            } else if (cond == "dirichlet") {
                c = graph::Dirichlet{};
            } else if (cond.rfind("unitary:", 0) == 0) {
                c = graph::CustomUnitary{read_unitary((dir / cond.substr(8)).string())};
            } else if (cond.rfind("tabulated:", 0) == 0) {
                c = read_tabulated((dir / cond.substr(10)).string());
            } else {
                throw ParseError(path, ln, "unknown vertex condition '" + cond + "'");
            }
            for (const auto& v : g.vertices())
                if (v.id == key) throw ParseError(path, ln, "duplicate vertex id '" + key + "'");
            g.add_vertex(key, std::move(c));
        } else if (section == "bonds") {
            if (value.size() < 2 || value.front() != '[' || value.back() != ']')
                throw ParseError(path, ln, "bond must be [\"vertexA\", \"vertexB\", length]");
            const auto parts = split(value.substr(1, value.size() - 2), ',');
            if (parts.size() != 3) throw ParseError(path, ln, "bond must list two endpoints and a length");
            const double len = parse_number(parts[2], path, ln);
            if (!(len > 0.0)) throw ParseError(path, ln, "bond length must be > 0");
            bonds.push_back({key, unquote(parts[0]), unquote(parts[1]), len, ln});
        } else {
            throw ParseError(path, ln, "entry outside a section");
        }
    }
    for (const auto& b : bonds) {
        std::size_t a = 0, c = 0;
        try {
            a = g.find_vertex(b.a);
            c = g.find_vertex(b.b);
        } catch (const InvalidArgument& e) {
            throw ParseError(path, b.line, e.what());
        }
        g.add_bond(b.id, a, c, b.length);
    }
    try {
        g.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(path, lines.size(), e.what());
    }
    return g;
}

// Spectra and curves ---------------------------------------------------------

/// "# unit: Hz", header "index,value", rows.
inline std::string spectrum_csv(const SpectrumSeries& s) {
    std::ostringstream os;
    os << "# unit: " << to_string(s.unit()) << "\nindex,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) os << i << ',' << fmt(s.values()[i]) << '\n';
    return os.str();
}

inline SpectrumSeries read_spectrum(const std::string& path, Provenance provenance = Provenance::Ingested) {
    const auto lines = read_lines(path);
    const auto unit_text = header_value(lines, "unit");
    if (unit_text.empty()) throw ParseError(path, 1, "missing '# unit: ...' header line");
    SpectrumUnit unit;
    try {
        unit = spectrum_unit_from_string(unit_text);
    } catch (const InvalidArgument& e) {
        throw ParseError(path, 1, e.what());
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto s = trim(lines[i]);
        if (skip_line(s) || std::isalpha(static_cast<unsigned char>(s[0]))) continue;
        const auto cols = split(s, ',');
        const double v = parse_number(cols.back(), path, i + 1);
        if (!values.empty() && v < values.back()) throw ParseError(path, i + 1, "spectrum not ascending");
        values.push_back(v);
    }
    return SpectrumSeries(std::move(values), unit, provenance);
}

inline std::string curve_csv(const StatCurve& c, const std::string& xname = "x", const std::string& yname = "y") {
    std::ostringstream os;
    os << "# kind: " << to_string(c.kind) << '\n' << xname << ',' << yname << '\n';
    for (std::size_t i = 0; i < c.x.size(); ++i) os << fmt(c.x[i]) << ',' << fmt(c.y[i]) << '\n';
    return os.str();
}

/// Several curves sharing one abscissa.
inline std::string columns_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols,
                               const std::string& comment = "") {
    std::ostringstream os;
    if (!comment.empty()) os << "# " << comment << '\n';
    for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
    os << '\n';
    const std::size_t n = cols.empty() ? 0 : cols.front().size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << fmt(cols[j][i]);
        os << '\n';
    }
    return os.str();
}

// Traces ---------------------------------------------------------------------

/// "# unit: Hz", header "f,Re S21,Im S21,...".
inline std::string trace_csv(const ComplexTrace& t) {
    std::ostringstream os;
    os << "# unit: " << t.unit << "\nf";
    for (const auto& p : t.pairs) os << ",Re S" << p.first << p.second << ",Im S" << p.first << p.second;
    os << '\n';
    for (std::size_t i = 0; i < t.f.size(); ++i) {
        os << fmt(t.f[i]);
        for (const auto& col : t.values) os << ',' << fmt(col[i].real()) << ',' << fmt(col[i].imag());
        os << '\n';
    }
    return os.str();
}

inline std::pair<int, int> parse_pair_name(const std::string& name, const std::string& file, std::size_t line) {
    // "S21" -> (2, 1)
    if (name.size() == 3 && (name[0] == 'S' || name[0] == 's') && std::isdigit(static_cast<unsigned char>(name[1])) &&
        std::isdigit(static_cast<unsigned char>(name[2]))) {
        return {name[1] - '0', name[2] - '0'};
    }
    throw ParseError(file, line, "cannot read S-parameter name '" + name + "'");
}

inline void check_grid_row(const ComplexTrace& t, double f, const std::string& path, std::size_t line) {
    if (!t.f.empty() && !(f > t.f.back())) throw ParseError(path, line, "frequency grid not ascending");
}

/// CSV trace. Columns are either "Re Sab,Im Sab" pairs or "|Sab|,arg Sab"
/// (magnitude and phase in radians).
inline ComplexTrace read_trace_csv(const std::string& path) {
    const auto lines = read_lines(path);
    ComplexTrace t;
    const auto unit = header_value(lines, "unit");
    t.unit = unit.empty() ? "Hz" : unit;
    bool polar = false;
    bool have_header = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        const auto s = trim(lines[i]);
        if (skip_line(s)) continue;
        const auto cols = split(s, ',');
        if (!have_header) {
            if (cols.size() < 3 || cols.size() % 2 == 0) throw ParseError(path, ln, "header must be f followed by column pairs");
            for (std::size_t c = 1; c < cols.size(); c += 2) {
                const auto& a = cols[c];
                const auto& b = cols[c + 1];
                std::string name;
                if (a.rfind("Re ", 0) == 0 && b.rfind("Im ", 0) == 0) {
                    name = trim(a.substr(3));
                    if (trim(b.substr(3)) != name) throw ParseError(path, ln, "mismatched Re/Im columns");
                    if (c > 1 && polar) throw ParseError(path, ln, "mixed column formats");
                } else if (a.size() > 2 && a.front() == '|' && a.back() == '|' && b.rfind("arg ", 0) == 0) {
                    name = a.substr(1, a.size() - 2);
                    if (trim(b.substr(4)) != name) throw ParseError(path, ln, "mismatched magnitude/phase columns");
                    if (c > 1 && !polar) throw ParseError(path, ln, "mixed column formats");
                    polar = true;
                } else {
                    throw ParseError(path, ln, "unrecognized columns '" + a + "," + b + "'");
                }
                t.pairs.push_back(parse_pair_name(name, path, ln));
            }
            t.values.resize(t.pairs.size());
            have_header = true;
            continue;
        }
        if (cols.size() != 1 + 2 * t.pairs.size()) throw ParseError(path, ln, "wrong column count");
        const double f = parse_number(cols[0], path, ln);
        check_grid_row(t, f, path, ln);
        t.f.push_back(f);
        for (std::size_t p = 0; p < t.pairs.size(); ++p) {
            const double a = parse_number(cols[1 + 2 * p], path, ln);
            const double b = parse_number(cols[2 + 2 * p], path, ln);
            t.values[p].push_back(polar ? std::polar(a, b) : Complex(a, b));
        }
    }
    if (!have_header) throw ParseError(path, lines.size(), "no header row");
    return t;
}

/// Touchstone-like .s1p/.s2p: '!' comments, option line "# <unit> S <RI|MA|DB> R <z0>",
/// rows of f followed by S11 (s1p) or S11 S21 S12 S22 (s2p) in the chosen format;
/// angles in degrees.
inline ComplexTrace read_touchstone(const std::string& path) {
    const auto lines = read_lines(path);
    double fscale = 1e9;  // Touchstone default unit GHz
    std::string format = "MA";
    bool have_options = false;
    ComplexTrace t;
    t.unit = "Hz";
    std::size_t ports = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        auto s = lines[i];
        if (const auto bang = s.find('!'); bang != std::string::npos) s = s.substr(0, bang);
        s = trim(s);
        if (s.empty()) continue;
        if (s[0] == '#') {
            if (have_options) throw ParseError(path, ln, "second option line");
            have_options = true;
            auto toks = split_ws(s.substr(1));
            for (std::size_t k = 0; k < toks.size(); ++k) {
                std::string u = toks[k];
                std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
                if (u == "HZ") fscale = 1.0;
                else if (u == "KHZ") fscale = 1e3;
                else if (u == "MHZ") fscale = 1e6;
                else if (u == "GHZ") fscale = 1e9;
                else if (u == "RI" || u == "MA" || u == "DB") format = u;
                else if (u == "S") continue;
                else if (u == "R") ++k;  // reference impedance, unused
                else throw ParseError(path, ln, "unsupported option '" + toks[k] + "'");
            }
            continue;
        }
        const auto toks = split_ws(s);
        if (ports == 0) {
            if (toks.size() == 3) ports = 1;
            else if (toks.size() == 9) ports = 2;
            else throw ParseError(path, ln, "expected 3 (one-port) or 9 (two-port) columns");
            if (ports == 1) t.pairs = {{1, 1}};
            else t.pairs = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
            t.values.resize(t.pairs.size());
        }
        if (toks.size() != 1 + 2 * t.pairs.size()) throw ParseError(path, ln, "wrong column count");
        const double f = parse_number(toks[0], path, ln) * fscale;
        check_grid_row(t, f, path, ln);
        t.f.push_back(f);
        for (std::size_t p = 0; p < t.pairs.size(); ++p) {
            const double a = parse_number(toks[1 + 2 * p], path, ln);
            const double b = parse_number(toks[2 + 2 * p], path, ln);
            Complex v;
            if (format == "RI") v = Complex(a, b);
            else if (format == "MA") v = std::polar(a, b * kPi / 180.0);
            else v = std::polar(std::pow(10.0, a / 20.0), b * kPi / 180.0);
            t.values[p].push_back(v);
        }
    }
    if (t.f.empty()) throw ParseError(path, lines.size(), "no data rows");
    return t;
}

inline ComplexTrace read_trace(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".s1p" || ext == ".s2p" || ext == ".S1P" || ext == ".S2P") return read_touchstone(path);
    return read_trace_csv(path);
}

// Wave-function scans --------------------------------------------------------

/// Path manifest: rows "bond,length" in scan order.
inline std::vector<wavefun::PathSegment> read_path_manifest(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<wavefun::PathSegment> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto s = trim(lines[i]);
        if (skip_line(s) || std::isalpha(static_cast<unsigned char>(s[0]))) continue;
        const auto cols = split(s, ',');
        if (cols.size() != 2) throw ParseError(path, i + 1, "expected bond,length");
        const double b = parse_number(cols[0], path, i + 1);
        const double len = parse_number(cols[1], path, i + 1);
        if (b != std::floor(b)) throw ParseError(path, i + 1, "bond id must be an integer");
        if (!(len > 0.0)) throw ParseError(path, i + 1, "bond length must be > 0");
        out.push_back({static_cast<int>(b), len});
    }
    if (out.empty()) throw ParseError(path, lines.size(), "empty path manifest");
    return out;
}

/// Intensity map: rows "bond,arc,intensity".
inline wavefun::IntensityMap read_intensity_map(const std::string& path, std::vector<wavefun::PathSegment> segments) {
    const auto lines = read_lines(path);
    wavefun::IntensityMap map;
    map.path = std::move(segments);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto s = trim(lines[i]);
        if (skip_line(s) || std::isalpha(static_cast<unsigned char>(s[0]))) continue;
        const auto cols = split(s, ',');
        if (cols.size() != 3) throw ParseError(path, i + 1, "expected bond,arc,intensity");
        const double b = parse_number(cols[0], path, i + 1);
        const double arc = parse_number(cols[1], path, i + 1);
        const double v = parse_number(cols[2], path, i + 1);
        if (v < 0.0) throw ParseError(path, i + 1, "negative intensity");
        if (!map.samples.empty() && arc < map.samples.back().arc) throw ParseError(path, i + 1, "arc positions not ascending");
        map.samples.push_back({static_cast<int>(b), arc, v});
    }
    if (map.samples.empty()) throw ParseError(path, lines.size(), "no samples");
    return map;
}

// Resonance tables -----------------------------------------------------------

inline std::string resonance_csv(const std::vector<resonance::FitReport>& reports) {
    std::ostringstream os;
    os << "f,gamma,strength,Q,converged,residual\n";
    for (const auto& r : reports)
        for (const auto& p : r.params)
            os << fmt(p.f) << ',' << fmt(p.gamma) << ',' << fmt(p.strength()) << ',' << fmt(p.f / p.gamma) << ','
               << (r.converged ? 1 : 0) << ',' << fmt(r.residual_norm) << '\n';
    return os.str();
}

}  // namespace wavechaos::io
