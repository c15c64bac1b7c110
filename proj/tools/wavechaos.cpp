// wavechaos command-line workbench.
//
// Every subcommand writes CSV artifacts plus manifest.json into --out and
// prints the manifest to stdout. Failures go to stderr as one JSON object and
// the exit status is nonzero.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wavechaos/error.hpp"
#include "wavechaos/graph.hpp"
#include "wavechaos/io.hpp"
#include "wavechaos/length_spectrum.hpp"
#include "wavechaos/missing_levels.hpp"
#include "wavechaos/orbits.hpp"
#include "wavechaos/parallel.hpp"
#include "wavechaos/reference.hpp"
#include "wavechaos/resonance.hpp"
#include "wavechaos/rmt.hpp"
#include "wavechaos/scattering.hpp"
#include "wavechaos/secular.hpp"
#include "wavechaos/special.hpp"
#include "wavechaos/statistics.hpp"
#include "wavechaos/unfolding.hpp"
#include "wavechaos/waveguide.hpp"
#include "wavechaos/wavefunction.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace wavechaos;

namespace {

constexpr const char* kVersion = "1.0.0";

/// FNV-1a, 64 bit. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

/// Collects artifacts, parameters and results for one run.
class Run {
public:
    Run(std::string subcommand, std::string out_dir) : subcommand_(std::move(subcommand)), out_(std::move(out_dir)) {
        manifest_["tool"] = "wavechaos";
        manifest_["version"] = kVersion;
        manifest_["subcommand"] = subcommand_;
        manifest_["inputs"] = json::array();
        manifest_["seeds"] = json::object();
        manifest_["parameters"] = json::object();
        manifest_["results"] = json::object();
        manifest_["outputs"] = json::array();
    }

    json& parameters() { return manifest_["parameters"]; }
    json& results() { return manifest_["results"]; }
    void seed(const std::string& name, std::uint64_t v) { manifest_["seeds"][name] = v; }

    void input(const std::string& path) {
        std::string content;
        for (const auto& l : io::read_lines(path)) content += l + '\n';
        manifest_["inputs"].push_back({{"path", path}, {"fnv1a64", hex(fnv1a(content))}});
    }

    void emit(const std::string& name, const std::string& content) {
        fs::create_directories(out_);
        io::write_file((fs::path(out_) / name).string(), content);
        manifest_["outputs"].push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", hex(fnv1a(content))}});
        digest_ = fnv1a(name + '\n' + content, digest_);
    }

    void finish() {
        manifest_["digest"] = hex(digest_);
        const auto text = manifest_.dump(2) + '\n';
        fs::create_directories(out_);
        io::write_file((fs::path(out_) / "manifest.json").string(), text);
        std::cout << text;
    }

private:
    std::string subcommand_;
    std::string out_;
    json manifest_;
    std::uint64_t digest_ = 0xcbf29ce484222325ull;
};

/// "lo:hi:step", inclusive of hi up to rounding.
std::vector<double> parse_grid(const std::string& text) {
    const auto parts = io::split(text, ':');
    if (parts.size() != 3) throw InvalidArgument("grid '" + text + "' must be lo:hi:step");
    const double lo = io::parse_number(parts[0], "--grid", 0);
    const double hi = io::parse_number(parts[1], "--grid", 0);
    const double step = io::parse_number(parts[2], "--grid", 0);
    if (!(step > 0.0) || !(hi >= lo)) throw InvalidArgument("grid '" + text + "' needs step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    if (n > 10'000'000) throw ResourceLimit("grid '" + text + "' has more than 1e7 points");
    std::vector<double> g;
    for (std::size_t i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

std::string pair_label(int a, int b) { return "S" + std::to_string(a) + std::to_string(b); }

// Subcommands ----------------------------------------------------------------

struct GraphSpectrumArgs {
    std::string graph, out = ".";
    double kmin = 1e-6, kmax = 0;
    double step_fraction = 0.1;
};

void graph_spectrum(const GraphSpectrumArgs& a) {
    Run run("graph-spectrum", a.out);
    run.input(a.graph);
    const auto g = io::read_graph(a.graph);
    graph::RootOptions opt;
    opt.scan_step_fraction = a.step_fraction;
    const auto list = graph::find_eigenwavenumbers(g, a.kmin, a.kmax, opt);
    run.parameters() = {{"graph", a.graph}, {"kmin", a.kmin}, {"kmax", a.kmax}, {"scan_step_fraction", a.step_fraction}};
    const SpectrumSeries s(list.expanded(), SpectrumUnit::RadPerMeter);
    run.emit("spectrum.csv", io::spectrum_csv(s));
    std::vector<double> mult(list.multiplicities.begin(), list.multiplicities.end());
    run.emit("roots.csv", io::columns_csv({"k", "multiplicity", "residual"}, {list.values, mult, list.residuals}, "unit: rad/m"));
    run.results() = {{"levels", list.total_count()},
                     {"distinct_roots", list.values.size()},
                     {"total_length", g.total_length()},
                     {"count_deviation", list.count_deviation}};
    run.finish();
}

struct UnfoldArgs {
    std::string spectrum, method = "polynomial", graph, regime = "single-mode", out = ".";
    int degree = 5;
    int N = 0;
    double sigma2 = 1.0;
};

void unfold_cmd(const UnfoldArgs& a) {
    Run run("unfold", a.out);
    run.input(a.spectrum);
    const auto s = io::read_spectrum(a.spectrum);
    run.parameters() = {{"spectrum", a.spectrum}, {"method", a.method}};
    UnfoldedSpectrum u;
    if (a.method == "polynomial") {
        u = unfold::unfold_polynomial(s, a.degree);
        run.parameters()["degree"] = a.degree;
    } else if (a.method == "dispersion") {
        u = unfold::unfold_dispersion(s, waveguide::Geometry::reference(), waveguide::regime_from_string(a.regime));
        run.parameters()["regime"] = a.regime;
    } else if (a.method == "weyl") {
        if (a.graph.empty()) throw InvalidArgument("unfold --method weyl needs --graph");
        run.input(a.graph);
        const auto g = io::read_graph(a.graph);
        const double offset = g.has_k_dependent_vertices() ? 0.0 : graph::weyl_offset(g);
        u = unfold::unfold_with(s, [&](double k) { return graph::weyl_estimate(g, k) + offset; }, "weyl");
        run.parameters()["graph"] = a.graph;
        run.parameters()["weyl_offset"] = offset;
    } else if (a.method == "semicircle") {
        if (a.N < 2) throw InvalidArgument("unfold --method semicircle needs --N >= 2");
        u = rmt::unfold_semicircle(s, a.N, a.sigma2);
        run.parameters()["N"] = a.N;
        run.parameters()["sigma2"] = a.sigma2;
    } else {
        throw InvalidArgument("unknown unfolding method '" + a.method + "'");
    }
    run.emit("unfolded.csv", io::spectrum_csv(SpectrumSeries(u.values, SpectrumUnit::Dimensionless)));
    run.results() = {{"levels", u.size()}, {"mean_spacing", u.size() > 1 ? u.mean_spacing() : 0.0}};
    run.finish();
}

struct StatsArgs {
    std::string unfolded, grid = "0.5:10:0.5", out = ".";
    std::size_t bins = 40;
    bool missing = false;
};

void stats_cmd(const StatsArgs& a) {
    Run run("stats", a.out);
    run.input(a.unfolded);
    const auto s = io::read_spectrum(a.unfolded);
    UnfoldedSpectrum u;
    u.values = s.values();
    const auto L = parse_grid(a.grid);
    run.parameters() = {{"unfolded", a.unfolded}, {"grid", a.grid}, {"bins", a.bins}};
    const auto n = stats::nnsd(u, a.bins);
    run.emit("nnsd.csv", io::curve_csv(n.pdf.curve, "s", "P"));
    run.emit("cnnsd.csv", io::curve_csv(n.cdf, "s", "I"));
    run.emit("sigma2.csv", io::curve_csv(stats::number_variance(u, L), "L", "Sigma2"));
    run.emit("delta3.csv", io::curve_csv(stats::spectral_rigidity(u, L), "L", "Delta3"));
    run.results() = {{"levels", u.size()},
                     {"ks_goe", ks_distance(n.spacings, reference::goe_surmise_cdf)},
                     {"ks_gue", ks_distance(n.spacings, reference::gue_surmise_cdf)},
                     {"ks_poisson", ks_distance(n.spacings, reference::poisson_spacing_cdf)}};
    if (a.missing) {
        const auto jumps = stats::missing_level_scan(SpectrumSeries(u.values, SpectrumUnit::Dimensionless),
                                                     [](double x) { return x; });
        std::vector<double> idx, pos, jump;
        for (const auto& j : jumps) {
            idx.push_back(static_cast<double>(j.index));
            pos.push_back(j.position);
            jump.push_back(j.jump);
        }
        run.emit("missing_levels.csv", io::columns_csv({"index", "position", "jump"}, {idx, pos, jump}));
        run.results()["flagged"] = jumps.size();
    }
    run.finish();
}

struct RatiosArgs {
    std::string spectrum, out = ".";
    std::size_t bins = 25;
};

void ratios(const RatiosArgs& a) {
    Run run("ratios", a.out);
    run.input(a.spectrum);
    const auto s = io::read_spectrum(a.spectrum);
    const auto r = stats::ratio_statistics(s, a.bins);
    run.parameters() = {{"spectrum", a.spectrum}, {"bins", a.bins}};
    run.emit("ratio_pdf.csv", io::curve_csv(r.pdf.curve, "r", "P"));
    run.emit("ratio_cdf.csv", io::curve_csv(r.cdf, "r", "I"));
    run.results() = {{"mean", r.mean}, {"count", r.ratios.size()}, {"skipped", r.skipped}};
    run.finish();
}

struct LengthsArgs {
    std::string spectrum, graph, taper = "hann", out = ".";
    double lmax = 0, dl = 0.005;
    std::size_t peaks = 5;
    bool orbits = false;
};

void lengths(const LengthsArgs& a) {
    Run run("lengths", a.out);
    run.input(a.spectrum);
    run.input(a.graph);
    const auto s = io::read_spectrum(a.spectrum);
    const auto g = io::read_graph(a.graph);
    if (!(a.lmax > 0.0)) throw InvalidArgument("lengths needs --lmax > 0");
    const auto grid = parse_grid(io::fmt(a.dl) + ":" + io::fmt(a.lmax) + ":" + io::fmt(a.dl));
    stats::LengthSpectrumOptions opt;
    if (a.taper == "hann") opt.taper = stats::Taper::Hann;
    else if (a.taper == "rectangular") opt.taper = stats::Taper::Rectangular;
    else throw InvalidArgument("unknown taper '" + a.taper + "'");
    const double density = g.total_length() / kPi;
    const auto c = stats::length_spectrum(s, [density](double) { return density; }, grid, opt);
    run.parameters() = {{"spectrum", a.spectrum}, {"graph", a.graph}, {"lmax", a.lmax}, {"dl", a.dl}, {"taper", a.taper}};
    run.emit("length_spectrum.csv", io::curve_csv(c, "l", "amplitude"));
    json peaks = json::array();
    for (const auto& p : stats::find_peaks(c, a.peaks)) peaks.push_back(json{{"length", p.position}, {"height", p.height}});
    run.results()["peaks"] = peaks;
    if (a.orbits) {
        const auto orbits = graph::enumerate_periodic_orbits(g, a.lmax);
        std::vector<double> len, bonds, prim, reps;
        for (const auto& o : orbits) {
            len.push_back(o.length);
            bonds.push_back(static_cast<double>(o.directed_bonds.size()));
            prim.push_back(o.primitive ? 1.0 : 0.0);
            reps.push_back(static_cast<double>(o.repetitions));
        }
        run.emit("orbits.csv", io::columns_csv({"length", "bonds", "primitive", "repetitions"}, {len, bonds, prim, reps}));
        run.results()["orbits"] = orbits.size();
    }
    run.finish();
}

struct RmtArgs {
    int N = 300, realizations = 200;
    double xi = 0, bulk_fraction = 0.5;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

void rmt_sample(const RmtArgs& a) {
    Run run("rmt-sample", a.out);
    rmt::EnsembleConfig cfg;
    cfg.N = a.N;
    cfg.xi = a.xi;
    cfg.realizations = a.realizations;
    cfg.seed = *a.seed;
    cfg.bulk_fraction = a.bulk_fraction;
    cfg.validate();
    run.seed("ensemble", cfg.seed);
    run.parameters() = {{"N", a.N}, {"xi", a.xi}, {"realizations", a.realizations}, {"bulk_fraction", a.bulk_fraction}};
    std::vector<SpectrumSeries> bulks(static_cast<std::size_t>(a.realizations));
    parallel_for(bulks.size(), [&](std::size_t r) {
        bulks[r] = rmt::bulk_spectrum(rmt::sample_interpolating(cfg, r, false), cfg.bulk_fraction);
    });
    const fs::path dir(a.out);
    fs::create_directories(dir);
    const auto tmp = (dir / "bulk.csv").string();
    rmt::dump_bulk_csv(tmp, bulks);
    std::string content;
    for (const auto& l : io::read_lines(tmp)) content += l + '\n';
    run.emit("bulk.csv", content);
    // pooled unfolded spacings and ratios for a quick look
    const double sigma2 = rmt::offdiag_variance(a.N, a.xi);
    std::vector<double> spacings, ratios_all;
    for (const auto& b : bulks) {
        const auto u = rmt::unfold_semicircle(b, a.N, sigma2).spacings();
        spacings.insert(spacings.end(), u.begin(), u.end());
        const auto r = stats::ratio_statistics(b);
        ratios_all.insert(ratios_all.end(), r.ratios.begin(), r.ratios.end());
    }
    double mean = 0;
    for (double r : ratios_all) mean += r;
    mean /= static_cast<double>(ratios_all.size());
    run.emit("nnsd.csv", io::curve_csv(make_histogram(spacings, 0.0, 4.0, 40, CurveKind::NNSD).curve, "s", "P"));
    const reference::ViolationParameter vp(a.xi);
    run.results() = {{"d", rmt::band_center_spacing(a.N, sigma2)},
                     {"spacings", spacings.size()},
                     {"ratio_mean", mean},
                     {"ks_ps_partial", ks_distance(spacings, [&](double x) { return reference::ps_partial_cdf(x, vp); })}};
    run.finish();
}

struct ScatterArgs {
    int N = 300, M = 2, Lambda = 30, realizations = 200;
    double T = 0.3, Tf = 0.1, xi = 0, step = 0.1, band = 0.5, eps_max = 2.0;
    std::optional<std::uint64_t> seed;
    bool widths = false, direct = false;
    std::string out = ".";
};

void scatter_sim(const ScatterArgs& a) {
    Run run("scatter-sim", a.out);
    scatter::ScatterConfig cfg;
    cfg.ensemble.N = a.N;
    cfg.ensemble.xi = a.xi;
    cfg.ensemble.realizations = a.realizations;
    cfg.ensemble.seed = *a.seed;
    cfg.step_fraction = a.step;
    cfg.band_fraction = a.band;
    cfg.record_widths = a.widths;
    cfg.direct_solve = a.direct;
    if (a.M < 1) throw InvalidArgument("scatter-sim needs --M >= 1");
    if (a.Lambda < 0) throw InvalidArgument("scatter-sim needs --Lambda >= 0");
    const double d = rmt::band_center_spacing(a.N, rmt::offdiag_variance(a.N, a.xi));
    cfg.channels = scatter::channels_from_transmissions(a.M, a.T, a.Lambda, a.Tf, d);
    run.seed("ensemble", cfg.ensemble.seed);
    run.parameters() = {{"N", a.N},           {"M", a.M},       {"Lambda", a.Lambda}, {"T", a.T},
                        {"Tf", a.Tf},         {"xi", a.xi},     {"realizations", a.realizations},
                        {"step_over_d", a.step}, {"band_fraction", a.band}, {"d", d},
                        {"v2_open", cfg.channels.front().v2},
                        {"v2_fictitious", a.Lambda > 0 ? cfg.channels.back().v2 : 0.0},
                        {"tau_abs", a.Lambda * a.Tf}};
    const auto r = scatter::simulate_ensemble(cfg);

    json res;
    json trans = json::array();
    for (int c = 0; c < r.open; ++c) trans.push_back(r.transmission(c));
    res["transmission"] = trans;
    if (r.open >= 2) res["cross_correlation"] = r.cross();
    if (a.widths) {
        res["mean_width_over_d"] = r.mean_width();
        const double t1 = r.transmission(0), t2 = r.open >= 2 ? r.transmission(1) : 0.0;
        const auto w = scatter::weisskopf_absorption(r.mean_width(), t1, t2);
        res["tau_abs_weisskopf"] = w.tau_abs;
        res["tau_abs_clamped"] = w.clamped;
    }
    run.results() = res;

    // autocorrelation of every recorded element on a common eps grid
    std::vector<double> eps;
    for (double e = 0; e <= a.eps_max + 1e-12; e += a.step) eps.push_back(e);
    std::vector<std::string> names{"eps_over_d"};
    std::vector<std::vector<double>> cols{eps};
    for (int x = 0; x < r.open; ++x)
        for (int y = 0; y < r.open; ++y) {
            const auto c = scatter::autocorrelation(r.element(x, y), r.step, eps, true);
            std::vector<double> re, im;
            for (const auto& v : c.c) {
                re.push_back(v.real());
                im.push_back(v.imag());
            }
            names.push_back("Re C" + std::to_string(x + 1) + std::to_string(y + 1));
            names.push_back("Im C" + std::to_string(x + 1) + std::to_string(y + 1));
            cols.push_back(re);
            cols.push_back(im);
        }
    run.emit("autocorrelation.csv", io::columns_csv(names, cols));
    for (int x = 0; x < r.open; ++x)
        for (int y = 0; y < r.open; ++y) {
            const auto idx = static_cast<std::size_t>(x * r.open + y);
            const auto label = pair_label(x + 1, y + 1);
            run.emit("modulus_" + label + ".csv", io::curve_csv(r.modulus_histograms[idx].curve, "abs", "P"));
            run.emit("phase_" + label + ".csv", io::curve_csv(r.phase_histograms[idx].curve, "phase", "P"));
        }
    // first realization as a trace file
    ComplexTrace t;
    t.unit = "f/d";
    t.f = r.grids.front();
    for (int x = 0; x < r.open; ++x)
        for (int y = 0; y < r.open; ++y) {
            t.pairs.emplace_back(x + 1, y + 1);
            t.values.push_back(r.element(x, y).front());
        }
    run.emit("trace_r0.csv", io::trace_csv(t));
    if (a.widths) run.emit("widths.csv", io::columns_csv({"gamma_over_d"}, {r.widths}));
    run.finish();
}

struct FitArgs {
    std::string trace, pair = "S21", target = "complex", out = ".";
    double mad = 3.0;
};

void fit_resonances(const FitArgs& a) {
    Run run("fit-resonances", a.out);
    run.input(a.trace);
    const auto t = io::read_trace(a.trace);
    t.validate();
    const auto want = io::parse_pair_name(a.pair, "--pair", 0);
    std::size_t col = t.pairs.size();
    for (std::size_t p = 0; p < t.pairs.size(); ++p)
        if (t.pairs[p] == want) col = p;
    if (col == t.pairs.size()) throw InvalidArgument("trace has no column " + a.pair);
    resonance::FitOptions opt;
    opt.diagonal = want.first == want.second;
    if (a.target == "complex") opt.target = resonance::FitTarget::Complex;
    else if (a.target == "squared") opt.target = resonance::FitTarget::SquaredModulus;
    else throw InvalidArgument("unknown fit target '" + a.target + "'");
    resonance::PeakPickOptions pk;
    pk.mad_factor = a.mad;
    // reflection traces are picked on their deviation from the baseline
    const auto guesses = resonance::peak_pick(t.f, t.values[col], pk);
    const auto reports = resonance::fit_trace(t.f, t.values[col], guesses, opt);
    run.parameters() = {{"trace", a.trace}, {"pair", a.pair}, {"target", a.target}, {"mad_factor", a.mad}};
    run.emit("resonances.csv", io::resonance_csv(reports));
    std::size_t fitted = 0, converged = 0, ill = 0;
    for (const auto& r : reports) {
        fitted += r.params.size();
        if (r.converged) converged += r.params.size();
        if (r.ill_conditioned) ++ill;
    }
    run.results() = {{"guesses", guesses.size()},
                     {"windows", reports.size()},
                     {"resonances", fitted},
                     {"converged", converged},
                     {"ill_conditioned_windows", ill}};
    run.finish();
}

struct WavefunArgs {
    std::vector<std::string> maps;
    std::string path, out = ".";
    double wavenumber = 0;
    bool unweighted = false;
};

void wavefun_stats(const WavefunArgs& a) {
    Run run("wavefun-stats", a.out);
    run.input(a.path);
    const auto segments = io::read_path_manifest(a.path);
    std::vector<double> all_v, mode_idx, ipr_mean, ipr_ratio;
    std::vector<std::string> rows;
    std::vector<double> amp_mode, amp_bond, amp_len, amp_val;
    for (std::size_t m = 0; m < a.maps.size(); ++m) {
        run.input(a.maps[m]);
        const auto map = io::read_intensity_map(a.maps[m], segments);
        const auto v = wavefun::normalize_intensity(map);
        all_v.insert(all_v.end(), v.v.begin(), v.v.end());
        wavefun::AmplitudeOptions opt;
        opt.wavenumber = a.wavenumber;
        const auto raw = wavefun::extract_bond_amplitudes(map, opt);
        const auto norm = wavefun::normalize_amplitudes(raw);
        mode_idx.push_back(static_cast<double>(m));
        ipr_mean.push_back(wavefun::ipr_mean_form(norm, !a.unweighted));
        ipr_ratio.push_back(wavefun::ipr_ratio_form(raw));
        for (std::size_t j = 0; j < norm.size(); ++j) {
            amp_mode.push_back(static_cast<double>(m));
            amp_bond.push_back(norm.bonds[j]);
            amp_len.push_back(norm.lengths[j]);
            amp_val.push_back(norm.magnitudes[j]);
        }
    }
    const auto dist = wavefun::log_intensity_distribution(all_v);
    run.parameters() = {{"path", a.path}, {"maps", a.maps}, {"wavenumber", a.wavenumber},
                        {"ipr_average", a.unweighted ? "unweighted" : "length-weighted"}};
    run.emit("amplitudes.csv", io::columns_csv({"mode", "bond", "length", "normalized_amplitude"}, {amp_mode, amp_bond, amp_len, amp_val}));
    run.emit("ipr.csv", io::columns_csv({"mode", "ipr_mean_form", "ipr_ratio_form"}, {mode_idx, ipr_mean, ipr_ratio}));
    run.emit("log_intensity.csv", io::columns_csv({"z", "P", "porter_thomas"}, {dist.histogram.curve.x, dist.histogram.curve.y, dist.reference.y}));
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < ipr_mean.size(); ++i) {
        m1 += ipr_mean[i];
        m2 += ipr_ratio[i];
    }
    const auto n = static_cast<double>(ipr_mean.size());
    run.results() = {{"modes", ipr_mean.size()}, {"mean_ipr_mean_form", m1 / n}, {"mean_ipr_ratio_form", m2 / n},
                     {"excluded_zero_samples", dist.excluded}};
    run.finish();
}

struct ReferenceArgs {
    std::string kind, grid, kernel = "decaying", out = ".";
    double xi = 0;
};

void reference_curves(const ReferenceArgs& a) {
    Run run("reference-curves", a.out);
    const auto x = parse_grid(a.grid);
    const reference::ViolationParameter vp(a.xi);
    reference::DKernel kernel;
    if (a.kernel == "decaying") kernel = reference::DKernel::Decaying;
    else if (a.kernel == "growing") kernel = reference::DKernel::Growing;
    else throw InvalidArgument("unknown kernel '" + a.kernel + "'");
    std::function<double(double)> f;
    CurveKind kind = CurveKind::NNSD;
    if (a.kind == "poisson") f = reference::poisson_spacing;
    else if (a.kind == "goe") f = reference::goe_surmise;
    else if (a.kind == "gue") f = reference::gue_surmise;
    else if (a.kind == "ps") f = [&](double s) { return reference::ps_partial(s, vp); };
    else if (a.kind == "ps-cdf") { f = [&](double s) { return reference::ps_partial_cdf(s, vp); }; kind = CurveKind::CNNSD; }
    else if (a.kind == "ratio-poisson") { f = reference::ratio_pdf_poisson; kind = CurveKind::RatioPdf; }
    else if (a.kind == "ratio-goe") { f = [](double r) { return reference::ratio_pdf_beta(r, 1); }; kind = CurveKind::RatioPdf; }
    else if (a.kind == "ratio-gue") { f = [](double r) { return reference::ratio_pdf_beta(r, 2); }; kind = CurveKind::RatioPdf; }
    else if (a.kind == "y2") { f = [&](double L) { return reference::y2_partial(L, vp, kernel); }; kind = CurveKind::Y2; }
    else if (a.kind == "sigma2") { f = [&](double L) { return reference::sigma2_from_y2(L, vp, kernel); }; kind = CurveKind::NumberVariance; }
    else if (a.kind == "delta3") { f = [&](double L) { return reference::delta3_from_y2(L, vp, kernel); }; kind = CurveKind::Rigidity; }
    else if (a.kind == "strength") { f = special::strength_log10_density; kind = CurveKind::Density; }
    else if (a.kind == "porter-thomas") { f = special::porter_thomas_log10; kind = CurveKind::Density; }
    else throw InvalidArgument("unknown curve kind '" + a.kind + "'");
    StatCurve c;
    c.kind = kind;
    c.x = x;
    c.y.resize(x.size());
    parallel_for(x.size(), [&](std::size_t i) { c.y[i] = f(x[i]); });
    run.parameters() = {{"kind", a.kind}, {"grid", a.grid}, {"xi", a.xi}, {"lambda", vp.lambda()}, {"kernel", a.kernel}};
    run.emit("curve.csv", io::curve_csv(c));
    run.results() = {{"points", x.size()}, {"trapezoid_integral", c.trapezoid()}};
    run.finish();
}

void fail(const std::string& kind, const std::string& message, std::optional<std::pair<std::string, std::size_t>> where = {}) {
    json e{{"error", {{"kind", kind}, {"message", message}}}};
    if (where) {
        e["error"]["file"] = where->first;
        e["error"]["line"] = where->second;
    }
    std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavechaos: quantum-graph, random-matrix and scattering workbench"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GraphSpectrumArgs gs;
    auto* c_gs = app.add_subcommand("graph-spectrum", "eigenwavenumbers of a metric graph");
    c_gs->add_option("--graph", gs.graph, "graph file")->required()->check(CLI::ExistingFile);
    c_gs->add_option("--kmin", gs.kmin, "lower wavenumber, rad/m (> 0)");
    c_gs->add_option("--kmax", gs.kmax, "upper wavenumber, rad/m")->required();
    c_gs->add_option("--scan-step", gs.step_fraction, "scan step in mean spacings");
    c_gs->add_option("--out", gs.out, "output directory");

    UnfoldArgs uf;
    auto* c_uf = app.add_subcommand("unfold", "map a spectrum to unit mean spacing");
    c_uf->add_option("--spectrum", uf.spectrum)->required()->check(CLI::ExistingFile);
    c_uf->add_option("--method", uf.method, "polynomial | dispersion | weyl | semicircle");
    c_uf->add_option("--degree", uf.degree);
    c_uf->add_option("--regime", uf.regime, "single-mode | two-mode");
    c_uf->add_option("--graph", uf.graph);
    c_uf->add_option("--N", uf.N);
    c_uf->add_option("--sigma2", uf.sigma2);
    c_uf->add_option("--out", uf.out);

    StatsArgs st;
    auto* c_st = app.add_subcommand("stats", "NNSD, number variance and rigidity of an unfolded spectrum");
    c_st->add_option("--unfolded", st.unfolded)->required()->check(CLI::ExistingFile);
    c_st->add_option("--grid", st.grid, "L grid lo:hi:step");
    c_st->add_option("--bins", st.bins);
    c_st->add_flag("--missing-levels", st.missing, "also run the missing-level scan");
    c_st->add_option("--out", st.out);

    RatiosArgs ra;
    auto* c_ra = app.add_subcommand("ratios", "spacing-ratio statistics of a raw spectrum");
    c_ra->add_option("--spectrum", ra.spectrum)->required()->check(CLI::ExistingFile);
    c_ra->add_option("--bins", ra.bins);
    c_ra->add_option("--out", ra.out);

    LengthsArgs ls;
    auto* c_ls = app.add_subcommand("lengths", "length spectrum of a wavenumber spectrum");
    c_ls->add_option("--spectrum", ls.spectrum)->required()->check(CLI::ExistingFile);
    c_ls->add_option("--graph", ls.graph, "graph that sets the smooth density")->required()->check(CLI::ExistingFile);
    c_ls->add_option("--lmax", ls.lmax)->required();
    c_ls->add_option("--dl", ls.dl);
    c_ls->add_option("--taper", ls.taper, "hann | rectangular");
    c_ls->add_option("--peaks", ls.peaks);
    c_ls->add_flag("--orbits", ls.orbits, "enumerate periodic orbits up to lmax");
    c_ls->add_option("--out", ls.out);

    RmtArgs rm;
    auto* c_rm = app.add_subcommand("rmt-sample", "bulk spectra of the interpolating ensemble");
    c_rm->add_option("--N", rm.N);
    c_rm->add_option("--xi", rm.xi);
    c_rm->add_option("--realizations", rm.realizations);
    c_rm->add_option("--bulk-fraction", rm.bulk_fraction);
    c_rm->add_option("--seed", rm.seed, "master seed (required)")->required();
    c_rm->add_option("--out", rm.out);

    ScatterArgs sc;
    auto* c_sc = app.add_subcommand("scatter-sim", "Heidelberg-model scattering ensemble");
    c_sc->add_option("--N", sc.N);
    c_sc->add_option("--M", sc.M);
    c_sc->add_option("--Lambda", sc.Lambda);
    c_sc->add_option("--T", sc.T, "open-channel transmission");
    c_sc->add_option("--Tf", sc.Tf, "fictitious-channel transmission");
    c_sc->add_option("--xi", sc.xi);
    c_sc->add_option("--realizations", sc.realizations);
    c_sc->add_option("--step", sc.step, "frequency step in units of d");
    c_sc->add_option("--band", sc.band, "central fraction of the spectrum swept");
    c_sc->add_option("--eps-max", sc.eps_max, "largest correlation lag in units of d");
    c_sc->add_flag("--widths", sc.widths, "record resonance widths (slower)");
    c_sc->add_flag("--direct", sc.direct, "solve the N x N system at every frequency");
    c_sc->add_option("--seed", sc.seed, "master seed (required)")->required();
    c_sc->add_option("--out", sc.out);

    FitArgs fr;
    auto* c_fr = app.add_subcommand("fit-resonances", "Breit-Wigner fits of a complex trace");
    c_fr->add_option("--trace", fr.trace)->required()->check(CLI::ExistingFile);
    c_fr->add_option("--pair", fr.pair, "S-parameter column, e.g. S21");
    c_fr->add_option("--target", fr.target, "complex | squared");
    c_fr->add_option("--mad-factor", fr.mad);
    c_fr->add_option("--out", fr.out);

    WavefunArgs wf;
    auto* c_wf = app.add_subcommand("wavefun-stats", "intensity distribution and IPR of scanned modes");
    c_wf->add_option("--map", wf.maps, "intensity map CSV, one per mode")->required()->check(CLI::ExistingFile);
    c_wf->add_option("--path", wf.path, "path manifest CSV")->required()->check(CLI::ExistingFile);
    c_wf->add_option("--wavenumber", wf.wavenumber, "flag coarse sampling against this k, rad/m");
    c_wf->add_flag("--unweighted", wf.unweighted, "unweighted bond average in the IPR");
    c_wf->add_option("--out", wf.out);

    ReferenceArgs rc;
    auto* c_rc = app.add_subcommand("reference-curves", "analytic reference curves");
    c_rc->add_option("--kind", rc.kind,
                     "poisson | goe | gue | ps | ps-cdf | ratio-poisson | ratio-goe | ratio-gue | y2 | sigma2 | delta3 | "
                     "strength | porter-thomas")
        ->required();
    c_rc->add_option("--grid", rc.grid, "lo:hi:step")->required();
    c_rc->add_option("--xi", rc.xi);
    c_rc->add_option("--kernel", rc.kernel, "decaying | growing");
    c_rc->add_option("--out", rc.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail("usage", e.what());
        return 2;
    }

    try {
        if (*c_gs) graph_spectrum(gs);
        else if (*c_uf) unfold_cmd(uf);
        else if (*c_st) stats_cmd(st);
        else if (*c_ra) ratios(ra);
        else if (*c_ls) lengths(ls);
        else if (*c_rm) rmt_sample(rm);
        else if (*c_sc) scatter_sim(sc);
        else if (*c_fr) fit_resonances(fr);
        else if (*c_wf) wavefun_stats(wf);
        else if (*c_rc) reference_curves(rc);
    } catch (const ParseError& e) {
        fail(e.kind(), e.what(), std::make_pair(e.file(), e.line()));
        return 3;
    } catch (const Error& e) {
        fail(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        fail("internal", e.what());
        return 1;
    }
    return 0;
}
