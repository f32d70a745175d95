#include "annuli/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "annuli/dressing.hpp"
#include "annuli/isospectral.hpp"
#include "annuli/riemann_family.hpp"
#include "annuli/sinh_hierarchy.hpp"
#include "annuli/spectral_curve.hpp"
#include "annuli/surface_io.hpp"

namespace annuli::cli {

using ojson = nlohmann::ordered_json;

namespace {

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number in " + what + ": '" + s + "'");
    }
}

ojson cj(cplx z) { return ojson::array({z.real(), z.imag()}); }

cplx jc(const nlohmann::json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(what + ": expected a number or [re, im]");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

nlohmann::json read_json(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// a bare potential, or the output of family / flow / dress with the potential nested under "potential"
MatrixLaurent load_potential(const std::string& path) {
    const nlohmann::json j = read_json(path);
    if (j.is_object() && !j.contains("g") && j.contains("potential") && j["potential"].contains("g"))
        return potential_from_json(j["potential"]);
    return potential_from_json(j);
}

// writes to path, or to out when path is empty
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << text;
    if (!f) throw IoError("write failed: " + path);
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::vector<cplx> unit_samples(int n) {
    std::vector<cplx> v;
    for (int k = 0; k < n; ++k) v.push_back(std::polar(1.0, 2 * std::numbers::pi * (k + 0.5) / n));
    return v;
}

ojson potential_check_json(const PotentialCheck& c) {
    return {{"ok", c.ok},
            {"violated", c.violated},
            {"reality", c.reality},
            {"residue", c.residue},
            {"nondegeneracy", c.nondegeneracy}};
}

ojson spectral_json(const SpectralPolynomial& a) {
    ojson tags = ojson::array();
    for (auto t : a.tags) tags.push_back(t == ClassTag::Mg ? "M_g" : t == ClassTag::Mg0 ? "M_g^0" : "M_g^1");
    return {{"g", a.g}, {"coeffs", complex_list(a.coef)}, {"classes", tags}};
}

ojson closing_json(const ClosingData& cd) {
    ojson q = ojson::array();
    for (const auto& p : cd.quantization) q.push_back({{"lambda", cj(p.lambda)}, {"h", cj(p.h)}, {"defect", p.defect}});
    return {{"a", spectral_json(cd.a)},
            {"b", complex_list(cd.b)},
            {"tau", cj(cd.tau)},
            {"Theta", cd.Theta},
            {"condition", cd.condition},
            {"segment_integrals", complex_list(cd.segment_integrals)},
            {"quantization", q}};
}

ojson spectral_report_json(const SpectralDataReport& r) {
    return {{"ok", r.ok},
            {"reality", r.reality},
            {"sign", r.sign},
            {"theta_phase", r.theta_phase},
            {"b_reality", r.b_reality},
            {"b0_relation", r.b0_relation},
            {"cut_integrals", r.cut_integrals},
            {"quantization", r.quantization}};
}

// checks collects (name, value, tolerance); exit 1 if any value exceeds its tolerance
struct Checks {
    ojson j = ojson::object();
    bool ok = true;
    void add(const std::string& name, double value, double tol) {
        const bool pass = value <= tol;
        ok = ok && pass;
        j[name] = {{"value", value}, {"tol", tol}, {"pass", pass}};
    }
    void flag(const std::string& name, bool pass) {
        ok = ok && pass;
        j[name] = {{"pass", pass}};
    }
};

int finish(ojson report, Checks& c, const std::string& path, std::ostream& out) {
    report["checks"] = c.j;
    report["ok"] = c.ok;
    emit(path, dump(report), out);
    return c.ok ? Exit::ok : Exit::check_failed;
}

void require_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError(cfg.subcommand + ": --input is required");
}

void require_format(const RunConfig& cfg, std::initializer_list<const char*> allowed) {
    for (const char* f : allowed)
        if (cfg.format == f) return;
    throw ConfigError(cfg.subcommand + ": unsupported --format " + cfg.format);
}

std::vector<cplx> lambdas_or(const RunConfig& cfg, std::vector<cplx> def) {
    return cfg.lambdas.empty() ? def : cfg.lambdas;
}

// ---- subcommands

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    require_input(cfg);
    const MatrixLaurent x = load_potential(cfg.input);
    const PotentialCheck chk = check_potential(x, cfg.tol.alg);
    ojson r = {{"subcommand", "validate"}, {"potential", potential_check_json(chk)}};
    Checks c;
    c.flag("potential", chk.ok);
    if (chk.violated != "residue_ray" && chk.violated != "delta_unimodular") {
        const SpectralPolynomial a = det_poly(x, cfg.tol.alg);
        const PairingResult pr = paired_roots(a, cfg.tol.alg);
        r["a"] = spectral_json(a);
        r["pairing_residual"] = pr.residual;
        r["sign_max"] = sign_max(a);
        r["coefficient_bound"] = coefficient_bound(a);
        c.add("a_reality", reality_defect(a), cfg.tol.alg);
    }
    return finish(r, c, cfg.output, out);
}

int cmd_hierarchy(const RunConfig& cfg, int levels, std::ostream& out) {
    if (levels < 1 || levels > 5) throw ConfigError("hierarchy: --levels must be in 1..5");
    const auto monic = hier::monic_hierarchy(levels);
    const auto lax = hier::lax_hierarchy(std::min(levels, 3));
    Checks c;
    ojson lv = ojson::array();
    for (int n = 1; n <= levels; ++n) {
        const hier::DiffPoly& u = monic[n];
        const bool lin = hier::linearized_residual(u).is_zero();
        c.flag("linearized_u" + std::to_string(n), lin);
        lv.push_back({{"n", n}, {"u", u.str()}, {"weight", u.weight().value_or(-999)}, {"linearized_zero", lin}});
    }
    c.flag("u1_reference", monic[1] == hier::reference_u1());
    if (levels >= 2) c.flag("u2_reference", monic[2] == hier::reference_u2());
    ojson r = {{"subcommand", "hierarchy"}, {"levels", lv}};
    if (levels >= 3) {
        r["u3_matches_reference"] = monic[3] == hier::reference_u3();
        r["u3_reference"] = hier::reference_u3().str();
        r["u3_reference_weight_consistent"] = hier::reference_u3().weight().has_value();
    }
    ojson lx = ojson::array();
    for (const auto& l : lax) lx.push_back({{"n", l.n}, {"u", l.u.str()}});
    r["lax"] = lx;
    if (cfg.format == "text") {
        std::string s;
        for (int n = 1; n <= levels; ++n) s += "u" + std::to_string(n) + " = " + monic[n].str() + "\n";
        emit(cfg.output, s, out);
        return c.ok ? Exit::ok : Exit::check_failed;
    }
    return finish(r, c, cfg.output, out);
}

int cmd_frame(const RunConfig& cfg, std::ostream& out) {
    require_input(cfg);
    const MatrixLaurent x = load_potential(cfg.input);
    const std::vector<cplx> lambdas = lambdas_or(cfg, {1.0});
    const FrameGrid fg = integrate(x, cfg.grid, lambdas);
    const auto samples = unit_samples(32);
    if (cfg.format == "csv") {
        std::string s = "x,y,omega,sinh_gordon,a_drift,unitarity\n";
        const MatrixLaurent& x0 = fg.zeta_at(fg.x.origin, fg.y.origin);
        std::vector<cplx> a0;
        for (cplx l : samples) a0.push_back(-l * x0.eval(l).determinant());
        const auto sg = sinh_gordon_residual(fg);
        char buf[256];
        for (int iy = 0; iy < fg.ny(); ++iy)
            for (int ix = 0; ix < fg.nx(); ++ix) {
                const MatrixLaurent& z = fg.zeta_at(ix, iy);
                double drift = 0, uni = 0;
                for (size_t i = 0; i < samples.size(); ++i)
                    drift = std::max(drift, std::abs(-samples[i] * z.eval(samples[i]).determinant() - a0[i]) /
                                                std::abs(a0[i]));
                for (int l = 0; l < fg.nl(); ++l)
                    if (std::abs(std::abs(lambdas[l]) - 1.0) < 1e-12) {
                        const Mat2& F = fg.frame_at(ix, iy, l);
                        uni = std::max(uni, maxabs(F * F.adjoint() - Mat2::Identity()));
                    }
                const bool interior = ix > 0 && iy > 0 && ix + 1 < fg.nx() && iy + 1 < fg.ny();
                const double r = interior ? sg[static_cast<size_t>(iy - 1) * (fg.nx() - 2) + (ix - 1)] : 0.0;
                std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", fg.x.t[ix], fg.y.t[iy],
                              fg.omega[fg.node(ix, iy)], r, drift, uni);
                s += buf;
            }
        emit(cfg.output, s, out);
        const FlowDiagnostics d = diagnose(fg, samples);
        return d.a_drift <= cfg.tol.alg && d.unitarity <= cfg.tol.pde ? Exit::ok : Exit::check_failed;
    }
    const FlowDiagnostics d = diagnose(fg, samples);
    double sg = 0;
    for (double v : sinh_gordon_residual(fg)) sg = std::max(sg, std::abs(v));
    Checks c;
    c.add("a_drift", d.a_drift, cfg.tol.alg);
    c.add("reality", d.reality, cfg.tol.alg);
    c.add("residue", d.residue, cfg.tol.alg);
    c.add("det_defect", d.det_defect, cfg.tol.pde);
    c.add("unitarity", d.unitarity, cfg.tol.pde);
    ojson r = {{"subcommand", "frame"},
               {"nx", fg.nx()},
               {"ny", fg.ny()},
               {"lambdas", complex_list(lambdas)},
               {"sinh_gordon_max", sg},
               {"omega_z_consistency", omega_z_consistency(fg)}};
    return finish(r, c, cfg.output, out);
}

int cmd_surface(const RunConfig& cfg, const std::string& projection, const std::string& report_path,
                std::ostream& out) {
    require_input(cfg);
    const MatrixLaurent x = load_potential(cfg.input);
    const std::vector<cplx> lambdas = lambdas_or(cfg, {1.0});
    const FrameGrid fg = integrate(x, cfg.grid, lambdas);
    const SurfaceMesh m = assemble(fg, lambdas.front());
    const SurfaceReport d = diagnostics(m);
    const Projection proj = projection == "stereo3" ? Projection::stereo3 : Projection::ambient4;
    const MeshFormat fmt = cfg.format == "json" ? MeshFormat::json : MeshFormat::obj;
    std::ostringstream mesh;
    write_mesh(mesh, m, fmt, proj);
    emit(cfg.output, mesh.str(), out);
    Checks c;
    c.add("sphere", d.sphere, cfg.tol.alg);
    c.add("conformality", d.conformality, cfg.tol.pde);
    c.add("hopf", d.hopf, cfg.tol.pde);
    if (d.metric) c.add("metric", *d.metric, cfg.tol.pde);
    if (d.n3) c.add("n3", *d.n3, cfg.tol.pde);
    ojson r = {{"subcommand", "surface"},
               {"lambda0", cj(m.lambda0)},
               {"a0", cj(m.a0)},
               {"vertices", m.vertices.size()},
               {"sinh_gordon_max", d.sinh_gordon}};
    r["checks"] = c.j;
    r["ok"] = c.ok;
    // mesh to --output; report to --report, or to stdout when the mesh went to a file
    if (!report_path.empty() || !cfg.output.empty()) emit(report_path, dump(r), out);
    return c.ok ? Exit::ok : Exit::check_failed;
}

SpectralPolynomial polynomial_from_json(const nlohmann::json& j) {
    if (j.contains("coeffs")) {
        std::vector<cplx> c;
        for (const auto& e : j.at("coeffs")) c.push_back(jc(e, "coeffs"));
        if (c.size() % 2 == 0) throw ConfigError("coeffs: a needs an odd number (2g + 1) of coefficients");
        return make_spectral(static_cast<int>(c.size() / 2), c);
    }
    if (j.contains("roots")) {
        std::vector<cplx> p{j.contains("lead") ? jc(j["lead"], "lead") : cplx(1.0)};
        for (const auto& e : j.at("roots")) p = poly_mul(p, {-jc(e, "roots"), 1.0});
        if (p.size() % 2 == 0) throw ConfigError("roots: a needs an even number (2g) of roots");
        return make_spectral(static_cast<int>(p.size() / 2), p);
    }
    throw ConfigError("a-polynomial: expected 'coeffs' or 'roots'");
}

int cmd_closing(const RunConfig& cfg, const std::vector<std::string>& coeffs, const std::string& circle,
                std::ostream& out) {
    SpectralPolynomial a;
    if (!coeffs.empty()) {
        std::vector<cplx> c;
        for (const auto& s : coeffs) c.push_back(parse_complex(s));
        if (c.size() % 2 == 0) throw ConfigError("--coeff: a needs 2g + 1 coefficients");
        a = make_spectral(static_cast<int>(c.size() / 2), c);
    } else {
        require_input(cfg);
        a = polynomial_from_json(read_json(cfg.input));
    }
    const ClosingData cd = solve_closing(a);
    const SpectralDataReport rep = verify_spectral_data(cd, cfg.tol.alg, cfg.tol.pde);
    if (!circle.empty()) {
        std::string s = "theta,h_re,h_im\n";
        char buf[128];
        for (int k = 0; k < 360; ++k) {
            const double t = 2 * std::numbers::pi * (k + 0.5) / 360;
            const cplx h = integrate_h(cd, std::polar(1.0, t)).h;
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", t, h.real(), h.imag());
            s += buf;
        }
        emit(circle, s, out);
    }
    if (cfg.format == "csv") {
        std::string s = "lambda_re,lambda_im,h_re,h_im,defect\n";
        char buf[160];
        for (const auto& q : cd.quantization) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.3e\n", q.lambda.real(), q.lambda.imag(),
                          q.h.real(), q.h.imag(), q.defect);
            s += buf;
        }
        emit(cfg.output, s, out);
        return rep.ok ? Exit::ok : Exit::check_failed;
    }
    Checks c;
    c.flag("spectral_data", rep.ok);
    c.add("quantization", cd.max_quantization_defect(), cfg.tol.pde);
    ojson r = {{"subcommand", "closing"}, {"closing", closing_json(cd)}, {"report", spectral_report_json(rep)}};
    return finish(r, c, cfg.output, out);
}

int cmd_flow(const RunConfig& cfg, std::vector<std::string> ts, int steps, const std::string& report_path,
             std::ostream& out) {
    require_input(cfg);
    const MatrixLaurent x = load_potential(cfg.input);
    FlowParameter t;
    if (ts.empty()) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int i = 0; i < x.g; ++i) t.push_back({u(rng), u(rng)});
    } else {
        for (const auto& s : ts) t.push_back(parse_complex(s));
    }
    if (static_cast<int>(t.size()) != x.g) throw ConfigError("flow: --t needs exactly g entries");
    if (steps <= 0) throw ConfigError("flow: --steps must be positive");
    const FlowResult fr = flow(x, t, steps);
    double drift = 0;
    for (cplx l : unit_samples(32)) {
        const cplx a0 = -l * x.eval(l).determinant(), a1 = -l * fr.xi.eval(l).determinant();
        drift = std::max(drift, std::abs(a1 - a0) / std::abs(a0));
    }
    Checks c;
    c.add("a_drift", drift, cfg.tol.alg);
    c.add("window_residual", fr.max_residual, cfg.tol.alg);
    c.flag("potential", check_potential(fr.xi, cfg.tol.alg).ok);
    ojson r = {{"subcommand", "flow"},
               {"t", complex_list(t)},
               {"steps", steps},
               {"reality_correction", fr.max_correction},
               {"distance", distance(fr.xi, x)}};
    if (cfg.output.empty()) {
        r["potential"] = potential_to_json(fr.xi);
        return finish(r, c, "", out);
    }
    emit(cfg.output, dump(potential_to_json(fr.xi)), out);
    r["checks"] = c.j;
    r["ok"] = c.ok;
    emit(report_path, dump(r), out);
    return c.ok ? Exit::ok : Exit::check_failed;
}

int cmd_dress(const RunConfig& cfg, const std::string& alpha_s, const std::vector<std::string>& line_s,
              const std::string& beta_s, int steps, bool undress, const std::string& report_path,
              std::ostream& out) {
    require_input(cfg);
    if (alpha_s.empty()) throw ConfigError("dress: --alpha0 is required");
    const cplx a0 = parse_complex(alpha_s);
    const MatrixLaurent x = load_potential(cfg.input);
    Checks c;
    ojson r = {{"subcommand", "dress"}, {"alpha0", cj(a0)}};
    MatrixLaurent result;
    if (undress) {
        const FactorizationResult f = factorize(x, a0, cfg.tol.alg);
        result = f.reduced;
        r["line"] = complex_list({f.line(0), f.line(1)});
        r["line_prime"] = complex_list({f.line_prime(0), f.line_prime(1)});
        r["remainder"] = f.remainder;
        c.add("reassembly", distance(dress(f.line_prime, f.reduced, a0), x), cfg.tol.alg);
    } else {
        if (line_s.size() != 2) throw ConfigError("dress: --line needs two complex numbers");
        const Vec2 L(parse_complex(line_s[0]), parse_complex(line_s[1]));
        result = dress(canonical_line(L), x, a0);
        if (!beta_s.empty()) {
            const BubbletonFlow bf = bubbleton_flow(result, a0, parse_complex(beta_s), steps);
            result = bf.xi;
            r["beta"] = cj(parse_complex(beta_s));
            r["flow_residual"] = bf.max_residual;
        }
        r["eigenline_margin"] = eigenline_margin(L, x, a0);
        if (opnorm(result.eval(a0)) > cfg.tol.alg * result.maxabs()) {
            const FactorizationResult f = factorize(result, a0, cfg.tol.alg);
            c.add("reduced_roundtrip", distance(f.reduced, x), cfg.tol.alg);
            r["line_prime"] = complex_list({f.line_prime(0), f.line_prime(1)});
        } else {
            r["vanishes_at_alpha0"] = true;
        }
    }
    const PotentialCheck pc = check_potential(result, cfg.tol.alg);
    c.flag("potential", pc.ok);
    r["a"] = spectral_json(det_poly(result, cfg.tol.alg));
    if (cfg.output.empty()) {
        r["potential"] = potential_to_json(result);
        return finish(r, c, "", out);
    }
    emit(cfg.output, dump(potential_to_json(result)), out);
    r["checks"] = c.j;
    r["ok"] = c.ok;
    emit(report_path, dump(r), out);
    return c.ok ? Exit::ok : Exit::check_failed;
}

int cmd_family(const RunConfig& cfg, int genus, std::optional<double> alpha, std::optional<double> beta,
               std::optional<double> cc, std::optional<double> dd, std::ostream& out) {
    Checks c;
    ojson r = {{"subcommand", "family"}, {"genus", genus}};
    FamilyParams fp{alpha, beta};
    if (cc || dd) {
        if (genus != 2 || !cc || !dd || alpha || beta)
            throw ConfigError("family: --c and --d go together with --genus 2 and without --alpha/--beta");
        const AbreschParameters ap{*cc, *dd};
        const SpectralPolynomial a = genus2_coefficients(ap.c, ap.d);
        const auto roots = genus2_root_formulas(ap.c, ap.d);
        // alpha in (0, 1) is the smaller positive root, -beta the negative root in (-1, 0)
        fp.alpha = roots[2];
        fp.beta = -roots[1];
        r["abresch"] = {{"c", ap.c}, {"d", ap.d}};
        r["coefficient_formulas"] = spectral_json(a);
        r["root_formulas"] = roots;
        double root_err = 0;
        for (double x : roots) root_err = std::max(root_err, std::abs(a.eval(x)));
        c.add("root_formulas", root_err, cfg.tol.alg);
        const FamilyPreset p = preset(2, fp);
        double diff = 0;
        for (size_t k = 0; k < a.coef.size(); ++k) diff = std::max(diff, std::abs(a.coef[k] - p.a.coef[k]));
        c.add("product_vs_coefficients", diff, cfg.tol.alg);
    }
    const FamilyPreset p = preset(genus, fp);
    const SpectralDataReport rep = verify_spectral_data(p.spectral, cfg.tol.alg, cfg.tol.pde);
    c.flag("spectral_data", rep.ok);
    c.add("additional_symmetry", additional_symmetry_defect(p.a), cfg.tol.alg);
    const SpectralPolynomial ap = det_poly(p.potential, cfg.tol.alg);
    double pd = 0;
    for (size_t k = 0; k < ap.coef.size(); ++k) pd = std::max(pd, std::abs(ap.coef[k] - p.a.coef[k]));
    c.add("potential_a", pd, cfg.tol.alg);
    if (p.params.alpha) r["alpha"] = *p.params.alpha;
    if (p.params.beta) r["beta"] = *p.params.beta;
    r["a"] = spectral_json(p.a);
    r["closing"] = closing_json(p.spectral);
    r["report"] = spectral_report_json(rep);
    r["potential"] = potential_to_json(p.potential);
    r["sym_point"] = cj(p.sym_point);
    r["gamma"] = cj(p.gamma);
    if (genus == 1) r["level"] = p.level;
    return finish(r, c, cfg.output, out);
}

void add_common(CLI::App* s, RunConfig& cfg, std::vector<std::string>& lambdas, std::string& grid) {
    s->add_option("--input,-i", cfg.input, "input file");
    s->add_option("--output,-o", cfg.output, "output file (stdout when omitted)");
    s->add_option("--grid", grid, "x0:x1:hx,y0:y1:hy");
    s->add_option("--lambda", lambdas, "spectral parameter (repeatable), e.g. 1, i, 0.6+0.8i");
    s->add_option("--tol-alg", cfg.tol.alg, "algebraic tolerance")->check(CLI::PositiveNumber);
    s->add_option("--tol-pde", cfg.tol.pde, "PDE / quadrature tolerance")->check(CLI::PositiveNumber);
    s->add_option("--seed", cfg.seed, "seed for randomized inputs");
    s->add_option("--format", cfg.format, "json | csv | obj | text")
        ->check(CLI::IsMember({"json", "csv", "obj", "text"}));
}

}  // namespace

GridSpec parse_grid(const std::string& s) {
    static const std::regex re(R"(^\s*([^:,]+):([^:,]+):([^:,]+),([^:,]+):([^:,]+):([^:,]+)\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw ConfigError("--grid: expected x0:x1:hx,y0:y1:hy, got '" + s + "'");
    GridSpec g;
    g.x0 = to_double(m[1], "--grid");
    g.x1 = to_double(m[2], "--grid");
    g.hx = to_double(m[3], "--grid");
    g.y0 = to_double(m[4], "--grid");
    g.y1 = to_double(m[5], "--grid");
    g.hy = to_double(m[6], "--grid");
    if (!(g.hx > 0 && g.hy > 0)) throw ConfigError("--grid: steps must be positive");
    if (!(g.x0 <= 0 && 0 <= g.x1 && g.y0 <= 0 && 0 <= g.y1)) throw ConfigError("--grid: rectangle must contain 0");
    return g;
}

cplx parse_complex(const std::string& in) {
    std::string s;
    for (char ch : in)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw ConfigError("empty complex number");
    if (s.back() != 'i') return to_double(s, "complex number");
    s.pop_back();
    // split at the last sign that is not an exponent sign
    size_t k = std::string::npos;
    for (size_t i = s.size(); i-- > 1;)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            k = i;
            break;
        }
    const std::string re = k == std::string::npos ? "" : s.substr(0, k);
    const std::string im = k == std::string::npos ? s : s.substr(k);
    const double vi = im.empty() || im == "+" ? 1.0 : im == "-" ? -1.0 : to_double(im, "complex number");
    return {re.empty() ? 0.0 : to_double(re, "complex number"), vi};
}

ojson complex_list(const std::vector<cplx>& v) {
    ojson a = ojson::array();
    for (cplx z : v) a.push_back(cj(z));
    return a;
}

ojson potential_to_json(const MatrixLaurent& x) {
    ojson coeffs = ojson::array();
    for (const Mat2& m : x.c) coeffs.push_back({cj(m(0, 0)), cj(m(0, 1)), cj(m(1, 0)), cj(m(1, 1))});
    return {{"g", x.g}, {"delta", cj(x.delta)}, {"coeffs", coeffs}};
}

MatrixLaurent potential_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("g") || !j["g"].is_number_integer()) throw ConfigError("potential: missing integer 'g'");
    const int g = j["g"].get<int>();
    if (g < 0) throw ConfigError("potential: g must be >= 0");
    const cplx delta = j.contains("delta") ? jc(j["delta"], "delta") : cplx(1.0);
    if (!j.contains("coeffs") || !j["coeffs"].is_array() || static_cast<int>(j["coeffs"].size()) != g + 2)
        throw ConfigError("potential: 'coeffs' must list g + 2 matrices (d = -1..g)");
    MatrixLaurent x(g, delta);
    for (int d = -1; d <= g; ++d) {
        const auto& e = j["coeffs"][d + 1];
        if (!e.is_array() || e.size() != 4) throw ConfigError("potential: each coefficient needs 4 entries");
        x.at(d) << jc(e[0], "coeffs"), jc(e[1], "coeffs"), jc(e[2], "coeffs"), jc(e[3], "coeffs");
    }
    return x;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"annuli: finite-type minimal annuli in S^2 x R"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::vector<std::string> lambdas;
    std::string grid;

    auto* validate = app.add_subcommand("validate", "check a potential file");
    add_common(validate, cfg, lambdas, grid);

    int levels = 4;
    auto* hierarchy = app.add_subcommand("hierarchy", "print the sinh-Gordon hierarchy");
    add_common(hierarchy, cfg, lambdas, grid);
    hierarchy->add_option("--levels", levels, "number of levels");

    auto* frame = app.add_subcommand("frame", "integrate the Killing field and frame on a grid");
    add_common(frame, cfg, lambdas, grid);

    std::string projection = "ambient4", report;
    auto* surface = app.add_subcommand("surface", "assemble and export the immersion");
    add_common(surface, cfg, lambdas, grid);
    surface->add_option("--projection", projection, "ambient4 | stereo3")
        ->check(CLI::IsMember({"ambient4", "stereo3"}));
    surface->add_option("--report", report, "JSON report path");

    std::vector<std::string> coeffs;
    std::string circle;
    auto* closing = app.add_subcommand("closing", "solve the closing conditions for an a-polynomial");
    add_common(closing, cfg, lambdas, grid);
    closing->add_option("--coeff", coeffs, "coefficient a_k, from k = 0 (repeatable)");
    closing->add_option("--h-circle", circle, "CSV of h along the unit circle");

    std::vector<std::string> ts;
    int steps = 200;
    auto* flowc = app.add_subcommand("flow", "isospectral flow by t in C^g");
    add_common(flowc, cfg, lambdas, grid);
    flowc->add_option("--t", ts, "t_i (repeatable, g entries; random from --seed if omitted)");
    flowc->add_option("--steps", steps, "RK4 steps");
    flowc->add_option("--report", report, "JSON report path");

    std::string alpha_s, beta_s;
    std::vector<std::string> line_s;
    bool undress = false;
    auto* dressc = app.add_subcommand("dress", "dress a potential by a simple factor");
    add_common(dressc, cfg, lambdas, grid);
    dressc->add_option("--alpha0", alpha_s, "pole of the simple factor, |alpha0| != 1");
    dressc->add_option("--line", line_s, "two complex numbers spanning L'")->expected(2);
    dressc->add_option("--beta", beta_s, "bubbleton flow parameter");
    dressc->add_option("--steps", steps, "RK4 steps of the bubbleton flow");
    dressc->add_flag("--undress", undress, "factorize the input at alpha0 instead");
    dressc->add_option("--report", report, "JSON report path");

    int genus = 0;
    std::optional<double> alpha, beta, cc, dd;
    auto* family = app.add_subcommand("family", "built-in spectral data presets");
    add_common(family, cfg, lambdas, grid);
    family->add_option("--genus", genus, "0, 1 or 2")->required();
    family->add_option("--alpha", alpha, "positive root of a in (0, 1)");
    family->add_option("--beta", beta, "-beta is a negative root of a, beta in (0, 1)");
    family->add_option("--c", cc, "Abresch parameter c < 0");
    family->add_option("--d", dd, "Abresch parameter d < 0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Exit::ok : Exit::bad_config;
    }

    try {
        cfg.subcommand = app.get_subcommands().front()->get_name();
        if (cfg.format.empty()) cfg.format = cfg.subcommand == "surface" ? "obj" : "json";
        if (!grid.empty()) cfg.grid = parse_grid(grid);
        for (const auto& l : lambdas) cfg.lambdas.push_back(parse_complex(l));
        const std::string& sc = cfg.subcommand;
        if (sc == "surface")
            require_format(cfg, {"obj", "json"});
        else if (sc == "frame" || sc == "closing")
            require_format(cfg, {"json", "csv"});
        else if (sc == "hierarchy")
            require_format(cfg, {"json", "text"});
        else
            require_format(cfg, {"json"});
        if (sc == "validate") return cmd_validate(cfg, out);
        if (sc == "hierarchy") return cmd_hierarchy(cfg, levels, out);
        if (sc == "frame") return cmd_frame(cfg, out);
        if (sc == "surface") return cmd_surface(cfg, projection, report, out);
        if (sc == "closing") return cmd_closing(cfg, coeffs, circle, out);
        if (sc == "flow") return cmd_flow(cfg, ts, steps, report, out);
        if (sc == "dress") return cmd_dress(cfg, alpha_s, line_s, beta_s, steps, undress, report, out);
        return cmd_family(cfg, genus, alpha, beta, cc, dd, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return Exit::io_error;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return Exit::bad_config;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return Exit::bad_config;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return Exit::bad_config;
    } catch (const std::exception& e) {
        err << "check failed: " << e.what() << '\n';
        return Exit::check_failed;
    }
}

}  // namespace annuli::cli
