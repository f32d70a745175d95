#include "annuli/riemann_family.hpp"

#include <cmath>
#include <stdexcept>

namespace annuli {

Mat2 flat_frame(cplx z, cplx lambda) {
    const cplx r = std::sqrt(lambda);
    const cplx s = 0.25 * (z / r + std::conj(z) * r);
    Mat2 F;
    F << std::cos(s), I * std::sin(s) / r, I * r * std::sin(s), std::cos(s);
    return F;
}

MatrixLaurent genus1_killing_field(double omega, double omega_y, cplx gamma) {
    MatrixLaurent z(1);
    const double ep = std::exp(omega), em = std::exp(-omega);
    const cplx q = 0.25 * I;
    z.at(-1) << 0, q * ep, 0, 0;
    z.at(0) << -2.0 * q * omega_y, q * std::conj(gamma) * em, q * gamma * em, 2.0 * q * omega_y;
    z.at(1) << 0, 0, q * ep, 0;
    return z;
}

double genus1_level(double omega, double omega_y) {
    return (1.0 - 2.0 * omega_y * omega_y - std::cosh(2.0 * omega)) / 2.0;
}

SpectralPolynomial genus1_polynomial(double d, cplx gamma) {
    return make_spectral(1, {-gamma / 16.0, -2.0 * (1.0 - 2.0 * d) / 16.0, -std::conj(gamma) / 16.0});
}

AbreschCritical abresch_critical(const AbreschParameters& p) {
    if (!(p.c < 0 && p.d < 0)) throw std::invalid_argument("Abresch parameters need c < 0 and d < 0");
    const double disc = (1 + p.c - p.d) * (1 + p.c - p.d) - 4 * p.c;
    if (disc < 0) throw std::invalid_argument("Abresch discriminant is negative");
    // f0^2, g0^2 are the positive roots of X^2 + (1 + c - d) X + c and X^2 + (1 + d - c) X + d,
    // i.e. the first integrals at f_x = g_y = 0
    const double s = std::sqrt(disc);
    return {std::sqrt(0.5 * (-1 + p.d - p.c + s)), std::sqrt(0.5 * (-1 + p.c - p.d + s)), disc};
}

AbreschParameters abresch_from_roots(double alpha, double beta) {
    if (!(alpha > 0 && alpha < 1 && beta > 0 && beta < 1))
        throw std::invalid_argument("alpha and beta must lie in (0, 1)");
    const double g2 = (alpha + 1 / alpha - 2) / 4;
    const double f2 = (beta + 1 / beta - 2) / 4;
    return {-f2 * (1 + g2), -g2 * (1 + f2)};
}

SpectralPolynomial genus2_coefficients(double c, double d) {
    const AbreschCritical k = abresch_critical({c, d});
    const double f2 = k.f0 * k.f0, g2 = k.g0 * k.g0;
    const double a1 = (f2 - g2) / 4;
    const double a2 = -0.125 - g2 / 2 - f2 / 2 - f2 * g2;
    return make_spectral(2, {1.0 / 16, a1, a2, a1, 1.0 / 16});
}

std::vector<double> genus2_root_formulas(double c, double d) {
    const AbreschCritical k = abresch_critical({c, d});
    const double f2 = k.f0 * k.f0, g2 = k.g0 * k.g0;
    const double sf = 2 * std::sqrt(f2 + f2 * f2), sg = 2 * std::sqrt(g2 + g2 * g2);
    return {-1 - 2 * f2 - sf, -1 - 2 * f2 + sf, 1 + 2 * g2 - sg, 1 + 2 * g2 + sg};
}

MatrixLaurent genus2_killing_field(double omega, cplx wz, cplx wzz, double c, double d) {
    MatrixLaurent z(2);
    const double ep = std::exp(omega), em = std::exp(-omega);
    const cplx wb = std::conj(wz), wbb = std::conj(wzz);
    const cplx shift = 0.25 * (c - d) * (em - ep);
    // the e^w part carries w_z^2 - w_zz, matching tau_0 of the iteration
    const cplx b0 = I * (em * (wb * wb + wbb) - ep * (wz * wz - wzz) + shift);
    const cplx g1 = -std::conj(b0);
    z.at(-1) << 0, 0.25 * I * ep, 0, 0;
    z.at(0) << wz, b0, -0.25 * I * em, -wz;
    z.at(1) << -wb, -0.25 * I * em, g1, wb;
    z.at(2) << 0, 0, 0.25 * I * ep, 0;
    return z;
}

namespace {

struct Osc {
    double k;  // f'' = -(2 f^3 + k f)
    void step(double& f, double& v, double h) const {
        auto acc = [this](double x) { return -(2 * x * x * x + k * x); };
        const double k1f = v, k1v = acc(f);
        const double k2f = v + 0.5 * h * k1v, k2v = acc(f + 0.5 * h * k1f);
        const double k3f = v + 0.5 * h * k2v, k3v = acc(f + 0.5 * h * k2f);
        const double k4f = v + h * k3v, k4v = acc(f + h * k3f);
        f += h / 6 * (k1f + 2 * k2f + 2 * k3f + k4f);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
};

void solve_axis(const Axis& ax, double k, double start, int substeps, std::vector<double>& f,
                std::vector<double>& fv) {
    const int n = static_cast<int>(ax.t.size());
    f.assign(n, 0.0);
    fv.assign(n, 0.0);
    f[ax.origin] = start;
    const Osc osc{k};
    for (int dir : {1, -1}) {
        double u = start, v = 0;
        for (int i = ax.origin; i + dir >= 0 && i + dir < n; i += dir) {
            const double h = (ax.t[i + dir] - ax.t[i]) / substeps;
            for (int s = 0; s < substeps; ++s) osc.step(u, v, h);
            f[i + dir] = u;
            fv[i + dir] = v;
        }
    }
}

}  // namespace

AbreschSolution abresch_solve(const AbreschParameters& p, const GridSpec& grid, int substeps) {
    AbreschSolution s;
    s.params = p;
    s.crit = abresch_critical(p);
    s.x = make_axis(grid.x0, grid.x1, grid.hx);
    s.y = make_axis(grid.y0, grid.y1, grid.hy);
    solve_axis(s.x, 1 + p.c - p.d, s.crit.f0, substeps, s.f, s.fx);
    solve_axis(s.y, 1 + p.d - p.c, s.crit.g0, substeps, s.g, s.gy);
    for (int i = 0; i < s.nx(); ++i) {
        const double f = s.f[i], v = s.fx[i];
        s.first_integral_drift =
            std::max(s.first_integral_drift, std::abs(v * v + f * f * f * f + (1 + p.c - p.d) * f * f + p.c));
    }
    for (int j = 0; j < s.ny(); ++j) {
        const double g = s.g[j], v = s.gy[j];
        s.first_integral_drift =
            std::max(s.first_integral_drift, std::abs(v * v + g * g * g * g + (1 + p.d - p.c) * g * g + p.d));
    }
    s.omega.resize(static_cast<size_t>(s.nx()) * s.ny());
    for (int j = 0; j < s.ny(); ++j)
        for (int i = 0; i < s.nx(); ++i)
            s.omega[static_cast<size_t>(j) * s.nx() + i] =
                std::asinh((s.fx[i] + s.gy[j]) / (1 + s.f[i] * s.f[i] + s.g[j] * s.g[j]));
    return s;
}

namespace {

// central-difference weights for derivative order 0..3 on offsets -2..2;
// fourth order for the first two derivatives, second order for the third
constexpr double kW[4][5] = {
    {0, 0, 1, 0, 0},
    {1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12},
    {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12},
    {-0.5, 1, 0, -1, 0.5},
};

double step_of(const Axis& a, int i) {
    if (i < 2 || i + 2 >= static_cast<int>(a.t.size()))
        throw std::out_of_range("abresch_jet: node too close to the grid boundary");
    const double h = a.t[i + 1] - a.t[i];
    for (int k = -2; k < 2; ++k)
        if (std::abs(a.t[i + k + 1] - a.t[i + k] - h) > 1e-12 * h)
            throw std::out_of_range("abresch_jet: non-uniform stencil");
    return h;
}

}  // namespace

hier::Jet abresch_jet(const AbreschSolution& s, int ix, int iy) {
    const double hx = step_of(s.x, ix), hy = step_of(s.y, iy);
    auto P = [&](int a, int b) {
        double acc = 0;
        for (int p = -2; p <= 2; ++p)
            for (int q = -2; q <= 2; ++q) {
                const double w = kW[a][p + 2] * kW[b][q + 2];
                if (w != 0) acc += w * s.omega_at(ix + p, iy + q);
            }
        return acc / (std::pow(hx, a) * std::pow(hy, b));
    };
    hier::Jet j;
    j.omega = s.omega_at(ix, iy);
    const cplx w1 = 0.5 * (P(1, 0) - I * P(0, 1));
    const cplx w2 = 0.25 * (P(2, 0) - 2.0 * I * P(1, 1) - P(0, 2));
    const cplx w3 = 0.125 * (P(3, 0) - 3.0 * I * P(2, 1) - 3.0 * P(1, 2) + I * P(0, 3));
    j.d[1] = w1, j.d[2] = w2, j.d[3] = w3;
    j.d[-1] = std::conj(w1), j.d[-2] = std::conj(w2), j.d[-3] = std::conj(w3);
    return j;
}

double relation_residual(const AbreschSolution& s, int ix, int iy) {
    const hier::Jet j = abresch_jet(s, ix, iy);
    const cplx u2 = hier::eval_jet(hier::reference_u2(), j);
    const double cd = s.params.c - s.params.d;
    return std::abs(u2 + 0.25 * j.d.at(-1) - 0.5 * cd * j.d.at(1));
}

double additional_symmetry_defect(const SpectralPolynomial& a) {
    double m = 0;
    const int n = static_cast<int>(a.coef.size());
    for (int k = 0; k < n; ++k) m = std::max(m, std::abs(a.coef[k] - a.coef[n - 1 - k]));
    return m;
}

FamilyPreset preset(int genus, const FamilyParams& params) {
    FamilyPreset p;
    p.genus = genus;
    p.params = params;
    auto in01 = [](const std::optional<double>& v) { return v && *v > 0 && *v < 1; };
    switch (genus) {
        case 0:
            if (params.alpha || params.beta) throw std::invalid_argument("genus 0 takes no parameters");
            p.potential = flat_potential();
            p.a = make_spectral(0, {-1.0 / 16});
            break;
        case 1: {
            if (params.alpha.has_value() == params.beta.has_value())
                throw std::invalid_argument("genus 1 takes exactly one of alpha, beta");
            const bool hel = params.alpha.has_value();
            const std::optional<double>& v = hel ? params.alpha : params.beta;
            if (!in01(v)) throw std::invalid_argument("genus-1 parameter must lie in (0, 1)");
            const double r = *v;
            p.gamma = hel ? -1.0 : 1.0;
            p.level = (2 - r - 1 / r) / 4;
            p.potential = genus1_killing_field(0.0, std::sqrt(-p.level), p.gamma);
            // product forms of a
            std::vector<cplx> coef = hel ? poly_mul({-r, 1.0}, {-1.0, r}) : poly_mul({r, 1.0}, {1.0, r});
            for (auto& c : coef) c *= (hel ? 1.0 : -1.0) / (16 * r);
            p.a = make_spectral(1, coef);
            break;
        }
        case 2: {
            if (!in01(params.alpha) || !in01(params.beta))
                throw std::invalid_argument("genus 2 needs alpha and beta in (0, 1)");
            const double al = *params.alpha, be = *params.beta;
            p.abresch = abresch_from_roots(al, be);
            const AbreschCritical k = abresch_critical(p.abresch);
            p.gamma = -1.0;
            p.potential = genus2_killing_field(0.0, -0.5 * cplx(k.f0, -k.g0), 0.0, p.abresch.c, p.abresch.d);
            std::vector<cplx> coef = poly_mul(poly_mul({-al, 1.0}, {-1.0, al}), poly_mul({be, 1.0}, {1.0, be}));
            for (auto& c : coef) c /= 16 * al * be;
            p.a = make_spectral(2, coef);
            break;
        }
        default:
            throw std::invalid_argument("genus must be 0, 1 or 2");
    }
    p.spectral = solve_closing(p.a);
    return p;
}

}  // namespace annuli
