#include "annuli/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace annuli {

Axis make_axis(double a, double b, double h) {
    if (!(h > 0)) throw std::invalid_argument("grid step must be positive");
    if (a > 0 || b < 0) throw std::invalid_argument("grid must contain the origin");
    Axis ax;
    const int nneg = (a < 0) ? static_cast<int>(std::ceil(-a / h - 1e-9)) : 0;
    const int npos = (b > 0) ? static_cast<int>(std::ceil(b / h - 1e-9)) : 0;
    for (int k = nneg; k >= 1; --k) ax.t.push_back(a * k / nneg);
    ax.origin = static_cast<int>(ax.t.size());
    ax.t.push_back(0.0);
    for (int k = 1; k <= npos; ++k) ax.t.push_back(b * k / npos);
    return ax;
}

Alpha alpha_of(const MatrixLaurent& zeta) {
    const Mat2& zm1 = zeta.coeff(-1);
    const Mat2& z0 = zeta.coeff(0);
    const cplx al = z0(0, 0), be = zm1(0, 1), ga = z0(1, 0);
    if (be == 0.0) throw std::domain_error("alpha_of: beta_{-1} = 0");
    Alpha r{Laurent(-1, 0), Laurent(0, 1)};
    r.dz.at(-1) << 0, be, 0, 0;
    r.dz.at(0) << al / 2.0, 0, ga, -al / 2.0;
    r.dzb.at(0) << -std::conj(al) / 2.0, -std::conj(ga), 0, std::conj(al) / 2.0;
    r.dzb.at(1) << 0, 0, -std::conj(be), 0;
    return r;
}

double omega_of(const MatrixLaurent& zeta) {
    const cplx v = 4.0 * zeta.coeff(-1)(0, 1) / zeta.delta;
    if (!(v.imag() > 0)) throw std::domain_error("omega_of: Im(4 beta_{-1}/delta) <= 0");
    return std::log(v.imag());
}

std::optional<int> FrameGrid::lambda_index(cplx lam, double tol) const {
    for (int i = 0; i < nl(); ++i)
        if (std::abs(lambdas[i] - lam) <= tol) return i;
    return std::nullopt;
}

std::optional<std::pair<int, int>> FrameGrid::locate(cplx z, double tol) const {
    auto find = [&](const Axis& a, double v) -> std::optional<int> {
        for (int i = 0; i < static_cast<int>(a.t.size()); ++i)
            if (std::abs(a.t[i] - v) <= tol * std::max(1.0, std::abs(v))) return i;
        return std::nullopt;
    };
    auto ix = find(x, z.real());
    auto iy = find(y, z.imag());
    if (!ix || !iy) return std::nullopt;
    return std::make_pair(*ix, *iy);
}

namespace {

// state layout: g+2 zeta coefficients followed by one frame per lambda
struct Stepper {
    int g;
    cplx delta;
    const std::vector<cplx>& lambdas;
    std::vector<cplx> linv;
    std::vector<Mat2> k1, k2, k3, k4, tmp;

    Stepper(int g_, cplx d, const std::vector<cplx>& l) : g(g_), delta(d), lambdas(l) {
        for (auto x : l) linv.push_back(1.0 / x);
        const size_t n = g + 2 + l.size();
        k1.resize(n), k2.resize(n), k3.resize(n), k4.resize(n), tmp.resize(n);
    }

    void deriv(const std::vector<Mat2>& s, cplx w, std::vector<Mat2>& out) const {
        const Mat2& zm1 = s[0];
        const Mat2& z0 = s[1];
        const cplx al = z0(0, 0), be = zm1(0, 1), ga = z0(1, 0);
        if (be == 0.0) throw std::domain_error("flow: beta_{-1} = 0");
        Mat2 m[3];
        m[0] << 0, w * be, 0, 0;
        m[1] << w * al / 2.0 - std::conj(w) * std::conj(al) / 2.0, -std::conj(w) * std::conj(ga), w * ga,
            -w * al / 2.0 + std::conj(w) * std::conj(al) / 2.0;
        m[2] << 0, 0, -std::conj(w) * std::conj(be), 0;
        const int nz = g + 2;
        for (int d = 0; d < nz; ++d) {
            Mat2 acc = Mat2::Zero();
            for (int k = -1; k <= 1; ++k) {
                const int j = d - k;
                if (j < 0 || j >= nz) continue;
                acc += s[j] * m[k + 1] - m[k + 1] * s[j];
            }
            out[d] = acc;
        }
        for (size_t l = 0; l < lambdas.size(); ++l) {
            const Mat2 M = m[0] * linv[l] + m[1] + m[2] * lambdas[l];
            out[nz + l] = s[nz + l] * M;
        }
    }

    void step(std::vector<Mat2>& s, cplx w) {
        const size_t n = s.size();
        deriv(s, w, k1);
        for (size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * k1[i];
        deriv(tmp, w, k2);
        for (size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * k2[i];
        deriv(tmp, w, k3);
        for (size_t i = 0; i < n; ++i) tmp[i] = s[i] + k3[i];
        deriv(tmp, w, k4);
        for (size_t i = 0; i < n; ++i) s[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
};

std::vector<Mat2> pack(const MatrixLaurent& z, const std::vector<Mat2>& frames) {
    std::vector<Mat2> s = z.c;
    s.insert(s.end(), frames.begin(), frames.end());
    return s;
}

void store(FrameGrid& fg, size_t node, const std::vector<Mat2>& s, int g, cplx delta) {
    MatrixLaurent& z = fg.zeta[node];
    z = MatrixLaurent(g, delta);
    std::copy(s.begin(), s.begin() + g + 2, z.c.begin());
    std::copy(s.begin() + g + 2, s.end(), fg.frame.begin() + node * fg.nl());
    fg.omega[node] = omega_of(z);
}

std::vector<Mat2> load(const FrameGrid& fg, size_t node) {
    std::vector<Mat2> s = fg.zeta[node].c;
    s.insert(s.end(), fg.frame.begin() + node * fg.nl(), fg.frame.begin() + (node + 1) * fg.nl());
    return s;
}

}  // namespace

FrameGrid integrate(const MatrixLaurent& xi, const GridSpec& spec, const std::vector<cplx>& lambdas,
                    const FlowOptions& opt) {
    FrameGrid fg;
    fg.x = make_axis(spec.x0, spec.x1, spec.hx);
    fg.y = make_axis(spec.y0, spec.y1, spec.hy);
    fg.lambdas = lambdas;
    const int nx = fg.nx(), ny = fg.ny(), nl = fg.nl(), g = xi.g;
    const int sub = std::max(1, opt.substeps);
    fg.zeta.assign(static_cast<size_t>(nx) * ny, MatrixLaurent());
    fg.frame.assign(static_cast<size_t>(nx) * ny * nl, Mat2::Identity());
    fg.omega.assign(static_cast<size_t>(nx) * ny, 0.0);

    const int ix0 = fg.x.origin, iy0 = fg.y.origin;
    {
        Stepper st(g, xi.delta, fg.lambdas);
        std::vector<Mat2> s0 = pack(xi, std::vector<Mat2>(nl, Mat2::Identity()));
        store(fg, fg.node(ix0, iy0), s0, g, xi.delta);
        for (int dir : {+1, -1}) {
            std::vector<Mat2> s = s0;
            for (int i = ix0; i + dir >= 0 && i + dir < nx; i += dir) {
                const cplx w = (fg.x.t[i + dir] - fg.x.t[i]) / sub;
                for (int k = 0; k < sub; ++k) st.step(s, w);
                store(fg, fg.node(i + dir, iy0), s, g, xi.delta);
            }
        }
    }

    std::atomic<bool> failed{false};
    std::string what;
    auto column = [&](int ix) {
        try {
            Stepper st(g, xi.delta, fg.lambdas);
            const std::vector<Mat2> s0 = load(fg, fg.node(ix, iy0));
            for (int dir : {+1, -1}) {
                std::vector<Mat2> s = s0;
                for (int j = iy0; j + dir >= 0 && j + dir < ny; j += dir) {
                    const cplx w = I * (fg.y.t[j + dir] - fg.y.t[j]) / static_cast<double>(sub);
                    for (int k = 0; k < sub; ++k) st.step(s, w);
                    store(fg, fg.node(ix, j + dir), s, g, xi.delta);
                }
            }
        } catch (const std::exception& e) {
            if (!failed.exchange(true)) what = e.what();
        }
    };
    if (opt.policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int ix = 0; ix < nx; ++ix) column(ix);
    } else {
        for (int ix = 0; ix < nx; ++ix) column(ix);
    }
    if (failed) throw std::domain_error(what);
    return fg;
}

PathResult transport(const MatrixLaurent& zeta0, const std::vector<Mat2>& frames0,
                     const std::vector<cplx>& lambdas, cplx dz, int n) {
    Stepper st(zeta0.g, zeta0.delta, lambdas);
    std::vector<Mat2> s = pack(zeta0, frames0);
    if (n > 0)
        for (int k = 0; k < n; ++k) st.step(s, dz / static_cast<double>(n));
    PathResult r{MatrixLaurent(zeta0.g, zeta0.delta), {}};
    std::copy(s.begin(), s.begin() + zeta0.g + 2, r.zeta.c.begin());
    r.frames.assign(s.begin() + zeta0.g + 2, s.end());
    return r;
}

PathResult integrate_to(const MatrixLaurent& xi, cplx z, const std::vector<cplx>& lambdas, double h,
                        bool x_first) {
    const cplx a = x_first ? cplx(z.real(), 0) : cplx(0, z.imag());
    const cplx b = z - a;
    auto steps = [h](cplx d) { return static_cast<int>(std::ceil(std::abs(d) / h - 1e-9)); };
    PathResult r = transport(xi, std::vector<Mat2>(lambdas.size(), Mat2::Identity()), lambdas, a, steps(a));
    return transport(r.zeta, r.frames, lambdas, b, steps(b));
}

double flatness_defect(const MatrixLaurent& xi, cplx z_target, const std::vector<cplx>& lambdas,
                       double h) {
    if (z_target == 0.0) return 0.0;
    const PathResult p = integrate_to(xi, z_target, lambdas, h, true);
    const PathResult q = integrate_to(xi, z_target, lambdas, h, false);
    double d = distance(p.zeta, q.zeta);
    for (size_t i = 0; i < lambdas.size(); ++i) d = std::max(d, maxabs(p.frames[i] - q.frames[i]));
    return d;
}

double richardson_error(const MatrixLaurent& xi, cplx z, const std::vector<cplx>& lambdas, double h) {
    const PathResult p = integrate_to(xi, z, lambdas, h);
    const PathResult q = integrate_to(xi, z, lambdas, h / 2);
    double d = distance(p.zeta, q.zeta);
    for (size_t i = 0; i < lambdas.size(); ++i) d = std::max(d, maxabs(p.frames[i] - q.frames[i]));
    return d * 16.0 / 15.0;
}

PeriodDefect period_defect(const FrameGrid& fg, cplx tau, cplx lambda0) {
    const auto loc = fg.locate(tau);
    if (!loc) throw std::out_of_range("period_defect: tau is not a grid node");
    const auto il = fg.lambda_index(lambda0);
    if (!il) throw std::out_of_range("period_defect: lambda0 not sampled");
    const Mat2& F = fg.frame_at(loc->first, loc->second, *il);
    PeriodDefect d;
    d.frame = std::min(maxabs(F - Mat2::Identity()), maxabs(F + Mat2::Identity()));
    Mat2 s3;
    s3 << I, 0, 0, -I;
    d.commuting = maxabs(F * s3 - s3 * F);
    d.zeta = distance(fg.zeta_at(loc->first, loc->second), fg.zeta_at(fg.x.origin, fg.y.origin));
    return d;
}

FlowDiagnostics diagnose(const FrameGrid& fg, const std::vector<cplx>& a_samples) {
    FlowDiagnostics out;
    const MatrixLaurent& xi = fg.zeta_at(fg.x.origin, fg.y.origin);
    std::vector<cplx> a0;
    for (auto l : a_samples) a0.push_back(-l * xi.eval(l).determinant());
    const long n = static_cast<long>(fg.zeta.size());
    double drift = 0, real = 0, res = 0, det = 0, uni = 0;
#pragma omp parallel for reduction(max : drift, real, res, det, uni)
    for (long k = 0; k < n; ++k) {
        const MatrixLaurent& z = fg.zeta[k];
        for (size_t i = 0; i < a_samples.size(); ++i) {
            const cplx a = -a_samples[i] * z.eval(a_samples[i]).determinant();
            drift = std::max(drift, std::abs(a - a0[i]) / std::abs(a0[i]));
        }
        const auto chk = check_potential(z);
        real = std::max(real, chk.reality);
        res = std::max(res, chk.residue);
        for (int l = 0; l < fg.nl(); ++l) {
            const Mat2& F = fg.frame[k * fg.nl() + l];
            det = std::max(det, std::abs(F.determinant() - 1.0));
            if (std::abs(std::abs(fg.lambdas[l]) - 1.0) < 1e-12)
                uni = std::max(uni, maxabs(F * F.adjoint() - Mat2::Identity()));
        }
    }
    out.a_drift = drift;
    out.reality = real;
    out.residue = res;
    out.det_defect = det;
    out.unitarity = uni;
    return out;
}

namespace {
double d2(const std::vector<double>& t, int i, double fm, double f0, double fp) {
    const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
    return 2.0 * ((fp - f0) / hp - (f0 - fm) / hm) / (hp + hm);
}
double d1(const std::vector<double>& t, int i, double fm, double f0, double fp) {
    const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
    return (hm * hm * (fp - f0) + hp * hp * (f0 - fm)) / (hm * hp * (hm + hp));
}
}  // namespace

std::vector<double> sinh_gordon_residual(const FrameGrid& fg) {
    std::vector<double> r;
    for (int iy = 1; iy + 1 < fg.ny(); ++iy)
        for (int ix = 1; ix + 1 < fg.nx(); ++ix) {
            auto w = [&](int i, int j) { return fg.omega[fg.node(i, j)]; };
            const double o = w(ix, iy);
            const double lap = d2(fg.x.t, ix, w(ix - 1, iy), o, w(ix + 1, iy)) +
                               d2(fg.y.t, iy, w(ix, iy - 1), o, w(ix, iy + 1));
            r.push_back(lap + std::sinh(o) * std::cosh(o));
        }
    return r;
}

double omega_z_consistency(const FrameGrid& fg) {
    double m = 0;
    for (int iy = 1; iy + 1 < fg.ny(); ++iy)
        for (int ix = 1; ix + 1 < fg.nx(); ++ix) {
            auto w = [&](int i, int j) { return fg.omega[fg.node(i, j)]; };
            const double o = w(ix, iy);
            const double wx = d1(fg.x.t, ix, w(ix - 1, iy), o, w(ix + 1, iy));
            const double wy = d1(fg.y.t, iy, w(ix, iy - 1), o, w(ix, iy + 1));
            const cplx wz = 0.5 * cplx(wx, -wy);
            m = std::max(m, std::abs(fg.zeta_at(ix, iy).coeff(0)(0, 0) - wz));
        }
    return m;
}

}  // namespace annuli
