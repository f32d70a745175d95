#include "annuli/spectral_curve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace annuli {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr double kPi = std::numbers::pi;
constexpr int kRefSamples = 4096;

cplx quad(const std::function<cplx(double)>& f, double a, double b) {
    double err = 0;
    return GK::integrate(f, a, b, 15, 1e-12, &err);
}

// Continuation of sqrt(q(u)) along u in [0, 1] from a given starting value. Dense
// reference samples fix the branch; evaluation picks the sign closest to the
// interpolated reference.
class Branch {
public:
    Branch(const std::function<cplx(double)>& q, cplx start) : q_(q), ref_(kRefSamples + 1) {
        ref_[0] = start;
        for (int k = 1; k <= kRefSamples; ++k) {
            cplx s = std::sqrt(q_(static_cast<double>(k) / kRefSamples));
            const cplx pred = (k >= 2) ? 2.0 * ref_[k - 1] - ref_[k - 2] : ref_[k - 1];
            if (std::abs(s - pred) > std::abs(s + pred)) s = -s;
            ref_[k] = s;
        }
    }

    cplx operator()(double u) const {
        cplx s = std::sqrt(q_(u));
        const double x = std::clamp(u, 0.0, 1.0) * kRefSamples;
        const int k = std::min(static_cast<int>(x), kRefSamples - 1);
        const double t = x - k;
        const cplx pred = (1.0 - t) * ref_[k] + t * ref_[k + 1];
        if (std::abs(s - pred) > std::abs(s + pred)) s = -s;
        return s;
    }

    cplx end() const { return ref_.back(); }

private:
    std::function<cplx(double)> q_;
    std::vector<cplx> ref_;
};

double angle_mod(double x) {
    x = std::fmod(x, 2 * kPi);
    return x < 0 ? x + 2 * kPi : x;
}

cplx sqrt_a0(const SpectralPolynomial& a, double* theta = nullptr) {
    const cplx a0 = a.coef.at(0);
    if (std::abs(a0) == 0.0) throw std::invalid_argument("a(0) = 0");
    const double Th = std::arg(-a0);
    if (theta) *theta = Th;
    return I * std::sqrt(std::abs(a0)) * std::exp(I * (Th / 2));
}

// b_0 per unit t, where t = tau e^{i Theta/2}
cplx b0_unit(const SpectralPolynomial& a) {
    double Th = 0;
    sqrt_a0(a, &Th);
    return std::sqrt(std::abs(a.coef[0])) / 8.0 * std::exp(I * (Th / 2));
}

// w(1 - s) and dw/dp at p = 1 - s; parametrized from the end so that points close
// to a terminal branch point keep full relative precision
struct Piece {
    std::function<cplx(double)> w;
    std::function<cplx(double)> dw;
    std::function<cplx(double)> dl;  // w(1-s)^2 - w(1)^2 without cancellation
};

// first n Taylor coefficients of 2 b/sqrt(a) with sqrt(a)(0) = s0
std::vector<cplx> sqrt_quotient_series(const std::vector<cplx>& b, const std::vector<cplx>& a, cplx s0, int n) {
    auto co = [](const std::vector<cplx>& v, int k) { return k < static_cast<int>(v.size()) ? v[k] : cplx{}; };
    std::vector<cplx> s(n), q(n), G(n);
    s[0] = s0;
    for (int m = 1; m < n; ++m) {
        cplx acc = co(a, m);
        for (int j = 1; j < m; ++j) acc -= s[j] * s[m - j];
        s[m] = acc / (2.0 * s0);
    }
    q[0] = 1.0 / s0;
    for (int m = 1; m < n; ++m) {
        cplx acc = 0;
        for (int j = 1; j <= m; ++j) acc += s[j] * q[m - j];
        q[m] = -acc / s0;
    }
    for (int m = 0; m < n; ++m)
        for (int j = 0; j <= m; ++j) G[m] += 2.0 * co(b, j) * q[m - j];
    return G;
}

struct Factored {
    cplx lead;
    std::vector<cplx> roots;
    cplx operator()(cplx l) const {
        cplx v = lead;
        for (cplx r : roots) v *= (l - r);
        return v;
    }
};

}  // namespace

double ClosingData::max_quantization_defect() const {
    double m = 0;
    for (const auto& q : quantization) m = std::max(m, q.defect);
    return m;
}

SpectralCurve build_curve(const SpectralPolynomial& a, double tol) {
    SpectralCurve c;
    c.a = a;
    c.roots = paired_roots(a, tol);
    if (!c.roots.ok) throw std::invalid_argument("build_curve: root pairing failed");
    for (const auto& p : c.roots.pairs) {
        if (p.multiplicity != 1) throw std::invalid_argument("build_curve: repeated root");
        if (p.on_circle) throw std::invalid_argument("build_curve: root on the unit circle");
        c.finite_branch_points.push_back(p.alpha);
        c.finite_branch_points.push_back(p.partner);
    }
    c.genus = static_cast<int>(c.roots.pairs.size());
    if (2 * c.genus != static_cast<int>(poly_roots(a.coef).size()))
        throw std::invalid_argument("build_curve: degree does not match the pairing");
    return c;
}

cplx segment_integral(const SpectralPolynomial& a, const std::vector<cplx>& b, cplx alpha) {
    const cplx beta = 1.0 / std::conj(alpha);
    const cplx L = beta - alpha;
    std::vector<cplx> other;
    bool drop_a = false, drop_b = false;
    for (cplx r : poly_roots(a.coef)) {
        if (!drop_a && std::abs(r - alpha) < 1e-6 * std::max(1.0, std::abs(alpha))) {
            drop_a = true;
            continue;
        }
        if (!drop_b && std::abs(r - beta) < 1e-6 * std::max(1.0, std::abs(beta))) {
            drop_b = true;
            continue;
        }
        other.push_back(r);
    }
    if (!drop_a || !drop_b) throw std::invalid_argument("segment_integral: endpoints are not roots of a");
    const cplx lead = a.coef.back();
    auto lam = [&](double u) { return alpha + L * (1.0 - std::cos(kPi * u)) / 2.0; };
    auto w2 = [&](double u) {
        const cplx l = lam(u);
        cplx p = -lead / l;
        for (cplx r : other) p *= (l - r);
        return p;
    };
    Branch W(w2, std::sqrt(w2(0.0)));
    auto f = [&](double u) {
        const cplx l = lam(u);
        return poly_eval(b, l) / (W(u) * l * l) * kPi;
    };
    return quad(f, 0.0, 1.0);
}

HValue integrate_h(const ClosingData& cd, cplx lambda, const HPath& path) {
    const SpectralPolynomial& a = cd.a;
    const std::vector<cplx>& b = cd.b;
    if (std::abs(lambda) == 0.0) throw std::invalid_argument("integrate_h: target at lambda = 0");
    const cplx S0 = sqrt_a0(a);

    const double th = std::arg(lambda), rt = std::abs(lambda);
    double gap = 2 * kPi;
    for (cplx r : poly_roots(a.coef)) {
        const double d = angle_mod(std::arg(r) - th);
        if (d < 1e-9 || d > 2 * kPi - 1e-9) continue;
        gap = std::min(gap, d);
    }
    const double eps = path.eps > 0 ? path.eps : std::min(gap / 2, 0.5);
    if (eps >= gap) throw std::invalid_argument("integrate_h: path crosses a cut");

    // Taylor series of G(l) = 2 b(l)/sqrt(a(l)) at 0, used inside a quarter of the root radius
    const Factored af{a.coef.back(), poly_roots(a.coef)};
    double rmin = 1e300;
    for (cplx r : af.roots) rmin = std::min(rmin, std::abs(r));
    const double taylor_radius = af.roots.empty() ? 1.0 : rmin / 4;
    const std::vector<cplx> G = sqrt_quotient_series(b, a.coef, S0, 40);
    const cplx k = -2.0 * b.at(0) / S0;

    const double R = std::sqrt(rt);
    std::vector<Piece> pieces;
    auto ray = [&](double psi, double r0, double r1) {
        const cplx e = std::exp(I * psi);
        const double d = r1 - r0;
        pieces.push_back({[=](double s) { return (r1 - s * d) * e; }, [=](double) { return d * e; },
                          [=](double s) { return -s * d * (2 * r1 - s * d) * e * e; }});
    };
    auto arc = [&](double r, double p0, double p1) {
        const double d = p1 - p0;
        pieces.push_back({[=](double s) { return r * std::exp(I * (p1 - s * d)); },
                          [=](double s) { return I * d * r * std::exp(I * (p1 - s * d)); },
                          [=](double s) {
                              return r * r * std::exp(I * (2 * p1 - s * d)) * (-2.0 * I * std::sin(s * d));
                          }});
    };
    const double psi1 = (th + eps) / 2;
    if (path.mid_radius > 0) {
        const double Rm = std::sqrt(path.mid_radius);
        const double psi2 = (th + eps / 2) / 2;
        ray(psi1, 0.0, Rm);
        arc(Rm, psi1, psi2);
        ray(psi2, Rm, R);
        arc(R, psi2, th / 2);
    } else {
        ray(psi1, 0.0, R);
        arc(R, psi1, th / 2);
    }

    int end_root = -1;
    for (size_t j = 0; j < af.roots.size(); ++j)
        if (std::abs(af.roots[j] - lambda) <= 1e-12 * std::max(1.0, rt)) end_root = static_cast<int>(j);
    const bool singular_end = end_root >= 0;

    cplx S = S0, total = 0;
    for (size_t ip = 0; ip < pieces.size(); ++ip) {
        const Piece& pc = pieces[ip];
        const bool sing = singular_end && ip + 1 == pieces.size();
        // s = 1 - p; near a terminal root p = 1 - (1-u)^2 makes sqrt(a) linear in u
        auto smap = [sing](double u) { return sing ? (1.0 - u) * (1.0 - u) : 1.0 - u; };
        auto dp = [sing](double u) { return sing ? 2.0 * (1.0 - u) : 1.0; };
        auto q = [&](double u) {
            const double sv = smap(u);
            const cplx w = pc.w(sv);
            if (!sing) return af(w * w);
            // the factor of the terminal root is taken as lambda - lambda_end exactly
            cplx v = af.lead * pc.dl(sv);
            for (size_t j = 0; j < af.roots.size(); ++j)
                if (static_cast<int>(j) != end_root) v *= (w * w - af.roots[j]);
            return v;
        };
        Branch br(q, S);
        auto f = [&](double u) -> cplx {
            const double sv = smap(u);
            const cplx w = pc.w(sv);
            cplx val;
            const cplx l = w * w;
            if (std::abs(l) < taylor_radius) {
                val = 0;
                for (size_t n = G.size() - 1; n >= 1; --n) val = val * l + G[n];
            } else {
                val = (2.0 * poly_eval(b, l) / br(u) + k) / l;
            }
            return val * pc.dw(sv) * dp(u);
        };
        total += quad(f, 0.0, 1.0);
        S = br.end();
    }
    const cplx wt = pieces.back().w(0.0);
    return {k / wt + total, S / wt};
}

ClosingData solve_closing(const SpectralPolynomial& a, std::optional<cplx> tau_hint) {
    const SpectralCurve curve = build_curve(a);
    const int g = curve.genus;
    if (a.g != g) throw std::invalid_argument("solve_closing: a has fewer than 2g distinct roots");
    ClosingData cd;
    cd.a = a;
    sqrt_a0(a, &cd.Theta);
    const cplx c0 = b0_unit(a);

    std::vector<cplx> bfix(g + 2, cplx{});
    bfix[0] = c0;
    bfix[g + 1] = -std::conj(c0);
    std::vector<std::vector<cplx>> basis;
    for (int kk = 1; 2 * kk < g + 1; ++kk) {
        std::vector<cplx> u(g + 2, cplx{}), v(g + 2, cplx{});
        u[kk] = 1.0, u[g + 1 - kk] = -1.0;
        v[kk] = I, v[g + 1 - kk] = I;
        basis.push_back(u);
        basis.push_back(v);
    }
    if ((g + 1) % 2 == 0) {
        std::vector<cplx> m(g + 2, cplx{});
        m[(g + 1) / 2] = I;
        basis.push_back(m);
    }

    std::vector<cplx> b = bfix;
    if (g > 0) {
        Eigen::MatrixXd M(g, g);
        Eigen::VectorXd rhs(g);
        for (int i = 0; i < g; ++i) {
            const cplx al = curve.roots.pairs[i].alpha;
            rhs(i) = -segment_integral(a, bfix, al).real();
            for (int j = 0; j < g; ++j) M(i, j) = segment_integral(a, basis[j], al).real();
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        const auto sv = svd.singularValues();
        if (!(sv(g - 1) > 1e-14 * sv(0))) throw std::runtime_error("solve_closing: singular closing system");
        cd.condition = sv(0) / sv(g - 1);
        const Eigen::VectorXd x = M.colPivHouseholderQr().solve(rhs);
        for (int j = 0; j < g; ++j)
            for (int kk = 0; kk < g + 2; ++kk) b[kk] += x(j) * basis[j][kk];
    }

    cd.b = b;
    cd.tau = std::exp(-I * (cd.Theta / 2));
    const double im1 = integrate_h(cd, 1.0).h.imag();
    if (std::abs(im1) < 1e-14) throw std::runtime_error("solve_closing: h(1) vanishes identically");
    double kq = im1 > 0 ? 1.0 : -1.0;
    if (tau_hint) {
        const double th = (*tau_hint * std::exp(I * (cd.Theta / 2))).real();
        kq = std::round(th * im1 / kPi);
        if (kq == 0) kq = (th * im1 >= 0) ? 1.0 : -1.0;
    }
    const double t = kPi * kq / im1;
    for (auto& c : cd.b) c *= t;
    cd.tau = t * std::exp(-I * (cd.Theta / 2));

    for (const auto& p : curve.roots.pairs) cd.segment_integrals.push_back(segment_integral(a, cd.b, p.alpha));
    std::vector<cplx> pts{1.0};
    for (const auto& p : curve.roots.pairs) {
        pts.push_back(p.alpha);
        pts.push_back(p.partner);
    }
    for (cplx l : pts) {
        const cplx h = integrate_h(cd, l).h;
        cd.quantization.push_back({l, h, std::abs(h - I * kPi * std::round(h.imag() / kPi))});
    }
    return cd;
}

SpectralDataReport verify_spectral_data(const ClosingData& cd, double tol_alg, double tol_quant) {
    SpectralDataReport r;
    const SpectralPolynomial& a = cd.a;
    const int g = a.g;
    r.reality = reality_defect(a);
    double im = 0;
    r.sign = std::max(sign_max(a, &im), im);
    const cplx a0 = a.coef.at(0);
    r.theta_phase = std::abs(a0) > 0 ? std::abs(-a0 / std::abs(a0) - std::exp(I * cd.Theta)) : 1.0;

    if (static_cast<int>(cd.b.size()) != g + 2) {
        r.b_reality = 1.0;
    } else {
        for (int k = 0; k <= g + 1; ++k)
            r.b_reality = std::max(r.b_reality, std::abs(cd.b[g + 1 - k] + std::conj(cd.b[k])));
    }
    const cplx b0 = cd.b.empty() ? cplx{} : cd.b[0];
    const cplx want = std::sqrt(std::abs(a0)) / 8.0 * cd.tau * std::exp(I * cd.Theta);
    r.b0_relation = std::abs(b0 - want) + std::abs((b0 * std::exp(-I * (cd.Theta / 2))).imag());

    std::vector<cplx> pts{1.0};
    try {
        const SpectralCurve curve = build_curve(a);
        for (const auto& p : curve.roots.pairs) {
            r.cut_integrals = std::max(r.cut_integrals, std::abs(segment_integral(a, cd.b, p.alpha)));
            pts.push_back(p.alpha);
            pts.push_back(p.partner);
        }
        for (cplx l : pts) {
            const cplx h = integrate_h(cd, l).h;
            r.quantization = std::max(r.quantization, std::abs(h - I * kPi * std::round(h.imag() / kPi)));
        }
    } catch (const std::exception&) {
        r.cut_integrals = r.quantization = std::numeric_limits<double>::infinity();
    }
    r.ok = r.reality <= tol_alg && r.sign <= 1e-10 && r.theta_phase <= tol_alg && r.b_reality <= tol_alg &&
           r.b0_relation <= tol_alg && r.cut_integrals <= tol_alg && r.quantization <= tol_quant;
    return r;
}

Vec2 eigenvector_at(const MatrixLaurent& xi, cplx lambda, int branch) {
    const Mat2 m = xi.eval(lambda);
    const cplx al = m(0, 0), be = m(0, 1), ga = m(1, 0);
    const cplx nu = (branch >= 0 ? 1.0 : -1.0) * std::sqrt(al * al + be * ga);
    if (std::abs(nu) == 0.0) throw std::domain_error("eigenvector_at: nu = 0");
    if (std::abs(be) >= std::abs(nu + al)) {
        // xi diagonal and nu = -alpha: the eigenline is the second axis
        if (std::abs(be) == 0.0) return Vec2(0.0, 1.0);
        return Vec2(1.0, (nu - al) / be);
    }
    return Vec2(1.0, ga / (nu + al));
}

}  // namespace annuli
