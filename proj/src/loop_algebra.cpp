#include "annuli/loop_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

namespace annuli {

TracelessMatrix::TracelessMatrix(const Mat2& m)
    : a(0.5 * (m(0, 0) - m(1, 1))), b(m(0, 1)), c(m(1, 0)) {}

Mat2 TracelessMatrix::mat() const {
    Mat2 m;
    m << a, b, c, -a;
    return m;
}

Mat2 dagger(const Mat2& m) { return m.adjoint(); }

double opnorm(const Mat2& m) {
    Eigen::JacobiSVD<Mat2> svd(m);
    return svd.singularValues()(0);
}

double maxabs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

Laurent::Laurent(int lo_, int hi_) : lo(lo_), c(std::max(0, hi_ - lo_ + 1), Mat2::Zero()) {}

Mat2 Laurent::coeff(int d) const {
    if (d < lo || d > hi()) return Mat2::Zero();
    return c[d - lo];
}

Mat2& Laurent::at(int d) {
    if (c.empty()) {
        lo = d;
        c.assign(1, Mat2::Zero());
    } else if (d < lo) {
        c.insert(c.begin(), lo - d, Mat2::Zero());
        lo = d;
    } else if (d > hi()) {
        c.resize(d - lo + 1, Mat2::Zero());
    }
    return c[d - lo];
}

Mat2 Laurent::eval(cplx lam) const {
    // Horner on the polynomial part, then shift
    Mat2 s = Mat2::Zero();
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) s = s * lam + c[k];
    return s * std::pow(lam, lo);
}

double Laurent::maxabs() const {
    double m = 0;
    for (const auto& x : c) m = std::max(m, annuli::maxabs(x));
    return m;
}

Laurent& Laurent::operator+=(const Laurent& o) {
    for (int d = o.lo; d <= o.hi(); ++d) at(d) += o.coeff(d);
    return *this;
}

Laurent& Laurent::operator-=(const Laurent& o) {
    for (int d = o.lo; d <= o.hi(); ++d) at(d) -= o.coeff(d);
    return *this;
}

Laurent& Laurent::operator*=(cplx s) {
    for (auto& x : c) x *= s;
    return *this;
}

Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
Laurent operator-(Laurent a, const Laurent& b) { return a -= b; }
Laurent operator*(cplx s, Laurent a) { return a *= s; }

Laurent operator*(const Laurent& a, const Laurent& b) {
    if (a.c.empty() || b.c.empty()) return {};
    Laurent r(a.lo + b.lo, a.hi() + b.hi());
    for (int i = a.lo; i <= a.hi(); ++i)
        for (int j = b.lo; j <= b.hi(); ++j) r.at(i + j) += a.coeff(i) * b.coeff(j);
    return r;
}

Laurent commutator(const Laurent& a, const Laurent& b) { return a * b - b * a; }

double truncate(Laurent& x, int lo, int hi) {
    double dropped = 0;
    Laurent r(lo, hi);
    for (int d = x.lo; d <= x.hi(); ++d) {
        if (d < lo || d > hi)
            dropped = std::max(dropped, maxabs(x.coeff(d)));
        else
            r.at(d) = x.coeff(d);
    }
    x = std::move(r);
    return dropped;
}

MatrixLaurent::MatrixLaurent(int g_, cplx delta_) : g(g_), delta(delta_), c(g_ + 2, Mat2::Zero()) {}

Mat2 MatrixLaurent::eval(cplx lam) const { return laurent().eval(lam); }

Laurent MatrixLaurent::laurent() const {
    Laurent l(-1, g);
    l.c = c;
    return l;
}

MatrixLaurent MatrixLaurent::from(const Laurent& x, int g, cplx delta) {
    MatrixLaurent r(g, delta);
    for (int d = -1; d <= g; ++d) r.at(d) = x.coeff(d);
    return r;
}

double MatrixLaurent::maxabs() const {
    double m = 0;
    for (const auto& x : c) m = std::max(m, annuli::maxabs(x));
    return m;
}

MatrixLaurent operator+(const MatrixLaurent& a, const MatrixLaurent& b) {
    MatrixLaurent r = a;
    for (size_t k = 0; k < r.c.size(); ++k) r.c[k] += b.c[k];
    return r;
}

MatrixLaurent operator-(const MatrixLaurent& a, const MatrixLaurent& b) {
    MatrixLaurent r = a;
    for (size_t k = 0; k < r.c.size(); ++k) r.c[k] -= b.c[k];
    return r;
}

MatrixLaurent operator*(cplx s, const MatrixLaurent& a) {
    MatrixLaurent r = a;
    for (auto& x : r.c) x *= s;
    return r;
}

double distance(const MatrixLaurent& a, const MatrixLaurent& b) {
    if (a.g != b.g) return INFINITY;
    return (a - b).maxabs();
}

MatrixLaurent star(const MatrixLaurent& x) {
    MatrixLaurent r(x.g, x.delta);
    for (int d = -1; d <= x.g; ++d) r.at(d) = x.coeff(x.g - 1 - d).adjoint();
    return r;
}

MatrixLaurent symmetrize(const MatrixLaurent& x, double* correction) {
    MatrixLaurent r = 0.5 * (x - star(x));
    for (auto& m : r.c) m = TracelessMatrix(m).mat();
    if (correction) *correction = (r - x).maxabs();
    return r;
}

MatrixLaurent random_potential(int g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), ur(0.1, 1.0);
    auto rc = [&] { return cplx(u(rng), u(rng)); };
    MatrixLaurent x(g);
    for (int d = -1; d <= g; ++d) {
        const cplx a = rc(), b = rc(), c = rc();
        x.at(d) << a, b, c, -a;
    }
    x.at(-1) << 0, I * ur(rng), 0, 0;
    x.at(g) = -x.coeff(-1).adjoint();
    return symmetrize(x);
}

MatrixLaurent flat_potential() {
    MatrixLaurent x(0);
    x.at(-1) << 0, I / 4.0, 0, 0;
    x.at(0) << 0, 0, I / 4.0, 0;
    return x;
}

MatrixLaurent gauge(const MatrixLaurent& x, cplx delta) {
    MatrixLaurent r = x;
    r.delta = x.delta * delta;
    for (auto& m : r.c) {
        m(0, 1) *= delta;
        m(1, 0) *= std::conj(delta);
    }
    return r;
}

cplx SpectralPolynomial::eval(cplx lam) const { return poly_eval(coef, lam); }

bool SpectralPolynomial::has(ClassTag t) const {
    return std::find(tags.begin(), tags.end(), t) != tags.end();
}

PotentialCheck check_potential(const MatrixLaurent& x, double tol) {
    PotentialCheck r;
    const double scale = std::max(1.0, x.maxabs());
    r.reality = (x + star(x)).maxabs() / scale;
    for (const auto& m : x.c) r.reality = std::max(r.reality, std::abs(m.trace()) / scale);
    const Mat2 res = x.coeff(-1);
    const cplx ray = res(0, 1) / (I * x.delta);
    r.residue = std::max({std::abs(res(0, 0)), std::abs(res(1, 0)), std::abs(res(1, 1)),
                          std::abs(ray.imag())}) /
                scale;
    r.nondegeneracy = std::abs((x.coeff(-1) * x.coeff(0)).trace());
    if (std::abs(std::abs(x.delta) - 1.0) > tol)
        r.violated = "delta_unimodular";
    else if (r.reality > tol)
        r.violated = "star_reality";
    else if (r.residue > tol || ray.real() <= tol * scale)
        r.violated = "residue_ray";
    else if (r.nondegeneracy <= tol * scale * scale)
        r.violated = "nondegeneracy";
    r.ok = r.violated.empty();
    return r;
}

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<cplx> r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

cplx poly_eval(const std::vector<cplx>& a, cplx x) {
    cplx s = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * x + *it;
    return s;
}

SpectralPolynomial det_poly(const MatrixLaurent& x, double tol) {
    const auto chk = check_potential(x, tol);
    if (chk.violated == "residue_ray" || chk.violated == "delta_unimodular")
        throw std::invalid_argument("det_poly: " + chk.violated);
    const int g = x.g;
    // det[[p,q],[r,-p]] = -p^2 - q r; a = -l det, index shift by +1
    std::vector<cplx> full(2 * g + 3, 0.0);  // degrees -1 .. 2g+1
    for (int i = -1; i <= g; ++i)
        for (int j = -1; j <= g; ++j) {
            const Mat2 &A = x.coeff(i), &B = x.coeff(j);
            const cplx p = 0.5 * (A(0, 0) - A(1, 1)), pp = 0.5 * (B(0, 0) - B(1, 1));
            full[i + j + 2] += p * pp + A(0, 1) * B(1, 0);
        }
    std::vector<cplx> coef(full.begin() + 1, full.end() - 1);
    return make_spectral(g, std::move(coef));
}

SpectralPolynomial make_spectral(int g, std::vector<cplx> coef) {
    SpectralPolynomial a;
    a.g = g;
    coef.resize(2 * g + 1, 0.0);
    a.coef = std::move(coef);
    classify(a);
    return a;
}

double reality_defect(const SpectralPolynomial& a) {
    const int n = 2 * a.g;
    double scale = 0, d = 0;
    for (int k = 0; k <= n; ++k) {
        scale = std::max(scale, std::abs(a.coef[k]));
        d = std::max(d, std::abs(std::conj(a.coef[n - k]) - a.coef[k]));
    }
    return scale > 0 ? d / scale : d;
}

double sign_max(const SpectralPolynomial& a, double* imag_max) {
    constexpr int N = 720;
    double re = -INFINITY, im = 0;
    for (int k = 0; k < N; ++k) {
        const cplx l = std::polar(1.0, 2 * std::numbers::pi * k / N);
        const cplx v = a.eval(l) * std::pow(l, -a.g);
        re = std::max(re, v.real());
        im = std::max(im, std::abs(v.imag()));
    }
    if (imag_max) *imag_max = im;
    return re;
}

void classify(SpectralPolynomial& a) {
    a.tags.clear();
    double im = 0;
    const double re = sign_max(a, &im);
    const bool mg = reality_defect(a) <= 1e-10 && re <= 1e-10 && im <= 1e-10 &&
                    std::abs(a.coef[0]) > 1e-14;
    if (!mg) return;
    a.tags.push_back(ClassTag::Mg);
    if (re >= -1e-10) return;
    a.tags.push_back(ClassTag::Mg0);
    const auto pr = paired_roots(a);
    if (!pr.ok) return;
    int simple = 0;
    for (const auto& p : pr.pairs) simple += (p.multiplicity == 1) ? 2 : 0;
    if (simple == 2 * a.g) a.tags.push_back(ClassTag::Mg1);
}

std::vector<cplx> poly_roots(const std::vector<cplx>& coef) {
    std::vector<cplx> c = coef;
    double scale = 0;
    for (auto v : c) scale = std::max(scale, std::abs(v));
    while (!c.empty() && std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::vector<cplx> dc(n);
    for (int k = 1; k <= n; ++k) dc[k - 1] = c[k] * static_cast<double>(k);
    for (auto& x : r) {
        const cplx d = poly_eval(dc, x);
        if (std::abs(d) > 1e-12 * scale) {
            const cplx step = poly_eval(c, x) / d;
            if (std::abs(step) < 1e-3 * std::max(1.0, std::abs(x))) x -= step;
        }
    }
    return r;
}

PairingResult paired_roots(const SpectralPolynomial& a, double tol) {
    PairingResult out;
    auto roots = poly_roots(a.coef);
    // cluster numerically multiple roots
    struct Cluster {
        cplx z;
        int m;
    };
    std::vector<Cluster> cl;
    std::vector<bool> used(roots.size(), false);
    for (size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        cplx sum = roots[i];
        int m = 1;
        used[i] = true;
        for (size_t j = i + 1; j < roots.size(); ++j)
            if (!used[j] && std::abs(roots[j] - roots[i]) < 1e-5 * std::max(1.0, std::abs(roots[i]))) {
                used[j] = true;
                sum += roots[j];
                ++m;
            }
        cl.push_back({sum / static_cast<double>(m), m});
    }
    std::vector<bool> taken(cl.size(), false);
    for (size_t i = 0; i < cl.size(); ++i) {
        if (taken[i]) continue;
        const cplx z = cl[i].z;
        const cplx inv = 1.0 / std::conj(z);
        const double sc = std::max(1.0, std::abs(inv));
        if (std::abs(std::abs(z) - 1.0) < 1e-6) {
            taken[i] = true;
            out.residual = std::max(out.residual, std::abs(z - inv) / sc);
            out.pairs.push_back({z / std::abs(z), z / std::abs(z), cl[i].m, true});
            continue;
        }
        size_t best = cl.size();
        double bd = INFINITY;
        for (size_t j = 0; j < cl.size(); ++j) {
            if (j == i || taken[j]) continue;
            const double d = std::abs(cl[j].z - inv);
            if (d < bd) bd = d, best = j;
        }
        taken[i] = true;
        if (best == cl.size()) {
            out.ok = false;
            out.residual = INFINITY;
            continue;
        }
        taken[best] = true;
        out.residual = std::max(out.residual, bd / sc);
        if (cl[best].m != cl[i].m) out.ok = false;
        RootPair p;
        p.alpha = std::abs(z) < 1 ? z : cl[best].z;
        p.partner = std::abs(z) < 1 ? cl[best].z : z;
        p.multiplicity = cl[i].m;
        out.pairs.push_back(p);
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const RootPair& x, const RootPair& y) {
        if (x.alpha.real() != y.alpha.real()) return x.alpha.real() < y.alpha.real();
        return x.alpha.imag() < y.alpha.imag();
    });
    if (out.residual > tol) out.ok = false;
    return out;
}

double coefficient_bound(const SpectralPolynomial& a, int samples) {
    auto f = [&](double t) {
        const cplx l = std::polar(1.0, t);
        return std::sqrt(std::max(0.0, -(a.eval(l) * std::pow(l, -a.g)).real()));
    };
    const double h = 2 * std::numbers::pi / samples;
    double s = 0, best = 0;
    for (int k = 0; k < samples; ++k) {
        const double v = f(h * k);
        if (v > s) s = v, best = h * k;
    }
    // polish the sampled maximum
    const auto r = boost::math::tools::brent_find_minima([&](double t) { return -f(t); }, best - h, best + h, 50);
    return std::max(s, -r.second);
}

}  // namespace annuli
