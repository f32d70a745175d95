#include "annuli/dressing.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "annuli/isospectral.hpp"

namespace annuli {

namespace {

constexpr double kUnitTol = 1e-12;

bool unimodular(cplx a) { return std::abs(std::abs(a) - 1.0) < kUnitTol; }

void require_off_circle(cplx alpha0) {
    if (std::abs(alpha0) == 0.0 || unimodular(alpha0))
        throw std::invalid_argument("simple factor needs 0 < |alpha0| != 1");
}

Vec2 perp(const Vec2& v) { return Vec2(-std::conj(v(1)), std::conj(v(0))); }

// quotient of the exact division P / D (D of degree 2), remainder size in *rem.
// Runs from the end with the larger coefficient of D.
std::vector<cplx> divide(std::vector<cplx> P, const std::vector<cplx>& D, double* rem) {
    const int n = static_cast<int>(P.size());
    std::vector<cplx> q(std::max(n - 2, 0), 0.0);
    double r = 0;
    if (std::abs(D[2]) >= std::abs(D[0])) {
        for (int k = n - 1; k >= 2; --k) {
            const cplx c = P[k] / D[2];
            q[k - 2] = c;
            P[k] = 0;
            P[k - 1] -= c * D[1];
            P[k - 2] -= c * D[0];
        }
        for (int k = 0; k < std::min(n, 2); ++k) r = std::max(r, std::abs(P[k]));
    } else {
        for (int k = 0; k + 2 < n; ++k) {
            const cplx c = P[k] / D[0];
            q[k] = c;
            P[k] = 0;
            P[k + 1] -= c * D[1];
            P[k + 2] -= c * D[2];
        }
        for (int k = std::max(n - 2, 0); k < n; ++k) r = std::max(r, std::abs(P[k]));
    }
    if (rem) *rem = r;
    return q;
}

// l * entry (i, j) of x as a polynomial
std::vector<cplx> entry_poly(const MatrixLaurent& x, int i, int j) {
    std::vector<cplx> p(x.g + 2);
    for (int d = -1; d <= x.g; ++d) p[d + 1] = x.coeff(d)(i, j);
    return p;
}

cplx direction(cplx z) { return z / std::abs(z); }

struct ScalarQuotient {
    MatrixLaurent x;
    double remainder = 0;
};

// x / p for a scalar polynomial p of degree 1 or 2
ScalarQuotient divide_scalar(const MatrixLaurent& x, std::vector<cplx> p) {
    const int deg = static_cast<int>(p.size()) - 1;
    if (deg == 1) p.push_back(0.0);
    // degree 1 divisors: D[2] = 0 forces the bottom-up branch
    if (deg == 1 && std::abs(p[0]) == 0.0) throw std::invalid_argument("divide_scalar: p(0) = 0");
    ScalarQuotient out;
    out.x = MatrixLaurent(x.g - deg, x.delta / direction(p[0]));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double r = 0;
            std::vector<cplx> q;
            if (deg == 1) {
                // synthetic division by p0 + p1 l from the bottom
                std::vector<cplx> P = entry_poly(x, i, j);
                const int n = static_cast<int>(P.size());
                q.assign(n - 1, 0.0);
                for (int k = 0; k + 1 < n; ++k) {
                    q[k] = P[k] / p[0];
                    P[k + 1] -= q[k] * p[1];
                }
                r = std::abs(P[n - 1]);
            } else {
                q = divide(entry_poly(x, i, j), p, &r);
            }
            out.remainder = std::max(out.remainder, r);
            for (int d = -1; d <= out.x.g; ++d) out.x.at(d)(i, j) = q[d + 1];
        }
    return out;
}

Mat2 conj_by(const Mat2& U, const Mat2& m) { return U * m * U.adjoint(); }

}  // namespace

Vec2 canonical_line(const Vec2& v) {
    const double n = v.norm();
    if (!(n > 0)) throw std::invalid_argument("canonical_line: zero vector");
    Vec2 u = v / n;
    const int k = std::abs(u(0)) > 1e-14 ? 0 : 1;
    return u * (std::abs(u(k)) / u(k));
}

double fubini_study(const Vec2& a, const Vec2& b) {
    const double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
    return std::acos(std::min(1.0, c));
}

Mat2 line_frame(const Vec2& line) {
    const Vec2 v = line / line.norm();
    Mat2 Q;
    Q.col(0) = v;
    Q.col(1) = perp(v);
    return Q;
}

Mat2 pi_alpha(cplx alpha0, cplx lambda) {
    const cplx s = std::sqrt((lambda - alpha0) / (1.0 - std::conj(alpha0) * lambda));
    Mat2 m;
    m << s, 0, 0, 1.0 / s;
    return m;
}

Mat2 pi_line(const Vec2& line, cplx alpha0, cplx lambda) {
    return conj_by(line_frame(line), pi_alpha(alpha0, lambda));
}

TriangularSplit qr_split(const Mat2& m) {
    const Vec2 m1 = m.col(0), m2 = m.col(1);
    const double rho = m1.norm();
    const Vec2 q1 = m1 / rho;
    const cplx r = q1.dot(m2);
    TriangularSplit s;
    s.Q.col(0) = q1;
    s.Q.col(1) = (m2 - r * q1) * rho;
    s.R << rho, r, 0, 1.0 / rho;
    return s;
}

TriangularSplit rq_split(const Mat2& m) {
    const Eigen::RowVector2cd m1 = m.row(0), m2 = m.row(1);
    const double rho = 1.0 / m2.norm();
    const Eigen::RowVector2cd q2 = rho * m2;
    const cplx r = (m1 * q2.adjoint())(0, 0);
    TriangularSplit s;
    s.Q.row(0) = (m1 - r * q2) / rho;
    s.Q.row(1) = q2;
    s.R << rho, r, 0, 1.0 / rho;
    return s;
}

Mat2 SimpleFactor::unitary() const {
    require_off_circle(alpha0);
    const Mat2 p0 = pi_line(line, alpha0, 0.0);
    return side == Side::left ? qr_split(p0).Q : rq_split(p0).Q;
}

Mat2 SimpleFactor::eval(cplx lambda) const {
    const Mat2 pinv = pi_line(line, alpha0, lambda).inverse();
    return side == Side::left ? Mat2(pinv * unitary()) : Mat2(unitary() * pinv);
}

std::vector<cplx> bubble_polynomial(cplx alpha0) {
    return poly_mul({-alpha0, 1.0}, {1.0, -std::conj(alpha0)});
}

RootRemoval remove_root(const MatrixLaurent& xi, cplx alpha0, double tol) {
    if (std::abs(alpha0) == 0.0) throw std::invalid_argument("remove_root: alpha0 = 0");
    const double scale = std::max(1e-300, xi.maxabs());
    if (maxabs(xi.eval(alpha0)) > tol * scale)
        throw std::invalid_argument("remove_root: xi does not vanish at alpha0");
    RootRemoval r;
    if (unimodular(alpha0)) {
        if (xi.g < 1) throw std::invalid_argument("remove_root: genus too small");
        const cplx c = std::sqrt(-alpha0);
        r.p = {c, std::conj(c)};
        r.gauge_delta = std::conj(c);
    } else {
        if (xi.g < 2) throw std::invalid_argument("remove_root: genus too small");
        r.p = bubble_polynomial(alpha0);
        r.gauge_delta = -std::conj(alpha0) / std::abs(alpha0);
    }
    // g(d)^-1 xi g(d) = gauge(xi, 1/d) with |d| = 1
    const ScalarQuotient q = divide_scalar(gauge(xi, std::conj(r.gauge_delta)), r.p);
    r.reduced = q.x;
    r.remainder = q.remainder / scale;
    return r;
}

NilpotencyCheck nilpotency(const Mat2& a) {
    NilpotencyCheck c;
    c.norm = opnorm(a);
    if (c.norm == 0.0) return c;
    c.det = std::abs(a.determinant()) / (c.norm * c.norm);
    c.square = opnorm(a * a) / c.norm;
    c.ok = c.det <= 1e-9 && c.square <= 1e-8;
    return c;
}

FactorizationResult factorize(const MatrixLaurent& xi, cplx alpha0, double tol) {
    require_off_circle(alpha0);
    if (xi.g < 2) throw std::invalid_argument("factorize: genus must be at least 2");
    const Mat2 A = xi.eval(alpha0);
    const double scale = std::max(1e-300, xi.maxabs());
    if (opnorm(A) <= tol * scale) throw std::invalid_argument("factorize: xi vanishes at alpha0");
    if (!nilpotency(A).ok) throw std::invalid_argument("factorize: xi(alpha0) is not nilpotent");

    FactorizationResult f;
    // kernel = image for a nonzero nilpotent
    f.line = canonical_line(A.col(0).norm() >= A.col(1).norm() ? Vec2(A.col(0)) : Vec2(A.col(1)));
    f.p = bubble_polynomial(alpha0);
    const Mat2 QL = line_frame(f.line);
    MatrixLaurent M(xi.g, xi.delta);
    for (int d = -1; d <= xi.g; ++d) M.at(d) = QL.adjoint() * xi.coeff(d) * QL;

    const cplx ab = std::conj(alpha0);
    double r1 = 0, r2 = 0, r3 = 0;
    const auto at = divide(entry_poly(M, 0, 0), f.p, &r1);
    const auto bt = divide(entry_poly(M, 0, 1), {1.0, -2.0 * ab, ab * ab}, &r2);
    const auto ct = divide(entry_poly(M, 1, 0), {alpha0 * alpha0, -2.0 * alpha0, 1.0}, &r3);
    f.remainder = std::max({r1, r2, r3}) / scale;
    if (f.remainder > tol) throw std::invalid_argument("factorize: alpha0 is not a double root");

    const Mat2 Q0 = qr_split(pi_line(f.line, alpha0, 0.0)).Q;
    const Mat2 U = Q0.adjoint() * QL;
    f.reduced = MatrixLaurent(xi.g - 2, xi.delta * (-ab / std::abs(alpha0)));
    for (int d = -1; d <= xi.g - 2; ++d) {
        Mat2 N;
        N << at[d + 1], bt[d + 1], ct[d + 1], -at[d + 1];
        f.reduced.at(d) = conj_by(U, N);
    }
    f.line_prime = canonical_line(Q0.adjoint() * f.line);
    return f;
}

MatrixLaurent dress(const Vec2& line_prime, const MatrixLaurent& reduced, cplx alpha0) {
    require_off_circle(alpha0);
    const Mat2 Q1 = rq_split(pi_line(line_prime, alpha0, 0.0)).Q;
    const Mat2 QL = line_frame(Q1 * line_prime);
    const Mat2 U = QL.adjoint() * Q1;
    const int g = reduced.g + 2;
    const cplx ab = std::conj(alpha0);
    const std::vector<cplx> p = bubble_polynomial(alpha0), pb = {1.0, -2.0 * ab, ab * ab},
                            pc = {alpha0 * alpha0, -2.0 * alpha0, 1.0};
    MatrixLaurent N(g, reduced.delta * (-alpha0 / std::abs(alpha0)));
    for (int d = -1; d <= reduced.g; ++d) {
        const Mat2 m = conj_by(U, reduced.coeff(d));
        for (int k = 0; k < 3; ++k) {
            Mat2& o = N.at(d + k);
            o(0, 0) += p[k] * m(0, 0);
            o(0, 1) += pb[k] * m(0, 1);
            o(1, 0) += pc[k] * m(1, 0);
            o(1, 1) += p[k] * m(1, 1);
        }
    }
    MatrixLaurent xi(g, N.delta);
    for (int d = -1; d <= g; ++d) xi.at(d) = conj_by(QL, N.coeff(d));
    const PotentialCheck chk = check_potential(xi);
    if (!chk.ok) throw std::logic_error("dress: result fails " + chk.violated);
    return xi;
}

MatrixLaurent synthetic_bubbleton(const MatrixLaurent& base, cplx alpha0, const Vec2& line_prime) {
    require_off_circle(alpha0);
    return dress(line_prime, gauge(base, -std::conj(alpha0) / std::abs(alpha0)), alpha0);
}

double eigenline_margin(const Vec2& line_prime, const MatrixLaurent& reduced, cplx alpha0) {
    const Vec2 w = perp(line_prime / line_prime.norm());
    const Mat2 A = reduced.eval(alpha0);
    const double n = opnorm(A);
    if (n == 0.0) return 0.0;
    const Vec2 Aw = A * w;
    return std::abs(w(0) * Aw(1) - w(1) * Aw(0)) / n;
}

MatrixLaurent multiply_scalar(const MatrixLaurent& x, const std::vector<cplx>& p) {
    const int deg = static_cast<int>(p.size()) - 1;
    MatrixLaurent r(x.g + deg, x.delta * direction(p[0]));
    for (int d = -1; d <= x.g; ++d)
        for (int k = 0; k <= deg; ++k) r.at(d + k) += p[k] * x.coeff(d);
    return r;
}

TerngUhlenbeck terng_uhlenbeck_frame(const MatrixLaurent& reduced, const Vec2& line_prime, cplx alpha0,
                                     const GridSpec& grid, const std::vector<cplx>& lambdas,
                                     const FlowOptions& opt, bool cross_check) {
    require_off_circle(alpha0);
    for (cplx l : lambdas)
        if (std::abs(l - alpha0) < 1e-9 || std::abs(l - 1.0 / std::conj(alpha0)) < 1e-9)
            throw std::invalid_argument("terng_uhlenbeck_frame: lambda at a pole of the simple factor");
    const std::vector<cplx> p = bubble_polynomial(alpha0);
    std::vector<cplx> aug = lambdas;
    aug.push_back(alpha0);
    const FrameGrid fr = integrate(multiply_scalar(reduced, p), grid, aug, opt);
    const int nl = static_cast<int>(lambdas.size());

    TerngUhlenbeck out;
    FrameGrid& F = out.frame;
    F.x = fr.x;
    F.y = fr.y;
    F.lambdas = lambdas;
    const size_t nodes = static_cast<size_t>(fr.nx()) * fr.ny();
    F.zeta.resize(nodes);
    F.omega.resize(nodes);
    F.frame.resize(nodes * nl);
    std::vector<Mat2> h0(nl);
    const SimpleFactor h{alpha0, line_prime, Side::right};
    for (int il = 0; il < nl; ++il) h0[il] = h.eval(lambdas[il]);

    std::vector<double> margin(nodes, 0.0), unit(nodes, 0.0);
    auto at_node = [&](size_t node) {
        const Mat2& Fa = fr.frame[node * (nl + 1) + nl];
        const Vec2 Lz = canonical_line(Fa.adjoint() * line_prime);
        const ScalarQuotient red = divide_scalar(fr.zeta[node], p);
        const SimpleFactor hz{alpha0, Lz, Side::right};
        for (int il = 0; il < nl; ++il) {
            const Mat2 f = h0[il] * fr.frame[node * (nl + 1) + il] * hz.eval(lambdas[il]).inverse();
            F.frame[node * nl + il] = f;
            if (unimodular(lambdas[il]))
                unit[node] = std::max(unit[node], maxabs(f * f.adjoint() - Mat2::Identity()));
        }
        margin[node] = eigenline_margin(Lz, red.x, alpha0);
        F.zeta[node] = dress(Lz, red.x, alpha0);
        F.omega[node] = omega_of(F.zeta[node]);
    };
    const long n = static_cast<long>(nodes);
    std::exception_ptr err;
#pragma omp parallel for schedule(static) if (opt.policy == ExecPolicy::parallel)
    for (long k = 0; k < n; ++k) {
        try {
            at_node(static_cast<size_t>(k));
        } catch (...) {
#pragma omp critical(tu_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    out.unitarity = *std::max_element(unit.begin(), unit.end());
    out.min_margin = *std::min_element(margin.begin(), margin.end());

    if (cross_check) {
        const FrameGrid direct = integrate(dress(line_prime, reduced, alpha0), grid, lambdas, opt);
        double m = 0;
        for (size_t i = 0; i < F.frame.size(); ++i) m = std::max(m, maxabs(F.frame[i] - direct.frame[i]));
        for (size_t i = 0; i < nodes; ++i) m = std::max(m, distance(F.zeta[i], direct.zeta[i]));
        out.cross_check = m;
    }
    return out;
}

namespace {

// loop-su part of f_beta m(l) xi, needs only degrees <= 0 of the expansion at 0
Laurent bubbleton_generator(const MatrixLaurent& xi, cplx alpha0, cplx beta) {
    const int g = xi.g;
    std::vector<std::pair<int, double>> m;  // (shift, weight)
    if (g % 2) {
        m = {{(1 - g) / 2, 1.0}};
    } else {
        m = {{-g / 2, 1.0}, {1 - g / 2, 1.0}};
    }
    const int smin = m.front().first;
    const int nmax = 1 - smin;
    std::vector<cplx> f(nmax + 1);
    const cplx ab = std::conj(alpha0);
    for (int n = 0; n <= nmax; ++n) {
        f[n] = -beta * std::pow(alpha0, -n - 1);
        if (n >= 1) f[n] += std::conj(beta) * std::pow(ab, n - 1);
    }
    Laurent X(smin - 1, 0);
    for (const auto& [s, w] : m)
        for (int n = 0; n <= nmax; ++n)
            for (int d = -1; d + n + s <= 0; ++d) X.at(d + n + s) += w * f[n] * xi.coeff(d);
    return lie_split(X).su;
}

}  // namespace

BubbletonFlow bubbleton_flow(const MatrixLaurent& xi, cplx alpha0, cplx beta, int steps) {
    require_off_circle(alpha0);
    if (steps <= 0) throw std::invalid_argument("bubbleton_flow: steps must be positive");
    BubbletonFlow out;
    out.xi = xi;
    const double h = 1.0 / steps;
    auto field = [&](const MatrixLaurent& x) {
        const Laurent L = x.laurent();
        Laurent f = commutator(L, bubbleton_generator(x, alpha0, beta));
        const double dropped = truncate(f, -1, x.g);
        out.max_residual = std::max(out.max_residual, dropped / std::max(1e-300, x.maxabs()));
        return MatrixLaurent::from(f, x.g, x.delta);
    };
    MatrixLaurent& x = out.xi;
    for (int s = 0; s < steps; ++s) {
        const MatrixLaurent k1 = field(x);
        const MatrixLaurent k2 = field(x + (h / 2) * k1);
        const MatrixLaurent k3 = field(x + (h / 2) * k2);
        const MatrixLaurent k4 = field(x + h * k3);
        x = x + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        double corr = 0;
        x = symmetrize(x, &corr);
        out.max_correction = std::max(out.max_correction, corr);
    }
    return out;
}

}  // namespace annuli
