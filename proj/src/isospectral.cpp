#include "annuli/isospectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace annuli {

SplitLoop lie_split(const Laurent& x) {
    SplitLoop s;
    if (x.c.empty()) return s;
    const int lo = std::min(x.lo, 0), hi = std::max(x.hi(), -x.lo);
    s.su = Laurent(std::min(lo, -hi), std::max(hi, -lo));
    s.plus = Laurent(0, std::max(hi, 0));
    for (int k = x.lo; k < 0; ++k) {
        const Mat2 A = x.coeff(k);
        s.su.at(k) += A;
        s.su.at(-k) -= A.adjoint();
        s.plus.at(-k) += A.adjoint();
    }
    const Mat2 m = x.coeff(0);
    Mat2 sk;
    sk << I * m(0, 0).imag(), -std::conj(m(1, 0)), m(1, 0), I * m(1, 1).imag();
    s.su.at(0) += sk;
    s.plus.at(0) += m - sk;
    for (int k = 1; k <= x.hi(); ++k) s.plus.at(k) += x.coeff(k);
    return s;
}

MatrixLaurent flow_field(const MatrixLaurent& xi, const FlowParameter& t, double* residual, double tol) {
    const int g = xi.g;
    if (static_cast<int>(t.size()) != g) throw std::invalid_argument("flow_field: t must have g entries");
    const Laurent L = xi.laurent();
    Laurent X(-g, g);
    double tn = 0;
    for (int i = 0; i < g; ++i) {
        tn = std::max(tn, std::abs(t[i]));
        for (int d = -1; d <= g; ++d) X.at(d - i) += t[i] * L.coeff(d);
    }
    Laurent f = commutator(lie_split(X).plus, L);
    const double dropped = truncate(f, -1, g);
    const double scale = std::max(1e-300, tn * xi.maxabs() * xi.maxabs());
    if (residual) *residual = dropped / scale;
    if (dropped > tol * scale) throw std::runtime_error("flow_field: bracket leaves the degree window");
    MatrixLaurent r = MatrixLaurent::from(f, g, xi.delta);
    return r;
}

FlowResult flow(const MatrixLaurent& xi, const FlowParameter& t, int steps) {
    FlowResult out;
    out.xi = xi;
    if (steps <= 0) throw std::invalid_argument("flow: steps must be positive");
    const double h = 1.0 / steps;
    double res = 0;
    auto F = [&](const MatrixLaurent& x) {
        MatrixLaurent v = flow_field(x, t, &res);
        out.max_residual = std::max(out.max_residual, res);
        return v;
    };
    MatrixLaurent& x = out.xi;
    for (int s = 0; s < steps; ++s) {
        const MatrixLaurent k1 = F(x);
        const MatrixLaurent k2 = F(x + (h / 2) * k1);
        const MatrixLaurent k3 = F(x + (h / 2) * k2);
        const MatrixLaurent k4 = F(x + h * k3);
        x = x + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        double corr = 0;
        x = symmetrize(x, &corr);
        out.max_correction = std::max(out.max_correction, corr);
    }
    return out;
}

double stabilizer_defect(const MatrixLaurent& xi, const FlowParameter& t, int steps) {
    return distance(flow(xi, t, steps).xi, xi);
}

namespace {

Eigen::VectorXd flatten(const MatrixLaurent& x) {
    Eigen::VectorXd v(8 * x.c.size());
    int k = 0;
    for (const auto& m : x.c)
        for (int i = 0; i < 4; ++i) {
            v(k++) = m(i).real();
            v(k++) = m(i).imag();
        }
    return v;
}

}  // namespace

FieldRank field_rank(const MatrixLaurent& xi, double rel_tol) {
    FieldRank r;
    const int g = xi.g;
    if (g == 0) return r;
    Eigen::MatrixXd J(8 * (g + 2), 2 * g);
    for (int j = 0; j < 2 * g; ++j) {
        FlowParameter t(g, 0.0);
        t[j / 2] = (j % 2 == 0) ? cplx(1.0) : I;
        J.col(j) = flatten(flow_field(xi, t));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i) {
        r.singular_values.push_back(sv(i));
        if (sv(i) > rel_tol * sv(0)) ++r.rank;
    }
    // real basis of the slice t_{g-1-i} = conj(t_i)
    for (int i = 0; i < g; ++i)
        for (cplx u : {cplx(1.0), I}) {
            FlowParameter t(g, 0.0);
            t[i] += u;
            t[g - 1 - i] += std::conj(u);
            if (g - 1 - i == i && u == I) continue;  // t_i must be real
            r.slice_field = std::max(r.slice_field, flow_field(xi, t).maxabs());
        }
    return r;
}

}  // namespace annuli
