#include <doctest.h>

#include <cmath>

#include "annuli/flow.hpp"
#include "annuli/riemann_family.hpp"

using namespace annuli;

namespace {

// flat connection is constant with commuting dz and dzbar parts, so F = exp(z A + zbar B);
// for traceless M, exp M = cosh(s) + sinh(s)/s M with s^2 = -det M
Mat2 flat_oracle(cplx z, cplx l) {
    Mat2 A, B;
    A << 0, I / (4.0 * l), I / 4.0, 0;
    B << 0, I / 4.0, I * l / 4.0, 0;
    const Mat2 M = z * A + std::conj(z) * B;
    const cplx s = std::sqrt(-M.determinant());
    const cplx sh = std::abs(s) < 1e-300 ? cplx(1.0) : std::sinh(s) / s;
    return std::cosh(s) * Mat2::Identity() + sh * M;
}

}  // namespace

TEST_CASE("connection of the flat potential") {
    const Alpha a = alpha_of(flat_potential());
    const cplx l(0.3, 0.8);
    Mat2 A, B;
    A << 0, I / (4.0 * l), I / 4.0, 0;
    B << 0, I / 4.0, I * l / 4.0, 0;
    CHECK(maxabs(a.dz.eval(l) - A) < 1e-16);
    CHECK(maxabs(a.dzb.eval(l) - B) < 1e-16);
    CHECK(omega_of(flat_potential()) == doctest::Approx(0.0));
}

TEST_CASE("dz diagonal vanishes where omega_y = 0 on the genus-1 field") {
    const MatrixLaurent zeta = genus1_killing_field(0.4, 0.0, 1.0);
    const Alpha a = alpha_of(zeta);
    CHECK(std::abs(a.dz.coeff(0)(0, 0)) < 1e-16);
    CHECK(omega_of(zeta) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("alpha_of rejects beta_-1 = 0") {
    MatrixLaurent x = flat_potential();
    x.at(-1).setZero();
    CHECK_THROWS_AS(alpha_of(x), std::domain_error);
}

TEST_CASE("axis layout") {
    const Axis ax = make_axis(-0.3, 1.0, 0.1);
    CHECK(ax.t[ax.origin] == 0.0);
    CHECK(ax.t.front() == doctest::Approx(-0.3));
    CHECK(ax.t.back() == doctest::Approx(1.0));
    CHECK(ax.t.size() == 14);
    CHECK(make_axis(0, 0, 0.1).t.size() == 1);
    CHECK_THROWS_AS(make_axis(0.1, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_axis(0, 1, 0), std::invalid_argument);
}

TEST_CASE("flat frame against the exponential oracle") {
    const std::vector<cplx> lams{1.0, I, std::polar(1.0, M_PI / 4)};
    const FrameGrid fg = integrate(flat_potential(), {0, 2 * M_PI, 1e-2, 0, 1, 1e-2}, lams);
    double err = 0, lib = 0;
    for (int iy = 0; iy < fg.ny(); ++iy)
        for (int ix = 0; ix < fg.nx(); ++ix)
            for (int il = 0; il < fg.nl(); ++il) {
                const Mat2 o = flat_oracle(fg.z_at(ix, iy), lams[il]);
                err = std::max(err, maxabs(fg.frame_at(ix, iy, il) - o));
                lib = std::max(lib, maxabs(flat_frame(fg.z_at(ix, iy), lams[il]) - o));
            }
    CHECK(err <= 1e-8);
    CHECK(lib <= 1e-12);
    CHECK(distance(fg.zeta_at(0, 0), flat_potential()) == 0.0);
    CHECK(maxabs(fg.frame_at(0, 0, 0) - Mat2::Identity()) == 0.0);
    // F_1(2 pi) = -1
    const auto end = fg.locate(2 * M_PI);
    REQUIRE(end);
    CHECK(maxabs(fg.frame_at(end->first, end->second, 0) + Mat2::Identity()) < 1e-8);
}

TEST_CASE("serial and parallel integration agree bitwise") {
    const MatrixLaurent xi = preset(1, {{}, 0.4}).potential;
    const GridSpec gs{-0.5, 0.5, 0.05, -0.2, 0.6, 0.05};
    const std::vector<cplx> lams{1.0, I, cplx(0.5, 0.1)};
    const FrameGrid a = integrate(xi, gs, lams, {ExecPolicy::serial, 2});
    const FrameGrid b = integrate(xi, gs, lams, {ExecPolicy::parallel, 2});
    CHECK(a.frame == b.frame);
    CHECK(a.omega == b.omega);
    bool same = true;
    for (size_t k = 0; k < a.zeta.size(); ++k) same = same && a.zeta[k].c == b.zeta[k].c;
    CHECK(same);
}

TEST_CASE("flatness and RK4 order") {
    CHECK(flatness_defect(flat_potential(), cplx(1.0, 0.7), {1.0, I}, 1e-2) <= 1e-10);
    const MatrixLaurent xi = preset(1, {0.3, {}}).potential;
    CHECK(flatness_defect(xi, 0.0, {1.0}, 1e-2) == 0.0);
    // path difference is an O(h^4) error, halving h divides it by about 16
    const double d1 = flatness_defect(xi, cplx(0.8, 0.6), {1.0, I}, 0.1);
    const double d2 = flatness_defect(xi, cplx(0.8, 0.6), {1.0, I}, 0.05);
    CHECK(d1 / d2 == doctest::Approx(16).epsilon(0.2));
    CHECK(richardson_error(xi, cplx(0.8, 0.6), {1.0}, 0.05) < 1e-6);
}

TEST_CASE("period defect") {
    const FrameGrid fg = integrate(flat_potential(), {0, 2 * M_PI, M_PI / 200, 0, 0, 1}, {1.0});
    const PeriodDefect full = period_defect(fg, 2 * M_PI, 1.0);
    CHECK(full.frame <= 1e-8);
    CHECK(full.zeta == 0.0);
    const PeriodDefect zero = period_defect(fg, 0.0, 1.0);
    CHECK(zero.frame == 0.0);
    CHECK(zero.commuting == 0.0);
    CHECK(period_defect(fg, M_PI, 1.0).frame > 0.5);
    CHECK_THROWS_AS(period_defect(fg, 0.123, 1.0), std::out_of_range);
    CHECK_THROWS_AS(period_defect(fg, 2 * M_PI, I), std::out_of_range);
}

TEST_CASE("conservation along the z-flow") {
    const std::vector<cplx> samples{1.0, -1.0, I, cplx(0.3, 0.2), cplx(2, -1)};
    for (const auto& p : {preset(1, {{}, 3 - 2 * std::sqrt(2.0)}), preset(1, {0.3, {}}),
                          preset(2, {3 - 2 * std::sqrt(2.0), 3 - 2 * std::sqrt(2.0)})}) {
        const FrameGrid fg = integrate(p.potential, {0, 1, 1e-2, 0, 0.5, 1e-2}, {1.0, I});
        const FlowDiagnostics d = diagnose(fg, samples);
        CHECK(d.a_drift <= 1e-8);
        CHECK(d.reality <= 1e-8);
        CHECK(d.residue <= 1e-8);
        CHECK(d.det_defect <= 1e-8);
        CHECK(d.unitarity <= 1e-8);
    }
}

TEST_CASE("recovered omega solves sinh-Gordon to second order") {
    const MatrixLaurent xi = preset(1, {{}, 0.4}).potential;
    auto max_res = [&](double h) {
        const FrameGrid fg = integrate(xi, {0, 1, h, 0, 1, h}, {1.0});
        const auto r = sinh_gordon_residual(fg);
        double m = 0;
        for (double v : r) m = std::max(m, std::abs(v));
        return m;
    };
    const double r1 = max_res(0.02), r2 = max_res(0.01);
    CHECK(std::log2(r1 / r2) >= 1.9);
    const FrameGrid a = integrate(xi, {0, 0.6, 0.04, 0, 0.6, 0.04}, {1.0});
    const FrameGrid b = integrate(xi, {0, 0.6, 0.02, 0, 0.6, 0.02}, {1.0});
    CHECK(std::log2(omega_z_consistency(a) / omega_z_consistency(b)) >= 1.9);
}

TEST_CASE("integrate_to matches the grid") {
    const MatrixLaurent xi = preset(1, {0.3, {}}).potential;
    const FrameGrid fg = integrate(xi, {0, 0.5, 0.01, 0, 0.3, 0.01}, {I});
    const auto loc = fg.locate(cplx(0.5, 0.3));
    REQUIRE(loc);
    const PathResult p = integrate_to(xi, cplx(0.5, 0.3), {I}, 0.01);
    CHECK(maxabs(p.frames[0] - fg.frame_at(loc->first, loc->second, 0)) < 1e-12);
    CHECK(distance(p.zeta, fg.zeta_at(loc->first, loc->second)) < 1e-12);
}
