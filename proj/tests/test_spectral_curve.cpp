#include <doctest.h>

#include <cmath>

#include "annuli/riemann_family.hpp"
#include "annuli/spectral_curve.hpp"

using namespace annuli;

namespace {

const double s8 = 3 - 2 * std::sqrt(2.0);

SpectralPolynomial item2(double al) {
    auto c = poly_mul({-al, 1.0}, {-1.0, al});
    for (auto& v : c) v /= 16 * al;
    return make_spectral(1, c);
}

SpectralPolynomial item3(double be) {
    auto c = poly_mul({be, 1.0}, {1.0, be});
    for (auto& v : c) v *= -1 / (16 * be);
    return make_spectral(1, c);
}

// lambda^{g+1} b(1/lambda) = s b(lambda)
double parity_defect(const std::vector<cplx>& b, double s) {
    double m = 0;
    const size_t n = b.size();
    for (size_t k = 0; k < n; ++k) m = std::max(m, std::abs(b[n - 1 - k] - s * b[k]));
    return m;
}

}  // namespace

TEST_CASE("branch points") {
    const auto c0 = build_curve(make_spectral(0, {-1.0 / 16}));
    CHECK(c0.genus == 0);
    CHECK(c0.branch_point_count() == 2);
    const auto c1 = build_curve(genus1_polynomial(-1, 1.0));
    CHECK(c1.genus == 1);
    CHECK(c1.branch_point_count() == 4);
    const auto c2 = build_curve(make_spectral(2, {1.0 / 16, 0, -34.0 / 16, 0, 1.0 / 16}));
    CHECK(c2.genus == 2);
    CHECK(c2.branch_point_count() == 6);
    CHECK(std::abs(c1.nu_squared(0.5) - c1.a.eval(0.5) / 0.5) == 0.0);
    // double root on the circle
    CHECK_THROWS_AS(build_curve(genus1_polynomial(0, 1.0)), std::invalid_argument);
}

TEST_CASE("genus-0 closing data") {
    const ClosingData cd = solve_closing(make_spectral(0, {-1.0 / 16}));
    REQUIRE(cd.b.size() == 2);
    CHECK(std::abs(cd.b[0] - M_PI / 16) <= 1e-10);
    CHECK(std::abs(cd.b[1] + M_PI / 16) <= 1e-10);
    CHECK(std::abs(cd.tau - 2 * M_PI) <= 1e-10);
    CHECK(verify_spectral_data(cd).ok);
    // ln mu = (i pi / 2)(l^{-1/2} + l^{1/2})
    for (double th : {0.0, 0.5, 2.0, -1.0, -2.9, 3.0}) {
        const cplx l = std::polar(1.0, th);
        const cplx expect = I * M_PI / 2.0 * (1.0 / std::sqrt(l) + std::sqrt(l));
        CHECK(std::abs(integrate_h(cd, l).h - expect) <= 1e-8);
    }
    for (double r : {0.2, 0.7, 1.9}) {
        const cplx expect = I * M_PI / 2.0 * (1.0 / std::sqrt(r) + std::sqrt(r));
        CHECK(std::abs(integrate_h(cd, r).h - expect) <= 1e-8);
    }
}

TEST_CASE("genus-1 negative roots: b = (b0/gamma)(1 - l)(1 + l), b0 real") {
    const ClosingData cd = solve_closing(item3(0.4));
    REQUIRE(cd.b.size() == 3);
    CHECK(std::abs(cd.b[1]) <= 1e-10);
    CHECK(std::abs(cd.b[2] + cd.b[0]) <= 1e-10);
    CHECK(std::abs(cd.b[0].imag()) <= 1e-10);
    CHECK(parity_defect(cd.b, -1.0) <= 1e-8);
    CHECK(verify_spectral_data(cd).ok);
    // h(-beta) = 0
    CHECK(std::abs(integrate_h(cd, -0.4).h) <= 1e-8);
}

TEST_CASE("genus-1 positive roots: b vanishes at gamma in (alpha, 1) and 1/gamma, b0 imaginary") {
    for (double al : {0.3, 0.6, s8}) {
        const ClosingData cd = solve_closing(item2(al));
        REQUIRE(cd.b.size() == 3);
        CHECK(std::abs(cd.b[0].real()) <= 1e-10);
        CHECK(parity_defect(cd.b, 1.0) <= 1e-8);
        const auto r = poly_roots(cd.b);
        REQUIRE(r.size() == 2);
        const double g = std::min(std::abs(r[0]), std::abs(r[1]));
        CHECK(g > al);
        CHECK(g < 1);
        CHECK(std::abs(r[0] * r[1] - 1.0) <= 1e-10);
        CHECK(std::abs(r[0].imag()) + std::abs(r[1].imag()) <= 1e-10);
        CHECK(verify_spectral_data(cd).ok);
    }
}

TEST_CASE("genus-2 closing and root parity") {
    const ClosingData cd = solve_closing(preset(2, {0.3, 0.4}).a);
    CHECK(cd.b.size() == 4);
    CHECK(std::abs(cd.b[0].real()) <= 1e-10);
    CHECK(parity_defect(cd.b, 1.0) <= 1e-8);
    CHECK(cd.condition >= 1.0);
    CHECK(cd.segment_integrals.size() == 2);
    for (auto s : cd.segment_integrals) CHECK(std::abs(s) <= 1e-8);
    CHECK(cd.max_quantization_defect() <= 1e-6);
    const auto rep = verify_spectral_data(cd);
    CHECK(rep.ok);
    CHECK(rep.b0_relation <= 1e-8);
    const ClosingData cd2 = solve_closing(make_spectral(2, {1.0 / 16, 0, -34.0 / 16, 0, 1.0 / 16}));
    CHECK(verify_spectral_data(cd2).ok);
}

TEST_CASE("h is imaginary on the circle and independent of the path") {
    for (const auto& a : {item2(0.3), item3(0.4), preset(2, {0.3, 0.4}).a}) {
        const ClosingData cd = solve_closing(a);
        for (double th : {0.4, 1.3, 2.5, -0.8, -2.2}) {
            const cplx l = std::polar(1.0, th);
            const cplx h = integrate_h(cd, l).h;
            CHECK(std::abs(h.real()) <= 1e-8);
            for (HPath p : {HPath{0.1, 0.0}, HPath{0.05, 0.3}, HPath{0.2, 1.6}})
                CHECK(std::abs(integrate_h(cd, l, p).h - h) <= 1e-8);
        }
    }
}

TEST_CASE("quantization fails for a rescaled b") {
    ClosingData cd = solve_closing(make_spectral(0, {-1.0 / 16}));
    for (auto& v : cd.b) v *= 1.1;
    cd.tau *= 1.1;
    cd.quantization.clear();
    const auto rep = verify_spectral_data(cd);
    CHECK_FALSE(rep.ok);
    CHECK(rep.quantization > 0.1);
}

TEST_CASE("tau hint selects a multiple") {
    const ClosingData cd = solve_closing(make_spectral(0, {-1.0 / 16}), cplx(13.0));
    CHECK(std::abs(cd.tau - 4 * M_PI) <= 1e-10);
}

TEST_CASE("eigenvectors of the potential") {
    const Vec2 psi = eigenvector_at(flat_potential(), 1.0, +1);
    CHECK(std::abs(psi(0) - 1.0) < 1e-15);
    CHECK(std::abs(psi(1) - 1.0) < 1e-15);
    const auto p = preset(1, {{}, s8});
    for (cplx l : {cplx(-1.0), cplx(0.3, 0.9), cplx(2.0, -0.5)})
        for (int br : {+1, -1}) {
            const Vec2 v = eigenvector_at(p.potential, l, br);
            const Vec2 w = p.potential.eval(l) * v;
            const cplx nu = v.dot(w) / v.squaredNorm();
            CHECK((w - nu * v).norm() <= 1e-10);
            CHECK(std::abs(nu * nu - p.a.eval(l) / l) <= 1e-10);
        }
}
