#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "annuli/loop_algebra.hpp"
#include "annuli/riemann_family.hpp"

using namespace annuli;

namespace {

MatrixLaurent random_coeffs(int g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    MatrixLaurent x(g);
    for (auto& m : x.c)
        for (int k = 0; k < 4; ++k) m(k / 2, k % 2) = cplx(u(rng), u(rng));
    return x;
}

bool has_root(const std::vector<cplx>& roots, cplx r, double tol) {
    return std::any_of(roots.begin(), roots.end(), [&](cplx z) { return std::abs(z - r) < tol; });
}

}  // namespace

TEST_CASE("star is an involution and matches its defining formula") {
    std::mt19937_64 rng(7);
    for (int g = 0; g <= 3; ++g) {
        const MatrixLaurent x = random_coeffs(g, rng);
        CHECK(distance(star(star(x)), x) == 0.0);
        // lambda^{g-1} x(1/conj l)^dagger, evaluated pointwise
        for (cplx l : {cplx(0.7, 0.2), cplx(-1.3, 0.4), cplx(0, 1)}) {
            const Mat2 direct = std::pow(l, g - 1) * dagger(x.eval(1.0 / std::conj(l)));
            CHECK(maxabs(star(x).eval(l) - direct) < 1e-12);
        }
    }
}

TEST_CASE("flat potential") {
    const MatrixLaurent xi = flat_potential();
    CHECK(xi.g == 0);
    CHECK(distance(star(xi), -1.0 * xi) == 0.0);
    CHECK(check_potential(xi).ok);
    const auto a = det_poly(xi);
    REQUIRE(a.coef.size() == 1);
    CHECK(std::abs(a.coef[0] + 1.0 / 16) < 1e-15);
    CHECK(paired_roots(a).pairs.empty());
}

TEST_CASE("symmetrize lands in the potential class") {
    std::mt19937_64 rng(11);
    for (int g = 0; g <= 3; ++g) {
        MatrixLaurent x = random_coeffs(g, rng);
        double corr = 0;
        const MatrixLaurent s = symmetrize(x, &corr);
        CHECK(corr > 0);
        CHECK(distance(star(s), -1.0 * s) < 1e-15);
        CHECK(distance(symmetrize(s), s) < 1e-15);
        for (const auto& m : s.c) CHECK(std::abs(m.trace()) < 1e-15);
    }
}

TEST_CASE("violated invariants are named") {
    MatrixLaurent xi = flat_potential();
    xi.at(-1)(0, 1) = cplx(0.25, 0.1);  // off the residue ray and not real
    const auto chk = check_potential(xi);
    CHECK_FALSE(chk.ok);
    CHECK(chk.violated == "star_reality");

    MatrixLaurent off = flat_potential();
    off.at(-1)(0, 1) *= -1.0;  // -i/4: wrong half of the ray
    off.at(0)(1, 0) *= -1.0;
    CHECK(distance(star(off), -1.0 * off) < 1e-15);
    CHECK(check_potential(off).violated == "residue_ray");
    CHECK_THROWS_AS(det_poly(off), std::invalid_argument);

    MatrixLaurent bad_delta = flat_potential();
    bad_delta.delta = 2.0;
    CHECK(check_potential(bad_delta).violated == "delta_unimodular");

    // genus 1 with gamma_0 = 0: real and on the ray, but tr(x_-1 x_0) = 0
    MatrixLaurent degenerate(1);
    degenerate.at(-1) << 0, I / 4.0, 0, 0;
    degenerate.at(1) << 0, 0, I / 4.0, 0;
    degenerate.at(0) << 0.3 * I, 0, 0, -0.3 * I;
    CHECK(distance(star(degenerate), -1.0 * degenerate) < 1e-15);
    CHECK(check_potential(degenerate).violated == "nondegeneracy");
}

TEST_CASE("det_poly agrees with pointwise -l det xi(l)") {
    std::mt19937_64 rng(3);
    for (int g = 0; g <= 3; ++g)
        for (int trial = 0; trial < 5; ++trial) {
            const MatrixLaurent xi = random_potential(g, rng);
            REQUIRE(check_potential(xi).ok);
            const auto a = det_poly(xi);
            CHECK(a.coef.size() == static_cast<size_t>(2 * g + 1));
            CHECK(reality_defect(a) < 1e-12);
            for (cplx l : {cplx(0.3, 0.1), cplx(-2, 1), cplx(0, -0.8)})
                CHECK(std::abs(a.eval(l) + l * xi.eval(l).determinant()) < 1e-12 * (1 + std::abs(a.eval(l))));
        }
}

TEST_CASE("genus-1 roots for d = -1") {
    const auto a = genus1_polynomial(-1.0, 1.0);
    CHECK(std::abs(a.coef[0] + 1.0 / 16) < 1e-15);
    CHECK(std::abs(a.coef[1] + 6.0 / 16) < 1e-15);
    CHECK(std::abs(a.coef[2] + 1.0 / 16) < 1e-15);
    const auto roots = poly_roots(a.coef);
    REQUIRE(roots.size() == 2);
    const double s = 2 * std::sqrt(2.0);
    CHECK(has_root(roots, -3 + s, 1e-12));
    CHECK(has_root(roots, -3 - s, 1e-12));
    const auto pr = paired_roots(a);
    REQUIRE(pr.pairs.size() == 1);
    CHECK(std::abs(pr.pairs[0].alpha - (-3 + s)) < 1e-12);
    CHECK(std::abs(pr.pairs[0].alpha * pr.pairs[0].partner - 1.0) < 1e-12);
    CHECK_FALSE(pr.pairs[0].on_circle);
}

TEST_CASE("genus-2 roots for c = d = -2") {
    auto a = make_spectral(2, {1.0 / 16, 0, -34.0 / 16, 0, 1.0 / 16});
    const auto pr = paired_roots(a);
    REQUIRE(pr.ok);
    REQUIRE(pr.pairs.size() == 2);
    const double s = 2 * std::sqrt(2.0);
    std::vector<cplx> inner;
    for (const auto& p : pr.pairs) {
        CHECK(std::abs(p.alpha) <= 1.0);
        CHECK(std::abs(p.alpha * std::conj(p.partner) - 1.0) < 1e-12);
        inner.push_back(p.alpha);
    }
    CHECK(has_root(inner, -3 + s, 1e-12));
    CHECK(has_root(inner, 3 - s, 1e-12));
}

TEST_CASE("class tags are nested") {
    auto flat = det_poly(flat_potential());
    classify(flat);
    CHECK(flat.has(ClassTag::Mg));
    CHECK(flat.has(ClassTag::Mg0));
    CHECK(flat.has(ClassTag::Mg1));

    // d = 0: double root at -1 on the circle, in Mg but not Mg0
    auto boundary = genus1_polynomial(0.0, 1.0);
    classify(boundary);
    CHECK(boundary.has(ClassTag::Mg));
    CHECK_FALSE(boundary.has(ClassTag::Mg0));
    CHECK_FALSE(boundary.has(ClassTag::Mg1));

    // wrong sign: not in Mg at all
    auto positive = make_spectral(0, {1.0 / 16});
    classify(positive);
    CHECK(positive.tags.empty());

    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        auto a = det_poly(random_potential(1 + k % 3, rng));
        classify(a);
        if (a.has(ClassTag::Mg1)) CHECK(a.has(ClassTag::Mg0));
        if (a.has(ClassTag::Mg0)) CHECK(a.has(ClassTag::Mg));
    }
}

TEST_CASE("coefficient bound holds on random potentials") {
    std::mt19937_64 rng(2024);
    for (int g = 0; g <= 3; ++g)
        for (int trial = 0; trial < 100; ++trial) {
            const MatrixLaurent xi = random_potential(g, rng);
            const auto a = det_poly(xi);
            const double bound = coefficient_bound(a);
            for (const auto& m : xi.c) CHECK(opnorm(m) <= bound + 1e-8);
        }
}

TEST_CASE("coefficient bound of the flat potential is attained") {
    // sup sqrt(1/16) = 1/4, and both coefficients have operator norm 1/4
    const auto a = det_poly(flat_potential());
    CHECK(std::abs(coefficient_bound(a) - 0.25) < 1e-14);
    CHECK(std::abs(opnorm(flat_potential().coeff(-1)) - 0.25) < 1e-15);
}

TEST_CASE("gauge scales off-diagonals and delta") {
    const MatrixLaurent xi = flat_potential();
    const cplx d = std::polar(1.0, 0.7);
    const MatrixLaurent y = gauge(xi, d);
    CHECK(std::abs(y.delta - d) < 1e-15);
    CHECK(std::abs(y.coeff(-1)(0, 1) - d * xi.coeff(-1)(0, 1)) < 1e-15);
    CHECK(std::abs(y.coeff(0)(1, 0) - std::conj(d) * xi.coeff(0)(1, 0)) < 1e-15);
    CHECK(check_potential(y).ok);
    CHECK(std::abs(det_poly(y).coef[0] - det_poly(xi).coef[0]) < 1e-15);
}

TEST_CASE("Laurent arithmetic") {
    Laurent a(-1, 1), b(0, 2);
    a.at(-1) << 1, 2, 3, 4;
    a.at(1) << 0, 1, 0, 0;
    b.at(0) << 1, 0, 0, -1;
    b.at(2) << 0, 0, 1, 0;
    const cplx l(0.4, -1.1);
    CHECK(maxabs((a * b).eval(l) - a.eval(l) * b.eval(l)) < 1e-12);
    CHECK(maxabs(commutator(a, b).eval(l) - (a.eval(l) * b.eval(l) - b.eval(l) * a.eval(l))) < 1e-12);
    Laurent c = a * b;
    const double dropped = truncate(c, 0, 1);
    CHECK(dropped > 0);
    CHECK(c.lo == 0);
    CHECK(c.hi() == 1);
}
