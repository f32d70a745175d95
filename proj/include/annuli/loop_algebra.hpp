#pragma once

#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace annuli {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr cplx I{0.0, 1.0};

// traceless 2x2 stored as (a, b, c): [[a, b], [c, -a]]
struct TracelessMatrix {
    cplx a{}, b{}, c{};

    TracelessMatrix() = default;
    TracelessMatrix(cplx a_, cplx b_, cplx c_) : a(a_), b(b_), c(c_) {}
    explicit TracelessMatrix(const Mat2& m);

    Mat2 mat() const;
};

Mat2 dagger(const Mat2& m);
double opnorm(const Mat2& m);
double maxabs(const Mat2& m);

// Laurent polynomial with 2x2 coefficients on the window lo..lo+c.size()-1.
struct Laurent {
    int lo = 0;
    std::vector<Mat2> c;

    Laurent() = default;
    Laurent(int lo_, int hi_);

    int hi() const { return lo + static_cast<int>(c.size()) - 1; }
    Mat2 coeff(int d) const;
    Mat2& at(int d);
    Mat2 eval(cplx lam) const;
    double maxabs() const;

    Laurent& operator+=(const Laurent& o);
    Laurent& operator-=(const Laurent& o);
    Laurent& operator*=(cplx s);
};

Laurent operator+(Laurent a, const Laurent& b);
Laurent operator-(Laurent a, const Laurent& b);
Laurent operator*(cplx s, Laurent a);
Laurent operator*(const Laurent& a, const Laurent& b);
Laurent commutator(const Laurent& a, const Laurent& b);
// coefficients outside [lo, hi] are dropped; returns the largest dropped entry
double truncate(Laurent& x, int lo, int hi);

// An element of P_g(delta): coefficients for d = -1..g.
struct MatrixLaurent {
    int g = 0;
    cplx delta{1.0, 0.0};
    std::vector<Mat2> c;

    MatrixLaurent() = default;
    MatrixLaurent(int g_, cplx delta_ = 1.0);

    Mat2 coeff(int d) const { return c[d + 1]; }
    Mat2& at(int d) { return c[d + 1]; }
    Mat2 eval(cplx lam) const;
    Laurent laurent() const;
    static MatrixLaurent from(const Laurent& x, int g, cplx delta);
    double maxabs() const;
};

MatrixLaurent operator+(const MatrixLaurent& a, const MatrixLaurent& b);
MatrixLaurent operator-(const MatrixLaurent& a, const MatrixLaurent& b);
MatrixLaurent operator*(cplx s, const MatrixLaurent& a);
double distance(const MatrixLaurent& a, const MatrixLaurent& b);

// lambda^{g-1} * conj(x(1/conj(lambda)))^T on the same window
MatrixLaurent star(const MatrixLaurent& x);
// (x - star(x))/2 and removes traces
MatrixLaurent symmetrize(const MatrixLaurent& x, double* correction = nullptr);

// entries uniform in [-1, 1] + i[-1, 1], residue i r E12 with r in [0.1, 1], delta = 1
MatrixLaurent random_potential(int g, std::mt19937_64& rng);

// flat potential (i/4)[[0, l^-1],[1, 0]]
MatrixLaurent flat_potential();
// g(delta) xi g(delta)^-1 with g(delta) = diag(sqrt(delta), 1/sqrt(delta))
MatrixLaurent gauge(const MatrixLaurent& x, cplx delta);

enum class ClassTag { Mg, Mg0, Mg1 };

struct SpectralPolynomial {
    int g = 0;
    std::vector<cplx> coef;  // a_0 .. a_{2g}
    std::vector<ClassTag> tags;

    cplx eval(cplx lam) const;
    bool has(ClassTag t) const;
};

struct RootPair {
    cplx alpha;    // |alpha| <= 1
    cplx partner;  // 1/conj(alpha)
    int multiplicity = 1;
    bool on_circle = false;
};

struct PairingResult {
    std::vector<RootPair> pairs;
    double residual = 0.0;
    bool ok = true;
};

struct PotentialCheck {
    double reality = 0.0;
    double residue = 0.0;   // off-ray size of coeff(-1)
    double nondegeneracy = 0.0;  // |tr(coeff(-1) coeff(0))|
    bool ok = false;
    std::string violated;
};

struct Tolerances {
    double alg = 1e-8;
    double pde = 1e-6;
};

PotentialCheck check_potential(const MatrixLaurent& x, double tol = 1e-8);

// a(l) = -l det x(l); throws std::invalid_argument on residue-ray violation
SpectralPolynomial det_poly(const MatrixLaurent& x, double tol = 1e-8);
SpectralPolynomial make_spectral(int g, std::vector<cplx> coef);
void classify(SpectralPolynomial& a);
double reality_defect(const SpectralPolynomial& a);
// max over 720 unit-circle samples of Re(l^-g a) (should be <= 0)
double sign_max(const SpectralPolynomial& a, double* imag_max = nullptr);

std::vector<cplx> poly_roots(const std::vector<cplx>& coef);
PairingResult paired_roots(const SpectralPolynomial& a, double tol = 1e-8);

// sup over the unit circle of sqrt(-l^-g a(l))
double coefficient_bound(const SpectralPolynomial& a, int samples = 720);

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b);
cplx poly_eval(const std::vector<cplx>& a, cplx x);

}  // namespace annuli
