#pragma once

#include <vector>

#include "annuli/flow.hpp"
#include "annuli/loop_algebra.hpp"

namespace annuli {

// CP^1 points are unit 2-vectors; the canonical representative has its first
// nonzero component real positive.
Vec2 canonical_line(const Vec2& v);
// Fubini-Study angle arccos |<a, b>| / (|a| |b|)
double fubini_study(const Vec2& a, const Vec2& b);
// [v1, v2] in SU(2) with v1 the unit representative and v2 = (-conj v1[1], conj v1[0])
Mat2 line_frame(const Vec2& line);

// diag(s, 1/s), s = principal sqrt((l - a0)/(1 - conj(a0) l))
Mat2 pi_alpha(cplx alpha0, cplx lambda);
// Q_L pi_alpha Q_L^-1
Mat2 pi_line(const Vec2& line, cplx alpha0, cplx lambda);

struct TriangularSplit {
    Mat2 Q;  // SU(2)
    Mat2 R;  // [[rho, r], [0, 1/rho]], rho > 0
};
// M = Q R (Gram-Schmidt on columns); M must have determinant 1
TriangularSplit qr_split(const Mat2& m);
// M = R Q (on rows)
TriangularSplit rq_split(const Mat2& m);

enum class Side { left, right };

struct SimpleFactor {
    cplx alpha0;
    Vec2 line;
    Side side = Side::left;

    // g_L = pi_L^-1 Q_{0,L} (left) or h_L = Q_{1,L} pi_L^-1 (right); throws
    // std::invalid_argument for |alpha0| in {0, 1}
    Mat2 eval(cplx lambda) const;
    // Q_{0,L} (left) or Q_{1,L} (right)
    Mat2 unitary() const;
};

// (l - a0)(1 - conj(a0) l), coefficients from l^0
std::vector<cplx> bubble_polynomial(cplx alpha0);

struct RootRemoval {
    MatrixLaurent reduced;
    cplx gauge_delta{1.0, 0.0};  // xi~ = p^-1 g(d)^-1 xi g(d)
    std::vector<cplx> p;
    double remainder = 0.0;      // relative size of the division remainder
};

// Divides out a matrix zero at alpha0. Unimodular alpha0 uses p = conj(c) l + c, c = sqrt(-alpha0),
// and d = conj(c); otherwise p = (l - a0)(1 - conj(a0) l) and d = -conj(a0)/|a0|. Throws
// std::invalid_argument if |xi(alpha0)| > tol |xi| or g is too small.
RootRemoval remove_root(const MatrixLaurent& xi, cplx alpha0, double tol = 1e-8);

struct NilpotencyCheck {
    double det = 0.0;     // |det A| / |A|^2
    double square = 0.0;  // |A^2| / |A|
    double norm = 0.0;
    bool ok = false;
};
NilpotencyCheck nilpotency(const Mat2& a);

struct FactorizationResult {
    Vec2 line;        // L = ker xi(alpha0)
    Vec2 line_prime;  // L' = Q_{0,L}^-1 L
    MatrixLaurent reduced;  // in P_{g-2}(delta * (-conj(a0)/|a0|))
    std::vector<cplx> p;
    double remainder = 0.0;
};

// xi = p h_{L'} reduced h_{L'}^-1. Throws std::invalid_argument if |alpha0| in {0, 1}, xi(alpha0)
// is zero or not nilpotent, or the division leaves a remainder above tol.
FactorizationResult factorize(const MatrixLaurent& xi, cplx alpha0, double tol = 1e-8);

// inverse of factorize. Throws std::logic_error if the result fails check_potential.
MatrixLaurent dress(const Vec2& line_prime, const MatrixLaurent& reduced, cplx alpha0);

// dress(line_prime, gauge(base, -conj(a0)/|a0|), a0) for base in P_g(1)
MatrixLaurent synthetic_bubbleton(const MatrixLaurent& base, cplx alpha0, const Vec2& line_prime);

// true when the orthogonal line of L' is an eigenline of reduced(alpha0); the dressed
// potential then vanishes at alpha0
double eigenline_margin(const Vec2& line_prime, const MatrixLaurent& reduced, cplx alpha0);

// p(l) * x, delta multiplied by the direction of p(0)
MatrixLaurent multiply_scalar(const MatrixLaurent& x, const std::vector<cplx>& p);

struct TerngUhlenbeck {
    FrameGrid frame;          // dressed frame, zeta filled with the dressed potential
    double cross_check = -1;  // max |F - F_direct| (negative when not run)
    double unitarity = 0.0;   // max |F F^* - 1| on unimodular lambdas
    double min_margin = 0.0;  // min eigenline margin over the grid
};

// F(z) = h_{L'} Fr(z) h_{L'(z)}^-1 with Fr the frame of p * reduced and
// L'(z) = conj(Fr_{a0}(z))^T L'. Lambdas must avoid a0 and 1/conj(a0).
TerngUhlenbeck terng_uhlenbeck_frame(const MatrixLaurent& reduced, const Vec2& line_prime, cplx alpha0,
                                     const GridSpec& grid, const std::vector<cplx>& lambdas,
                                     const FlowOptions& opt = {}, bool cross_check = true);

struct BubbletonFlow {
    MatrixLaurent xi;
    double max_residual = 0.0;    // window truncation of the field
    double max_correction = 0.0;  // reality re-imposed after each step
};

// d xi/ds = [xi, X_u], X = f_beta m xi expanded at 0, X_u its loop-su part, s in [0, 1]
BubbletonFlow bubbleton_flow(const MatrixLaurent& xi, cplx alpha0, cplx beta, int steps = 200);

}  // namespace annuli
