#pragma once

#include <optional>
#include <vector>

#include "annuli/loop_algebra.hpp"

namespace annuli {

// nu^2 = a(lambda)/lambda, compactified over 0 and infinity
struct SpectralCurve {
    SpectralPolynomial a;
    PairingResult roots;
    int genus = 0;
    std::vector<cplx> finite_branch_points;  // roots of a

    int branch_point_count() const { return static_cast<int>(finite_branch_points.size()) + 2; }
    cplx nu_squared(cplx lam) const { return a.eval(lam) / lam; }
};

// throws std::invalid_argument on pairing failure, repeated or unimodular roots
SpectralCurve build_curve(const SpectralPolynomial& a, double tol = 1e-8);

struct QuantizationPoint {
    cplx lambda;
    cplx h;
    double defect = 0.0;  // distance of h from i pi Z
};

struct ClosingData {
    SpectralPolynomial a;
    std::vector<cplx> b;  // b_0 .. b_{g+1}
    cplx tau;
    double Theta = 0.0;   // a(0) = -|a(0)| e^{i Theta}
    double condition = 1.0;
    std::vector<cplx> segment_integrals;  // int over [alpha_i, 1/conj(alpha_i)]
    std::vector<QuantizationPoint> quantization;  // lambda = 1 first, then the roots of a

    double max_quantization_defect() const;
};

// Root-free sector rotation and an optional detour radius. eps = 0 picks half the
// angular gap to the next root direction (capped at 0.5).
struct HPath {
    double eps = 0.0;
    double mid_radius = 0.0;  // 0: no detour
};

struct HValue {
    cplx h;
    cplx nu;  // sheet reached by the continuation
};

// h(lambda) = int b dlambda/(nu lambda^2), regularized at 0 by subtracting the pole of sqrt(lambda)^{-1}.
// The path runs along a ray from 0 and then an arc at |lambda|, never crossing a segment [alpha_i, 1/conj(alpha_i)];
// targets on a segment are reached from the counterclockwise side.
HValue integrate_h(const ClosingData& cd, cplx lambda, const HPath& path = {});

// b for the given a scaled so that h(1) is in i pi Z with the smallest |tau|, or with tau nearest tau_hint
ClosingData solve_closing(const SpectralPolynomial& a, std::optional<cplx> tau_hint = std::nullopt);

// int over the segment [alpha, 1/conj(alpha)] of b dlambda/(nu lambda^2)
cplx segment_integral(const SpectralPolynomial& a, const std::vector<cplx>& b, cplx alpha);

struct SpectralDataReport {
    double reality = 0.0;      // (i) coefficient reality of a
    double sign = 0.0;         // (i) max Re(l^-g a) on the circle
    double theta_phase = 0.0;  // (i) |a(0)| > 0, phase consistency
    double b_reality = 0.0;    // (ii)
    double b0_relation = 0.0;  // (iii)
    double cut_integrals = 0.0;  // (iv)
    double quantization = 0.0;   // (v)
    bool ok = false;
};

SpectralDataReport verify_spectral_data(const ClosingData& cd, double tol_alg = 1e-8, double tol_quant = 1e-6);

// psi_+ = (1, (nu - alpha)/beta), psi_- with -nu; switches to (1, gamma/(nu + alpha)) when beta is small
// and returns (0, 1) when both forms degenerate. Throws std::domain_error at a branch point.
Vec2 eigenvector_at(const MatrixLaurent& xi, cplx lambda, int branch);

}  // namespace annuli
