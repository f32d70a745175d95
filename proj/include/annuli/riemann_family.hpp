#pragma once

#include <optional>
#include <vector>

#include "annuli/flow.hpp"
#include "annuli/loop_algebra.hpp"
#include "annuli/sinh_hierarchy.hpp"
#include "annuli/spectral_curve.hpp"

namespace annuli {

// F_lambda(z) for the flat potential, principal sqrt(lambda)
Mat2 flat_frame(cplx z, cplx lambda);

// (i/4)[[-2 w_y, e^w/l + conj(gamma) e^-w], [gamma e^-w + e^w l, 2 w_y]]
MatrixLaurent genus1_killing_field(double omega, double omega_y, cplx gamma);
// the constant d of the level set 2 w_y^2 + cosh 2w = 1 - 2d
double genus1_level(double omega, double omega_y);
// -(1/16)(gamma + 2(1-2d) l + conj(gamma) l^2)
SpectralPolynomial genus1_polynomial(double d, cplx gamma);

struct AbreschParameters {
    double c = -1, d = -1;
};

// critical values f0 = -w_x, g0 = -w_y at a point where w = f_x = g_y = 0; there
// f0^2 = (-1 + d - c + sqrt(disc))/2 and g0^2 = (-1 + c - d + sqrt(disc))/2
struct AbreschCritical {
    double f0 = 0, g0 = 0, discriminant = 0;
};
// throws std::invalid_argument unless c, d < 0 and the discriminant is >= 0
AbreschCritical abresch_critical(const AbreschParameters& p);
// inverse: (c, d) from the positive roots alpha (of a) and -beta
AbreschParameters abresch_from_roots(double alpha, double beta);

// a from the coefficient formulas in f0, g0; throws if the discriminant is negative
SpectralPolynomial genus2_coefficients(double c, double d);
// the four real roots from the closed formulas: -1 - 2f^2 +- 2 sqrt(f^2 + f^4), 1 + 2g^2 +- 2 sqrt(g^2 + g^4)
std::vector<double> genus2_root_formulas(double c, double d);
MatrixLaurent genus2_killing_field(double omega, cplx omega_z, cplx omega_zz, double c, double d);

struct AbreschSolution {
    AbreschParameters params;
    AbreschCritical crit;
    Axis x, y;
    std::vector<double> f, fx;  // along x
    std::vector<double> g, gy;  // along y
    std::vector<double> omega;  // (iy * nx + ix)
    double first_integral_drift = 0.0;

    int nx() const { return static_cast<int>(x.t.size()); }
    int ny() const { return static_cast<int>(y.t.size()); }
    double omega_at(int ix, int iy) const { return omega[static_cast<size_t>(iy) * nx() + ix]; }
};

// second-order ODEs -f'' = 2f^3 + (1+c-d) f, -g'' = 2g^3 + (1+d-c) g from the critical point,
// sinh w = (f_x + g_y)/(1 + f^2 + g^2). RK4 with `substeps` steps per grid cell.
AbreschSolution abresch_solve(const AbreschParameters& p, const GridSpec& grid, int substeps = 8);

// omega and its pure z / zbar derivatives up to order 3 at a node, from central differences
// on a 5x5 stencil (fourth order through the second derivatives); needs two nodes of margin
hier::Jet abresch_jet(const AbreschSolution& s, int ix, int iy);

// |w_zzz - 2 w_z^3 + w_zbar/4 - (c-d) w_z/2| at a node
double relation_residual(const AbreschSolution& s, int ix, int iy);

struct FamilyParams {
    std::optional<double> alpha;  // positive root of a, in (0, 1)
    std::optional<double> beta;   // -beta is a negative root of a, beta in (0, 1)
};

struct FamilyPreset {
    int genus = 0;
    FamilyParams params;
    SpectralPolynomial a;
    ClosingData spectral;
    MatrixLaurent potential;
    cplx sym_point{1.0, 0.0};
    cplx gamma{1.0, 0.0};     // constant of the Killing field (genus 1, 2)
    double level = 0.0;       // d of the genus-1 level set
    AbreschParameters abresch;  // genus 2
};

// genus 0: no parameters; genus 1: exactly one of alpha (helicoidal, gamma = -1) or beta
// (rotational, gamma = 1); genus 2: both. Throws std::invalid_argument otherwise.
FamilyPreset preset(int genus, const FamilyParams& params = {});

// lambda^{2g} a(1/lambda) - a(lambda), max coefficient
double additional_symmetry_defect(const SpectralPolynomial& a);

}  // namespace annuli
