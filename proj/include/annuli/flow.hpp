#pragma once

#include <optional>
#include <vector>

#include "annuli/loop_algebra.hpp"

namespace annuli {

enum class ExecPolicy { serial, parallel };

// Rectangle [x0,x1] x [y0,y1] containing 0. Each side of the origin gets
// n = ceil(extent/h) cells of equal width, so 0 and the endpoints are nodes.
struct GridSpec {
    double x0 = 0, x1 = 0, hx = 1e-2;
    double y0 = 0, y1 = 0, hy = 1e-2;
};

struct Axis {
    std::vector<double> t;
    int origin = 0;
};

Axis make_axis(double a, double b, double h);

// connection 1-form alpha = A dz + B dzbar
struct Alpha {
    Laurent dz;    // degrees -1..0
    Laurent dzb;   // degrees 0..1
    Laurent dx() const { return dz + dzb; }
    Laurent dy() const { return I * (dz - dzb); }
};

// throws std::domain_error when beta_{-1} = 0
Alpha alpha_of(const MatrixLaurent& zeta);

// omega from 4 beta_{-1} = i delta e^omega; throws if Im(4 beta/delta) <= 0
double omega_of(const MatrixLaurent& zeta);

struct FrameGrid {
    Axis x, y;
    std::vector<cplx> lambdas;
    std::vector<MatrixLaurent> zeta;  // (iy * nx + ix)
    std::vector<Mat2> frame;          // (iy * nx + ix) * nl + il
    std::vector<double> omega;

    int nx() const { return static_cast<int>(x.t.size()); }
    int ny() const { return static_cast<int>(y.t.size()); }
    int nl() const { return static_cast<int>(lambdas.size()); }
    size_t node(int ix, int iy) const { return static_cast<size_t>(iy) * nx() + ix; }
    const MatrixLaurent& zeta_at(int ix, int iy) const { return zeta[node(ix, iy)]; }
    const Mat2& frame_at(int ix, int iy, int il) const { return frame[node(ix, iy) * nl() + il]; }
    cplx z_at(int ix, int iy) const { return {x.t[ix], y.t[iy]}; }
    std::optional<int> lambda_index(cplx lam, double tol = 1e-12) const;
    // node index whose z equals the given value within tol
    std::optional<std::pair<int, int>> locate(cplx z, double tol = 1e-9) const;
};

struct FlowOptions {
    ExecPolicy policy = ExecPolicy::parallel;
    int substeps = 1;  // RK4 steps per grid cell
};

// Joint RK4 for d zeta = [zeta, alpha(zeta)], dF = F alpha(zeta): x-axis first, then y-columns.
FrameGrid integrate(const MatrixLaurent& xi, const GridSpec& spec, const std::vector<cplx>& lambdas,
                    const FlowOptions& opt = {});

struct PathResult {
    MatrixLaurent zeta;
    std::vector<Mat2> frames;
};

// straight segment transport from (zeta0, frames0) by dz, n RK4 steps
PathResult transport(const MatrixLaurent& zeta0, const std::vector<Mat2>& frames0,
                     const std::vector<cplx>& lambdas, cplx dz, int n);

// integrate to z along x-then-y or y-then-x with step h
PathResult integrate_to(const MatrixLaurent& xi, cplx z, const std::vector<cplx>& lambdas, double h,
                        bool x_first = true);

double flatness_defect(const MatrixLaurent& xi, cplx z_target, const std::vector<cplx>& lambdas,
                       double h);

// |F_h - F_{h/2}| * 16/15 at z
double richardson_error(const MatrixLaurent& xi, cplx z, const std::vector<cplx>& lambdas, double h);

struct PeriodDefect {
    double frame = 0.0;      // distance of F(tau) from {+1, -1}
    double commuting = 0.0;  // |[F(tau), sigma3]|
    double zeta = 0.0;       // |zeta(tau) - zeta(0)|
};

// throws std::out_of_range if tau or lambda0 is not on the grid
PeriodDefect period_defect(const FrameGrid& fg, cplx tau, cplx lambda0);

struct FlowDiagnostics {
    double a_drift = 0.0;        // relative
    double reality = 0.0;
    double residue = 0.0;
    double det_defect = 0.0;
    double unitarity = 0.0;      // on |lambda| = 1 samples
};

FlowDiagnostics diagnose(const FrameGrid& fg, const std::vector<cplx>& a_samples);

// second-order FD residual of Laplace(omega) + sinh(omega)cosh(omega) at interior nodes
std::vector<double> sinh_gordon_residual(const FrameGrid& fg);

// |zeta_0[0,0] - omega_z| with omega_z from central differences, max over interior nodes
double omega_z_consistency(const FrameGrid& fg);

}  // namespace annuli
