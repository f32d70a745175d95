#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "annuli/flow.hpp"

namespace annuli {

// su(2) -> R^3: [[i w, u + i v], [-u + i v, -i w]] -> (u, v, w)
std::array<double, 3> su2_to_r3(const Mat2& m);

struct VertexDiagnostics {
    double omega = 0.0;
    double conformal = 0.0;     // (|X_x|^2 + |X_y|^2)/2
    double n3 = 0.0;            // height component of the unit normal
    double conformality = 0.0;  // |<X_z, X_z>|
    double hopf = 0.0;          // |<G_z, G_z> + 4 a(0)/lambda0|, G the S^2 part
    double sinh_gordon = 0.0;   // FD residual, 0 on the boundary
};

struct SurfaceMesh {
    int nx = 0, ny = 0;
    cplx lambda0{1.0, 0.0};
    cplx a0{};  // a(0) of the potential
    std::vector<std::array<double, 4>> vertices;  // (iy * nx + ix)
    std::vector<std::array<int, 4>> faces;        // counterclockwise quads, 0-based
    std::vector<VertexDiagnostics> diag;
};

// X = (F sigma3 F^-1, Re(-i sqrt(-16 a(0)) lambda0^{-1/2} z)), sigma3 = diag(i, -i).
// Derivatives come from F^-1 dF = alpha(zeta), so no differencing enters X_z.
// Throws std::out_of_range if lambda0 is not a grid lambda, std::invalid_argument if |lambda0| != 1.
SurfaceMesh assemble(const FrameGrid& fg, cplx lambda0, ExecPolicy policy = ExecPolicy::parallel);

struct SurfaceReport {
    double sphere = 0.0;        // max | |(u,v,w)| - 1 |
    double conformality = 0.0;  // max |<X_z, X_z>|
    // max |conformal - cosh^2 omega| and max |n3 - tanh omega|; these tie omega to the
    // metric only when |a(0)| = 1/16 and are empty otherwise
    std::optional<double> metric;
    std::optional<double> n3;
    double hopf = 0.0;
    double sinh_gordon = 0.0;
};

SurfaceReport diagnostics(const SurfaceMesh& mesh);

enum class MeshFormat { obj, json };
enum class Projection { ambient4, stereo3 };

// stereo3 projects S^2 from (0, 1, 0) and keeps the height as third coordinate.
// OBJ uses 9 significant digits. Throws std::domain_error for a vertex at the pole.
void write_mesh(std::ostream& os, const SurfaceMesh& mesh, MeshFormat format, Projection proj);
// throws std::runtime_error when the file cannot be written
void export_mesh(const std::string& path, const SurfaceMesh& mesh, MeshFormat format, Projection proj);

}  // namespace annuli
