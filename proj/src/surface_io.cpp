#include "annuli/surface_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace annuli {

namespace {

using V4 = std::array<double, 4>;

double dot4(const V4& a, const V4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

double det3(double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

// vector orthogonal to a, b, c in R^4 (cofactor expansion)
V4 cross4(const V4& a, const V4& b, const V4& c) {
    V4 n;
    for (int k = 0; k < 4; ++k) {
        int col[3], m = 0;
        for (int j = 0; j < 4; ++j)
            if (j != k) col[m++] = j;
        const double d = det3(a[col[0]], a[col[1]], a[col[2]], b[col[0]], b[col[1]], b[col[2]], c[col[0]],
                              c[col[1]], c[col[2]]);
        n[k] = (k % 2 ? -d : d);
    }
    return n;
}

double d2(const std::vector<double>& t, int i, double fm, double f0, double fp) {
    const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
    return 2 * (hm * fp - (hm + hp) * f0 + hp * fm) / (hm * hp * (hm + hp));
}

}  // namespace

std::array<double, 3> su2_to_r3(const Mat2& m) {
    return {m(0, 1).real(), m(0, 1).imag(), m(0, 0).imag()};
}

SurfaceMesh assemble(const FrameGrid& fg, cplx lambda0, ExecPolicy policy) {
    if (std::abs(std::abs(lambda0) - 1.0) > 1e-12) throw std::invalid_argument("assemble: |lambda0| != 1");
    const auto il = fg.lambda_index(lambda0);
    if (!il) throw std::out_of_range("assemble: lambda0 is not on the grid");
    SurfaceMesh m;
    m.nx = fg.nx();
    m.ny = fg.ny();
    m.lambda0 = lambda0;
    const size_t n = static_cast<size_t>(m.nx) * m.ny;
    if (n == 0) return m;
    m.a0 = det_poly(fg.zeta_at(fg.x.origin, fg.y.origin)).coef[0];
    m.vertices.resize(n);
    m.diag.resize(n);
    for (int iy = 0; iy + 1 < m.ny; ++iy)
        for (int ix = 0; ix + 1 < m.nx; ++ix) {
            const int v = iy * m.nx + ix;
            m.faces.push_back({v, v + 1, v + 1 + m.nx, v + m.nx});
        }

    Mat2 s3;
    s3 << I, 0, 0, -I;
    // height = Re(c z), c = -i sqrt(-16 a(0)) lambda0^{-1/2}
    const cplx c = -I * std::sqrt(-16.0 * m.a0) / std::sqrt(lambda0);
    const cplx hopf_target = -4.0 * m.a0 / lambda0;

    auto vertex = [&](size_t k) {
        const int ix = static_cast<int>(k % m.nx), iy = static_cast<int>(k / m.nx);
        const Mat2& F = fg.frame_at(ix, iy, *il);
        const Mat2 Fi = F.inverse();
        const cplx z = fg.z_at(ix, iy);
        const auto p = su2_to_r3(F * s3 * Fi);
        V4& X = m.vertices[k];
        X = {p[0], p[1], p[2], (c * z).real()};

        const Alpha al = alpha_of(fg.zeta[k]);
        const auto gx = su2_to_r3(F * (al.dx().eval(lambda0) * s3 - s3 * al.dx().eval(lambda0)) * Fi);
        const auto gy = su2_to_r3(F * (al.dy().eval(lambda0) * s3 - s3 * al.dy().eval(lambda0)) * Fi);
        const V4 Xx{gx[0], gx[1], gx[2], c.real()};
        const V4 Xy{gy[0], gy[1], gy[2], -c.imag()};

        VertexDiagnostics& d = m.diag[k];
        d.omega = fg.omega[k];
        const double ex = dot4(Xx, Xx), ey = dot4(Xy, Xy), exy = dot4(Xx, Xy);
        d.conformal = 0.5 * (ex + ey);
        d.conformality = std::abs(cplx(ex - ey, -2 * exy)) / 4;
        const double gxx = ex - c.real() * c.real(), gyy = ey - c.imag() * c.imag(),
                     gxy = exy + c.real() * c.imag();
        d.hopf = std::abs(cplx(gxx - gyy, -2 * gxy) / 4.0 - hopf_target);
        // orientation (X_y, X_x, p) gives n3 = tanh(omega)
        V4 N = cross4(Xy, Xx, {p[0], p[1], p[2], 0.0});
        const double nn = std::sqrt(dot4(N, N));
        d.n3 = nn > 0 ? N[3] / nn : 0.0;
        if (ix > 0 && iy > 0 && ix + 1 < m.nx && iy + 1 < m.ny) {
            auto w = [&](int i, int j) { return fg.omega[fg.node(i, j)]; };
            const double o = w(ix, iy);
            d.sinh_gordon = d2(fg.x.t, ix, w(ix - 1, iy), o, w(ix + 1, iy)) +
                            d2(fg.y.t, iy, w(ix, iy - 1), o, w(ix, iy + 1)) + std::sinh(o) * std::cosh(o);
        }
    };

    const long nn = static_cast<long>(n);
    if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(static)
        for (long k = 0; k < nn; ++k) vertex(static_cast<size_t>(k));
    } else {
        for (long k = 0; k < nn; ++k) vertex(static_cast<size_t>(k));
    }
    return m;
}

SurfaceReport diagnostics(const SurfaceMesh& mesh) {
    SurfaceReport r;
    if (std::abs(16 * std::abs(mesh.a0) - 1.0) <= 1e-9 && !mesh.vertices.empty()) r.metric = r.n3 = 0.0;
    for (size_t k = 0; k < mesh.vertices.size(); ++k) {
        const V4& X = mesh.vertices[k];
        const VertexDiagnostics& d = mesh.diag[k];
        r.sphere = std::max(r.sphere, std::abs(std::sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2]) - 1.0));
        r.conformality = std::max(r.conformality, d.conformality);
        const double ch = std::cosh(d.omega);
        if (r.metric) {
            r.metric = std::max(*r.metric, std::abs(d.conformal - ch * ch));
            r.n3 = std::max(*r.n3, std::abs(d.n3 - std::tanh(d.omega)));
        }
        r.hopf = std::max(r.hopf, d.hopf);
        r.sinh_gordon = std::max(r.sinh_gordon, std::abs(d.sinh_gordon));
    }
    return r;
}

namespace {

std::array<double, 3> project(const V4& X) {
    const double s = 1.0 - X[1];
    if (s < 1e-12) throw std::domain_error("write_mesh: vertex at the projection pole");
    return {X[0] / s, X[2] / s, X[3]};
}

}  // namespace

void write_mesh(std::ostream& os, const SurfaceMesh& mesh, MeshFormat format, Projection proj) {
    if (format == MeshFormat::obj) {
        char buf[128];
        os << "# annuli surface mesh\n";
        std::snprintf(buf, sizeof buf, "# nx %d ny %d lambda0 %.9g %.9g projection %s\n", mesh.nx, mesh.ny,
                      mesh.lambda0.real(), mesh.lambda0.imag(), proj == Projection::stereo3 ? "stereo3" : "ambient4");
        os << buf;
        for (const V4& X : mesh.vertices) {
            if (proj == Projection::stereo3) {
                const auto p = project(X);
                std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p[0], p[1], p[2]);
            } else {
                // OBJ allows a fourth (weight) slot; ambient coordinates go there verbatim
                std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g %.9g\n", X[0], X[1], X[2], X[3]);
            }
            os << buf;
        }
        for (const auto& f : mesh.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << ' ' << f[3] + 1 << '\n';
        return;
    }
    nlohmann::ordered_json j;
    j["format"] = "annuli-mesh";
    j["version"] = 1;
    j["projection"] = proj == Projection::stereo3 ? "stereo3" : "ambient4";
    j["nx"] = mesh.nx;
    j["ny"] = mesh.ny;
    j["lambda0"] = {mesh.lambda0.real(), mesh.lambda0.imag()};
    j["a0"] = {mesh.a0.real(), mesh.a0.imag()};
    auto& verts = j["vertices"] = nlohmann::ordered_json::array();
    for (const V4& X : mesh.vertices) {
        if (proj == Projection::stereo3) {
            const auto p = project(X);
            verts.push_back({p[0], p[1], p[2]});
        } else {
            verts.push_back({X[0], X[1], X[2], X[3]});
        }
    }
    j["faces"] = mesh.faces;
    auto& dg = j["diagnostics"];
    std::vector<double> om, cf, n3, co, hp, sg;
    for (const auto& d : mesh.diag) {
        om.push_back(d.omega);
        cf.push_back(d.conformal);
        n3.push_back(d.n3);
        co.push_back(d.conformality);
        hp.push_back(d.hopf);
        sg.push_back(d.sinh_gordon);
    }
    dg["omega"] = om;
    dg["conformal_factor"] = cf;
    dg["n3"] = n3;
    dg["conformality"] = co;
    dg["hopf"] = hp;
    dg["sinh_gordon"] = sg;
    os << j.dump(1) << '\n';
}

void export_mesh(const std::string& path, const SurfaceMesh& mesh, MeshFormat format, Projection proj) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_mesh(f, mesh, format, proj);
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace annuli
