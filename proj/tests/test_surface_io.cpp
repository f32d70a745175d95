#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "annuli/riemann_family.hpp"
#include "annuli/surface_io.hpp"

using namespace annuli;

namespace {

const double s8 = 3 - 2 * std::sqrt(2.0);

std::vector<FamilyPreset> presets() {
    return {preset(0), preset(1, {{}, s8}), preset(1, {0.3, {}}), preset(2, {0.3, 0.4})};
}

// vertex distance between z = 0 and z = tau, grid laid along the period
double closure(const FamilyPreset& p, int n = 400) {
    const cplx tau = p.spectral.tau;
    const bool real = std::abs(tau.imag()) < 1e-12;
    const GridSpec gs = real ? GridSpec{0, tau.real(), tau.real() / n, 0, 0, 1}
                             : GridSpec{0, 0, 1, 0, tau.imag(), tau.imag() / n};
    const SurfaceMesh m = assemble(integrate(p.potential, gs, {1.0}), 1.0);
    const auto& a = m.vertices.front();
    const auto& b = m.vertices.back();
    double d = 0;
    for (int k = 0; k < 4; ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

}  // namespace

TEST_CASE("su2 coordinates") {
    Mat2 m;
    m << cplx(0, 3), cplx(1, 2), cplx(-1, 2), cplx(0, -3);
    const auto v = su2_to_r3(m);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 2.0);
    CHECK(v[2] == 3.0);
}

TEST_CASE("flat immersion is the vertical cylinder") {
    const double h = M_PI / 100;
    const FrameGrid fg = integrate(flat_potential(), {0, 2 * M_PI, h, 0, 1, 1e-2}, {1.0});
    const SurfaceMesh m = assemble(fg, 1.0);
    REQUIRE(m.vertices.size() == static_cast<size_t>(fg.nx() * fg.ny()));
    double err = 0;
    for (int iy = 0; iy < m.ny; ++iy)
        for (int ix = 0; ix < m.nx; ++ix) {
            const cplx z = fg.z_at(ix, iy);
            const std::array<double, 4> e{std::sin(z.real()), 0.0, std::cos(z.real()), z.imag()};
            const auto& X = m.vertices[static_cast<size_t>(iy) * m.nx + ix];
            for (int k = 0; k < 4; ++k) err = std::max(err, std::abs(X[k] - e[k]));
        }
    CHECK(err <= 1e-8);
    const auto& v0 = m.vertices.front();
    CHECK(std::abs(v0[0]) + std::abs(v0[1]) + std::abs(v0[2] - 1) + std::abs(v0[3]) == 0.0);
    CHECK(m.faces.size() == static_cast<size_t>((m.nx - 1) * (m.ny - 1)));

    const SurfaceReport r = diagnostics(m);
    CHECK(r.sphere <= 1e-12);
    CHECK(r.conformality <= 1e-12);
    REQUIRE(r.metric);
    CHECK(*r.metric <= 1e-12);
    REQUIRE(r.n3);
    CHECK(*r.n3 <= 1e-12);
    CHECK(r.hopf <= 1e-12);
}

TEST_CASE("assemble argument errors") {
    const FrameGrid fg = integrate(flat_potential(), {0, 1, 0.1, 0, 1, 0.1}, {1.0, 2.0});
    CHECK_THROWS_AS(assemble(fg, I), std::out_of_range);
    CHECK_THROWS_AS(assemble(fg, 2.0), std::invalid_argument);
}

TEST_CASE("stereographic projection") {
    const FrameGrid fg = integrate(flat_potential(), {0, 2 * M_PI, M_PI / 50, 0, 0.5, 0.1}, {1.0});
    const SurfaceMesh m = assemble(fg, 1.0);
    std::ostringstream os;
    write_mesh(os, m, MeshFormat::json, Projection::stereo3);
    const auto j = nlohmann::json::parse(os.str());
    REQUIRE(j["vertices"].size() == m.vertices.size());
    double circle = 0;
    for (size_t k = 0; k < m.vertices.size(); ++k) {
        const auto& p = j["vertices"][k];
        circle = std::max(circle, std::abs(std::hypot(p[0].get<double>(), p[1].get<double>()) - 1));
        CHECK(p[2].get<double>() == m.vertices[k][3]);
    }
    // the great circle v = 0 contains no pole and projects to the unit circle
    CHECK(circle <= 1e-12);

    SurfaceMesh pole;
    pole.nx = pole.ny = 1;
    pole.vertices = {{0.0, 1.0, 0.0, 0.5}};
    std::ostringstream sink;
    CHECK_THROWS_AS(write_mesh(sink, pole, MeshFormat::obj, Projection::stereo3), std::domain_error);
    CHECK_NOTHROW(write_mesh(sink, pole, MeshFormat::obj, Projection::ambient4));
}

TEST_CASE("writers") {
    SurfaceMesh empty;
    std::ostringstream obj;
    write_mesh(obj, empty, MeshFormat::obj, Projection::ambient4);
    CHECK(obj.str() == "# annuli surface mesh\n# nx 0 ny 0 lambda0 1 0 projection ambient4\n");
    std::ostringstream js;
    write_mesh(js, empty, MeshFormat::json, Projection::ambient4);
    const auto j = nlohmann::json::parse(js.str());
    CHECK(j["vertices"].empty());
    CHECK(j["faces"].empty());

    const FrameGrid fg = integrate(preset(1, {0.3, {}}).potential, {0, 0.5, 0.1, 0, 0.3, 0.1}, {1.0});
    const SurfaceMesh m = assemble(fg, 1.0);
    std::ostringstream a, b;
    write_mesh(a, m, MeshFormat::obj, Projection::ambient4);
    write_mesh(b, assemble(fg, 1.0), MeshFormat::obj, Projection::ambient4);
    CHECK(a.str() == b.str());
    int verts = 0, faces = 0;
    std::istringstream in(a.str());
    for (std::string line; std::getline(in, line);) {
        verts += line.rfind("v ", 0) == 0;
        faces += line.rfind("f ", 0) == 0;
    }
    CHECK(verts == m.nx * m.ny);
    CHECK(faces == (m.nx - 1) * (m.ny - 1));
    CHECK_THROWS_AS(export_mesh("/nonexistent/dir/x.obj", m, MeshFormat::obj, Projection::ambient4), std::runtime_error);
}

TEST_CASE("serial and parallel assembly agree bitwise") {
    const FrameGrid fg = integrate(preset(2, {0.3, 0.4}).potential, {0, 0.6, 0.05, 0, 0.4, 0.05}, {1.0});
    const SurfaceMesh a = assemble(fg, 1.0, ExecPolicy::serial);
    const SurfaceMesh b = assemble(fg, 1.0, ExecPolicy::parallel);
    CHECK(a.vertices == b.vertices);
    bool same = true;
    for (size_t k = 0; k < a.diag.size(); ++k)
        same = same && a.diag[k].conformal == b.diag[k].conformal && a.diag[k].hopf == b.diag[k].hopf;
    CHECK(same);
}

TEST_CASE("presets are conformal with metric cosh^2 omega") {
    for (const auto& p : presets()) {
        const std::vector<cplx> lams{1.0, std::polar(1.0, 0.7)};
        const FrameGrid fg = integrate(p.potential, {0, 1, 1e-2, 0, 1, 1e-2}, lams);
        const SurfaceMesh m = assemble(fg, 1.0);
        CHECK(std::abs(std::abs(m.a0) - 1.0 / 16) <= 1e-12);
        const SurfaceReport r = diagnostics(m);
        CHECK(r.sphere <= 1e-8);
        CHECK(r.conformality <= 1e-6);
        REQUIRE(r.metric);
        CHECK(*r.metric <= 1e-6);
        REQUIRE(r.n3);
        CHECK(*r.n3 <= 1e-6);
        CHECK(r.hopf <= 1e-6);
        CHECK(r.sinh_gordon <= 1e-3);
        // the associated family is isometric
        const SurfaceMesh m2 = assemble(fg, lams[1]);
        double dm = 0;
        for (size_t k = 0; k < m.diag.size(); ++k)
            dm = std::max(dm, std::abs(m.diag[k].conformal - m2.diag[k].conformal));
        CHECK(dm <= 1e-8);
        CHECK(diagnostics(m2).conformality <= 1e-6);
    }
}

TEST_CASE("vertices close over the period") {
    for (const auto& p : presets()) CHECK(closure(p) <= 1e-5);
    // half a period does not close
    FamilyPreset half = preset(0);
    half.spectral.tau /= 2;
    CHECK(closure(half) > 0.5);
}
