#include <doctest.h>

#include "esurf/decomposition.hpp"

#include <cmath>
#include <random>

using namespace esurf;

namespace {

ProblemConfig paper_config(double rho1) {
    ProblemConfig c;
    c.lambda_lame = 2.0;
    c.mu = 1.0;
    c.rho0 = 1.0;
    c.rho1 = rho1;
    c.omega = 2.0 * pi;
    c.period = 3.1;
    c.a = 2.0;
    c.b = 0.05;
    return c;
}

}  // namespace

TEST_CASE("zero potentials give the pure source trace") {
    auto c = paper_config(4.0);
    auto wn = derive_wavenumbers(c);
    auto grid = mode_grid(c, wn);
    auto vw = vertical_wavenumbers(wn, grid);
    auto src = tbc_sources(c, wn);

    ModeCoefficients phi1("phi1", c.a, grid.n_max), phi2("phi2", c.a, grid.n_max);
    auto rec = displacement_from_potentials(phi1, phi2, grid, vw, src, c, 500);
    for (int i = 0; i < rec.size(); ++i) {
        CHECK(std::abs(rec.u1[i]) < 1e-13);
        CHECK(std::abs(rec.u2[i] - src.g1) < 1e-12);
    }
}

TEST_CASE("single shear mode forward values") {
    auto c = paper_config(4.0);
    auto wn = derive_wavenumbers(c);
    auto grid = mode_grid(c, wn);
    auto vw = vertical_wavenumbers(wn, grid);
    auto src = tbc_sources(c, wn);

    ModeCoefficients phi1("phi1", c.a, grid.n_max), phi2("phi2", c.a, grid.n_max);
    phi2.set(0, 1.0);
    auto [u1n, u2n] = displacement_modes_from_potentials(phi1, phi2, grid, vw, src);
    CHECK(std::abs(u1n.at(0) - cd(0.0, 1.0) * vw.beta(2, 0)) < 1e-13);
    CHECK(std::abs(u2n.at(0) - src.g1) < 1e-13);
}

TEST_CASE("round trip displacement <-> potentials") {
    auto c = paper_config(4.0);
    auto wn = derive_wavenumbers(c);
    auto grid = mode_grid(c, wn);
    auto vw = vertical_wavenumbers(wn, grid);
    auto src = tbc_sources(c, wn);
    int N = grid.n_max;

    // single compressional mode
    {
        ModeCoefficients phi1("phi1", c.a, N), phi2("phi2", c.a, N);
        phi1.set(0, 1.0);
        auto rec = displacement_from_potentials(phi1, phi2, grid, vw, src, c, 500);
        auto [b1, b2] = potentials_from_displacement(rec, c, grid, vw, src, N);
        CHECK(std::abs(b1.at(0) - 1.0) < 1e-12);
        for (int n = -N; n <= N; ++n) {
            if (n != 0) CHECK(std::abs(b1.at(n)) < 1e-12);
            CHECK(std::abs(b2.at(n)) < 1e-12);
        }
    }

    // random band-limited potentials
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ModeCoefficients phi1("phi1", c.a, N), phi2("phi2", c.a, N);
    for (int n = -N; n <= N; ++n) {
        phi1.set(n, cd(u(rng), u(rng)));
        phi2.set(n, cd(u(rng), u(rng)));
    }
    auto rec = displacement_from_potentials(phi1, phi2, grid, vw, src, c, 500);
    auto [b1, b2] = potentials_from_displacement(rec, c, grid, vw, src, N);
    for (int n = -N; n <= N; ++n) {
        CHECK(std::abs(b1.at(n) - phi1.at(n)) < 1e-11);
        CHECK(std::abs(b2.at(n) - phi2.at(n)) < 1e-11);
    }

    // linearity in the non-source part: doubling potentials doubles u - source
    auto [u1a, u2a] = displacement_modes_from_potentials(phi1, phi2, grid, vw, src);
    ModeCoefficients dphi1 = phi1, dphi2 = phi2;
    for (int n = -N; n <= N; ++n) {
        dphi1.set(n, 2.0 * phi1.at(n));
        dphi2.set(n, 2.0 * phi2.at(n));
    }
    auto [u1b, u2b] = displacement_modes_from_potentials(dphi1, dphi2, grid, vw, src);
    for (int n = -N; n <= N; ++n) {
        cd da = u1a.at(n) - src.g_mode(2, n);
        cd db = u1b.at(n) - src.g_mode(2, n);
        CHECK(std::abs(db - 2.0 * da) < 1e-12);
        cd ea = u2a.at(n) - src.g_mode(1, n);
        cd eb = u2b.at(n) - src.g_mode(1, n);
        CHECK(std::abs(eb - 2.0 * ea) < 1e-12);
    }
}
