#include "esurf/forward.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

namespace esurf {

namespace {

// One basis potential e^{i q (y - ref)} of type j living in a region with
// shear wavenumber squared k2sq and density rho.
struct BasisWave {
    int j = 1;
    cd q;
    double ref = 0.0;
    double k2sq = 0.0;
    double rho = 0.0;
};

// (u1, u2, sigma12, sigma22) carried by a unit-amplitude basis wave at
// height y. The tractions follow from the potential form of the stress:
// sigma12 = mu (2 i alpha phi1' + (2 alpha^2 - k2^2) phi2),
// sigma22 = (2 mu alpha^2 - rho omega^2) phi1 - 2 i mu alpha phi2',
// using phi'' = -q^2 phi and (lambda + 2 mu) k1^2 = mu k2^2 = rho omega^2.
std::array<cd, 4> wave_fields(const BasisWave& w, double alpha, const ProblemConfig& config,
                              double y) {
    const cd i(0.0, 1.0);
    cd e = std::exp(i * w.q * (y - w.ref));
    double mu = config.mu;
    double rw2 = w.rho * config.omega * config.omega;
    if (w.j == 1) {
        return {i * alpha * e, i * w.q * e, -2.0 * mu * alpha * w.q * e,
                (2.0 * mu * alpha * alpha - rw2) * e};
    }
    return {i * w.q * e, -i * alpha * e, mu * (2.0 * alpha * alpha - w.k2sq) * e,
            2.0 * mu * alpha * w.q * e};
}

cd eval_pair(cd up, cd down, cd q, double ref, double y) {
    const cd i(0.0, 1.0);
    return up * std::exp(i * q * (y - ref)) + down * std::exp(-i * q * (y - ref));
}

}  // namespace

cd FlatLayerSolution::gap_potential(int j, int n, double y) const {
    cd q = (j == 1) ? vertical_root(wn.kappa1, 2.0 * pi * n / period)
                    : vertical_root(wn.kappa2, 2.0 * pi * n / period);
    int k = n + N;
    return (j == 1) ? eval_pair(C1p[k], C1m[k], q, 0.0, y) : eval_pair(C2p[k], C2m[k], q, 0.0, y);
}

cd FlatLayerSolution::slab_potential(int j, int n, double y) const {
    cd q = (j == 1) ? vertical_root(wn.eta1, 2.0 * pi * n / period)
                    : vertical_root(wn.eta2, 2.0 * pi * n / period);
    int k = n + N;
    return (j == 1) ? eval_pair(B1p[k], B1m[k], q, b, y) : eval_pair(B2p[k], B2m[k], q, b, y);
}

cd FlatLayerSolution::upper_potential(int j, int n, double y) const {
    const cd i(0.0, 1.0);
    cd q = (j == 1) ? vertical_root(wn.kappa1, 2.0 * pi * n / period)
                    : vertical_root(wn.kappa2, 2.0 * pi * n / period);
    int k = n + N;
    cd amp = (j == 1) ? A1[k] : A2[k];
    return amp * std::exp(i * q * (y - a));
}

std::pair<cd, cd> FlatLayerSolution::mode_displacement(int n, double y) const {
    const cd i(0.0, 1.0);
    double alpha = 2.0 * pi * n / period;
    cd u1(0.0), u2(0.0);
    auto accumulate = [&](int j, cd up, cd down, cd q, double ref) {
        cd e_up = up * std::exp(i * q * (y - ref));
        cd e_dn = down * std::exp(-i * q * (y - ref));
        if (j == 1) {
            u1 += i * alpha * (e_up + e_dn);
            u2 += i * q * (e_up - e_dn);
        } else {
            u1 += i * q * (e_up - e_dn);
            u2 += -i * alpha * (e_up + e_dn);
        }
    };
    int k = n + N;
    if (y < b) {
        accumulate(1, C1p[k], C1m[k], vertical_root(wn.kappa1, alpha), 0.0);
        accumulate(2, C2p[k], C2m[k], vertical_root(wn.kappa2, alpha), 0.0);
    } else if (y < a) {
        accumulate(1, B1p[k], B1m[k], vertical_root(wn.eta1, alpha), b);
        accumulate(2, B2p[k], B2m[k], vertical_root(wn.eta2, alpha), b);
    } else {
        accumulate(1, A1[k], cd(0.0), vertical_root(wn.kappa1, alpha), a);
        accumulate(2, A2[k], cd(0.0), vertical_root(wn.kappa2, alpha), a);
        if (n == 0) {
            // incident phi1 = -(i / kappa1) e^{-i kappa1 y}
            accumulate(1, cd(0.0), -i / wn.kappa1, cd(wn.kappa1), 0.0);
        }
    }
    return {u1, u2};
}

FarFieldRecord FlatLayerSolution::trace(int n_samples) const {
    const cd i(0.0, 1.0);
    FarFieldRecord rec;
    rec.xs = sample_grid(period, n_samples);
    rec.u1.assign(rec.xs.size(), cd(0.0));
    rec.u2.assign(rec.xs.size(), cd(0.0));
    for (int n = -N; n <= N; ++n) {
        auto [u1n, u2n] = mode_displacement(n, a);
        if (u1n == cd(0.0) && u2n == cd(0.0)) continue;
        double alpha = 2.0 * pi * n / period;
        for (std::size_t s = 0; s < rec.xs.size(); ++s) {
            cd e = std::exp(i * alpha * rec.xs[s]);
            rec.u1[s] += u1n * e;
            rec.u2[s] += u2n * e;
        }
    }
    return rec;
}

FlatLayerSolution flat_layered_oracle(const ProblemConfig& config, const Wavenumbers& wn,
                                      const VerticalWavenumbers& vw) {
    const cd i(0.0, 1.0);
    FlatLayerSolution sol;
    sol.N = vw.N;
    sol.period = config.period;
    sol.a = config.a;
    sol.b = config.b;
    sol.wn = wn;
    int width = 2 * vw.N + 1;
    for (auto* v : {&sol.A1, &sol.A2, &sol.B1p, &sol.B1m, &sol.B2p, &sol.B2m, &sol.C1p, &sol.C1m,
                    &sol.C2p, &sol.C2m}) {
        v->assign(width, cd(0.0));
    }

    double k2sq_u = wn.kappa2 * wn.kappa2;
    double k2sq_s = wn.eta2 * wn.eta2;
    for (int n = -vw.N; n <= vw.N; ++n) {
        double alpha = 2.0 * pi * n / config.period;
        std::array<BasisWave, 10> cols = {{
            {1, vw.beta(1, n), config.a, k2sq_u, config.rho0},
            {2, vw.beta(2, n), config.a, k2sq_u, config.rho0},
            {1, vw.gamma(1, n), config.b, k2sq_s, config.rho1},
            {1, -vw.gamma(1, n), config.b, k2sq_s, config.rho1},
            {2, vw.gamma(2, n), config.b, k2sq_s, config.rho1},
            {2, -vw.gamma(2, n), config.b, k2sq_s, config.rho1},
            {1, vw.beta(1, n), 0.0, k2sq_u, config.rho0},
            {1, -vw.beta(1, n), 0.0, k2sq_u, config.rho0},
            {2, vw.beta(2, n), 0.0, k2sq_u, config.rho0},
            {2, -vw.beta(2, n), 0.0, k2sq_u, config.rho0},
        }};

        Eigen::Matrix<cd, 10, 10> M = Eigen::Matrix<cd, 10, 10>::Zero();
        Eigen::Matrix<cd, 10, 1> rhs = Eigen::Matrix<cd, 10, 1>::Zero();
        for (int c = 0; c < 10; ++c) {
            bool upper = c < 2;
            bool slab = c >= 2 && c < 6;
            auto at_a = wave_fields(cols[c], alpha, config, config.a);
            auto at_b = wave_fields(cols[c], alpha, config, config.b);
            for (int r = 0; r < 4; ++r) {
                if (upper) M(r, c) += at_a[r];
                if (slab) M(r, c) -= at_a[r];
                if (slab) M(4 + r, c) += at_b[r];
                if (!upper && !slab) M(4 + r, c) -= at_b[r];
            }
            if (!upper && !slab) {
                auto at_0 = wave_fields(cols[c], alpha, config, 0.0);
                M(8, c) = at_0[0];
                M(9, c) = at_0[1];
            }
        }
        if (n == 0) {
            BasisWave inc{1, cd(-wn.kappa1), 0.0, k2sq_u, config.rho0};
            auto at_a = wave_fields(inc, alpha, config, config.a);
            cd amp = -i / wn.kappa1;
            for (int r = 0; r < 4; ++r) rhs(r) = -amp * at_a[r];
        }

        Eigen::FullPivLU<Eigen::Matrix<cd, 10, 10>> lu(M);
        if (!lu.isInvertible()) {
            if (rhs.norm() == 0.0) continue;  // degenerate basis, unforced: zero field
            throw SingularModeError("flat layered system is singular at mode " +
                                    std::to_string(n));
        }
        Eigen::Matrix<cd, 10, 1> x = lu.solve(rhs);
        int k = n + vw.N;
        sol.A1[k] = x(0);
        sol.A2[k] = x(1);
        sol.B1p[k] = x(2);
        sol.B1m[k] = x(3);
        sol.B2p[k] = x(4);
        sol.B2m[k] = x(5);
        sol.C1p[k] = x(6);
        sol.C1m[k] = x(7);
        sol.C2p[k] = x(8);
        sol.C2m[k] = x(9);
    }
    return sol;
}

double flux_through(const FlatLayerSolution& sol, const ProblemConfig& config, double y) {
    // Per-mode fields are x-orthogonal, so the period-averaged flux is the
    // sum of per-mode contributions -omega/2 Im(sigma12 conj(u1) +
    // sigma22 conj(u2)).
    const cd i(0.0, 1.0);
    double total = 0.0;
    double k2sq_u = sol.wn.kappa2 * sol.wn.kappa2;
    double k2sq_s = sol.wn.eta2 * sol.wn.eta2;
    for (int n = -sol.N; n <= sol.N; ++n) {
        double alpha = 2.0 * pi * n / sol.period;
        int k = n + sol.N;
        std::array<std::pair<BasisWave, cd>, 5> waves;
        int count = 0;
        if (y < sol.b) {
            waves[count++] = {{1, vertical_root(sol.wn.kappa1, alpha), 0.0, k2sq_u, config.rho0},
                              sol.C1p[k]};
            waves[count++] = {{1, -vertical_root(sol.wn.kappa1, alpha), 0.0, k2sq_u, config.rho0},
                              sol.C1m[k]};
            waves[count++] = {{2, vertical_root(sol.wn.kappa2, alpha), 0.0, k2sq_u, config.rho0},
                              sol.C2p[k]};
            waves[count++] = {{2, -vertical_root(sol.wn.kappa2, alpha), 0.0, k2sq_u, config.rho0},
                              sol.C2m[k]};
        } else if (y < sol.a) {
            waves[count++] = {{1, vertical_root(sol.wn.eta1, alpha), sol.b, k2sq_s, config.rho1},
                              sol.B1p[k]};
            waves[count++] = {{1, -vertical_root(sol.wn.eta1, alpha), sol.b, k2sq_s, config.rho1},
                              sol.B1m[k]};
            waves[count++] = {{2, vertical_root(sol.wn.eta2, alpha), sol.b, k2sq_s, config.rho1},
                              sol.B2p[k]};
            waves[count++] = {{2, -vertical_root(sol.wn.eta2, alpha), sol.b, k2sq_s, config.rho1},
                              sol.B2m[k]};
        } else {
            waves[count++] = {{1, vertical_root(sol.wn.kappa1, alpha), sol.a, k2sq_u, config.rho0},
                              sol.A1[k]};
            waves[count++] = {{2, vertical_root(sol.wn.kappa2, alpha), sol.a, k2sq_u, config.rho0},
                              sol.A2[k]};
            if (n == 0) {
                waves[count++] = {{1, cd(-sol.wn.kappa1), 0.0, k2sq_u, config.rho0},
                                  -i / sol.wn.kappa1};
            }
        }
        std::array<cd, 4> f = {cd(0.0), cd(0.0), cd(0.0), cd(0.0)};
        for (int w = 0; w < count; ++w) {
            if (waves[w].second == cd(0.0)) continue;
            auto part = wave_fields(waves[w].first, alpha, config, y);
            for (int r = 0; r < 4; ++r) f[r] += waves[w].second * part[r];
        }
        total += -0.5 * config.omega *
                 std::imag(f[2] * std::conj(f[0]) + f[3] * std::conj(f[1]));
    }
    return total;
}

double incident_flux(const ProblemConfig& config, const Wavenumbers& wn) {
    // phi1 = -(i/kappa1) e^{-i kappa1 y} carries |u| = 1; its flux magnitude
    // is omega rho0 omega^2 / (2 kappa1).
    return 0.5 * config.omega * config.rho0 * config.omega * config.omega / wn.kappa1;
}

}  // namespace esurf
