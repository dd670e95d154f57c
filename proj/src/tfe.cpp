#include "esurf/tfe.hpp"

#include <algorithm>
#include <cmath>

namespace esurf {

namespace {

const cd iu(0.0, 1.0);

// ---------------------------------------------------------------------------
// Entire-function helpers for the exact integrals over [0, b].
//
// phi_k(w) = sum_{p>=0} w^p/(p+k)!  (phi1, phi2 from common.hpp), and the
// divided difference (phi_k(x)-phi_k(y))/(x-y), which stays finite when the
// two exponents collide.  The divided difference is what makes every kernel
// evaluable at a vanishing vertical wavenumber.

cd phi_k(int k, cd w) { return k == 1 ? phi1(w) : phi2(w); }

// series form of the divided difference; exact cancellation-free sum for
// arguments inside the unit disk
cd phi_series_dd(int k, cd x, cd y) {
    cd sp(1.0, 0.0);    // (x^p - y^p)/(x - y) built by recurrence
    double fact = 1.0;  // (p+k)! running
    for (int i = 2; i <= 1 + k; ++i) fact *= i;
    cd total = sp / fact;
    cd ypow(1.0, 0.0);
    int quiet = 0;  // symmetric arguments zero out alternating terms
    for (int p = 2; p <= 48; ++p) {
        ypow *= y;
        sp = sp * x + ypow;
        fact *= double(p + k);
        cd term = sp / fact;
        total += term;
        quiet = (std::abs(term) < 1e-19 * std::max(1.0, std::abs(total))) ? quiet + 1 : 0;
        if (quiet >= 2) break;
    }
    return total;
}

// j-th derivative of phi1; closed form, stable away from w = 0
cd phi1_deriv(int j, cd w) {
    double jf = 1.0;
    for (int i = 2; i <= j; ++i) jf *= i;
    cd poly(0.0);
    cd wpow(1.0, 0.0);
    double ifact = 1.0;
    for (int i = 0; i <= j; ++i) {
        if (i > 0) {
            wpow *= w;
            ifact *= double(i);
        }
        double sign = ((j - i) % 2 == 0) ? 1.0 : -1.0;
        poly += sign * (jf / ifact) * wpow;
    }
    double tail = ((j + 1) % 2 == 0) ? jf : -jf;
    return (std::exp(w) * poly + tail) / std::pow(w, j + 1);
}

// derivatives of phi2 through w*phi2^(j) + j*phi2^(j-1) = phi1^(j)
cd phi2_deriv(int j, cd w) {
    cd prev = (phi1(w) - 1.0) / w;
    for (int i = 1; i <= j; ++i) prev = (phi1_deriv(i, w) - double(i) * prev) / w;
    return prev;
}

cd phi_dd(int k, cd x, cd y) {
    double ax = std::abs(x), ay = std::abs(y);
    if (ax <= 1.0 && ay <= 1.0) return phi_series_dd(k, x, y);
    cd d = x - y;
    if (std::abs(d) >= 0.25) return (phi_k(k, x) - phi_k(k, y)) / d;
    // close arguments away from the origin: odd-derivative expansion about
    // the midpoint (|mid| >= 0.875 here, so the closed derivative forms hold)
    cd mid = 0.5 * (x + y), hh = 0.5 * d, h2 = hh * hh;
    auto deriv = [&](int j) { return k == 1 ? phi1_deriv(j, mid) : phi2_deriv(j, mid); };
    return deriv(1) + h2 * (deriv(3) / 6.0 + h2 * (deriv(5) / 120.0 + h2 * deriv(7) / 5040.0));
}

// Exact integrals over the gap height used by the first-order kernel:
//   F(k, s) = int_0^b (b-z)^k e^{i s z} dz
//   S(k, nu, beta) = int_0^b (b-z)^k e^{i nu z} sin(beta z)/beta dz
//   C(k, nu, beta) = int_0^b (b-z)^k e^{i nu z} cos(beta z) dz
// All are entire in every wavenumber argument.
struct GapIntegrals {
    double b;

    cd F(int k, cd s) const {
        cd w = iu * s * b;
        return k == 0 ? b * phi1(w) : b * b * phi2(w);
    }
    cd S(int k, cd nu, cd beta) const {
        cd x = iu * (nu + beta) * b, y = iu * (nu - beta) * b;
        double bk = (k == 0) ? b * b : b * b * b;
        return bk * phi_dd(k + 1, x, y);
    }
    cd C(int k, cd nu, cd beta) const { return 0.5 * (F(k, nu + beta) + F(k, nu - beta)); }
};

// 4th-order cumulative antiderivative of uniform-grid samples.
void cumulative_integral(const std::vector<cd>& v, double h, std::vector<cd>& out) {
    int M = int(v.size()) - 1;
    out.assign(M + 1, cd(0.0));
    if (M < 3) {
        for (int i = 1; i <= M; ++i) out[i] = out[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
        return;
    }
    out[1] = h / 24.0 * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]);
    for (int i = 2; i <= M - 1; ++i)
        out[i] = out[i - 1] + h / 24.0 * (-v[i - 2] + 13.0 * v[i - 1] + 13.0 * v[i] - v[i + 1]);
    out[M] = out[M - 1] + h / 24.0 * (v[M - 3] - 5.0 * v[M - 2] + 19.0 * v[M - 1] + 9.0 * v[M]);
}

}  // namespace

TfeWorkspace make_tfe_workspace(double b, int n_quad) {
    if (n_quad < 3 || n_quad % 2 == 0)
        throw ConfigError("tfe workspace: quadrature grid must have an odd point count >= 3");
    TfeWorkspace ws;
    ws.b = b;
    ws.n_quad = n_quad;
    double h = b / (n_quad - 1);
    ws.y_nodes.resize(n_quad);
    ws.weights.assign(n_quad, 0.0);
    for (int i = 0; i < n_quad; ++i) ws.y_nodes[i] = h * i;
    ws.y_nodes.back() = b;
    for (int i = 1; i < n_quad - 1; ++i) ws.weights[i] = (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
    ws.weights.front() = ws.weights.back() = h / 3.0;
    return ws;
}

cd kernel_K(int which, double y, cd beta, double h, double z) {
    if (std::abs(beta) < 1e-13)
        throw ResonanceError("kernel_K: vertical wavenumber is resonant (zero)");
    cd ib = iu * beta;
    switch (which) {
        case 1:
            return std::exp(ib * y) / ib;
        case 2:
            return std::exp(ib * h) * (std::exp(ib * y) + std::exp(-ib * y)) / (2.0 * ib);
        case 3: {
            double lo = std::min(y, z), hi = std::max(y, z);
            return std::exp(ib * hi) * (std::exp(ib * lo) + std::exp(-ib * lo)) / (2.0 * ib);
        }
        default:
            throw ConfigError("kernel_K: which must be 1, 2, or 3");
    }
}

TfeField order0(const SlabTraces& tau, const ModeGrid& grid, const VerticalWavenumbers& vw,
                const ProblemConfig& config, int n_quad) {
    TfeWorkspace ws = make_tfe_workspace(config.b, n_quad);
    double omega2 = config.omega * config.omega;

    TfeField f;
    f.order = 0;
    f.N = grid.n_max;
    f.n_quad = n_quad;
    f.b = config.b;
    f.y_grid = ws.y_nodes;
    int total = (2 * f.N + 1) * n_quad;
    for (int j = 0; j < 2; ++j) {
        f.phi[j].assign(total, cd(0.0));
        f.dphi[j].assign(total, cd(0.0));
        f.ddphi[j].assign(total, cd(0.0));
        f.bc_r[j].assign(2 * f.N + 1, cd(0.0));
    }
    f.bc_p.assign(2 * f.N + 1, cd(0.0));
    f.bc_q.assign(2 * f.N + 1, cd(0.0));

    for (int n = -f.N; n <= f.N; ++n) {
        cd t1 = tau.tau(1).at(n), t2 = tau.tau(2).at(n);
        f.bc_r[0][n + f.N] = t1;
        f.bc_r[1][n + f.N] = t2;
        if (t1 == cd(0.0) && t2 == cd(0.0)) continue;
        cd B1 = vw.beta(1, n), B2 = vw.beta(2, n);
        cd Dm = mode_determinant(grid, vw, omega2, n);
        cd e1 = std::exp(iu * B1 * config.b), e2 = std::exp(iu * B2 * config.b);
        for (int iy = 0; iy < n_quad; ++iy) {
            double y = ws.y_nodes[iy];
            cd E1y = std::exp(iu * B1 * y), E2y = std::exp(iu * B2 * y);
            // resonance-safe forms: sin(Bz)/B written through sinc
            cd M11 = e1 * (y * sinc(B1 * y)) + iu * B2 * e1 * E1y / Dm;
            cd dM11 = e1 * std::cos(B1 * y) - B1 * B2 * e1 * E1y / Dm;
            cd M12 = iu * grid.alpha(n) * e2 * E1y / Dm;
            cd dM12 = -grid.alpha(n) * B1 * e2 * E1y / Dm;
            cd M21 = -iu * grid.alpha(n) * e1 * E2y / Dm;
            cd dM21 = grid.alpha(n) * B2 * e1 * E2y / Dm;
            cd M22 = e2 * (y * sinc(B2 * y)) + iu * B1 * e2 * E2y / Dm;
            cd dM22 = e2 * std::cos(B2 * y) - B1 * B2 * e2 * E2y / Dm;
            int id = f.idx(n, iy);
            f.phi[0][id] = M11 * t1 + M12 * t2;
            f.dphi[0][id] = dM11 * t1 + dM12 * t2;
            f.ddphi[0][id] = -B1 * B1 * f.phi[0][id];
            f.phi[1][id] = M21 * t1 + M22 * t2;
            f.dphi[1][id] = dM21 * t1 + dM22 * t2;
            f.ddphi[1][id] = -B2 * B2 * f.phi[1][id];
        }
    }
    return f;
}

std::pair<ModeCoefficients, ModeCoefficients> order0_trace_pair(const SlabTraces& tau,
                                                                const ModeGrid& grid,
                                                                const VerticalWavenumbers& vw,
                                                                const ProblemConfig& config) {
    // nodes carry closed-form values, so the coarsest grid is exact at y = b
    TfeField f = order0(tau, grid, vw, config, 3);
    ModeCoefficients o1("phi1 flat-order trace", config.b, f.N);
    ModeCoefficients o2("phi2 flat-order trace", config.b, f.N);
    for (int n = -f.N; n <= f.N; ++n) {
        o1.set(n, f.trace_b(1, n));
        o2.set(n, f.trace_b(2, n));
    }
    return {o1, o2};
}

Order1RowKernel order1_kernel(int n, int m, const SlabTraces& tau, const ModeGrid& grid,
                              const VerticalWavenumbers& vw, const ProblemConfig& config) {
    Order1RowKernel out{cd(0.0), cd(0.0)};
    cd t1 = tau.tau(1).at(m), t2 = tau.tau(2).at(m);
    if (t1 == cd(0.0) && t2 == cd(0.0)) return out;

    double bb = config.b;
    double omega2 = config.omega * config.omega;
    double an = grid.alpha(n), am = grid.alpha(m);
    cd B1 = vw.beta(1, m), B2 = vw.beta(2, m);
    cd b1n = vw.beta(1, n), b2n = vw.beta(2, n);
    cd Dm = mode_determinant(grid, vw, omega2, m);
    cd Dn = mode_determinant(grid, vw, omega2, n);
    cd e1 = std::exp(iu * B1 * bb), e2 = std::exp(iu * B2 * bb);
    GapIntegrals gi{bb};

    // column-mode kernel values at y = 0 (all entire in B1, B2)
    cd M11_0 = iu * B2 * e1 / Dm, M12_0 = iu * am * e2 / Dm;
    cd M21_0 = -iu * am * e1 / Dm, M22_0 = iu * B1 * e2 / Dm;
    cd dM11_0 = am * am * e1 / Dm, dM12_0 = -am * B1 * e2 / Dm;
    cd dM21_0 = am * B2 * e1 / Dm, dM22_0 = am * am * e2 / Dm;

    // surface-coupling sources at y = 0
    cd P0 = iu * am / bb * (M11_0 * t1 + M12_0 * t2) +
            iu * (an - am) * (dM11_0 * t1 + dM12_0 * t2);
    cd Q0 = -iu * am / bb * (M21_0 * t1 + M22_0 * t2) -
            iu * (an - am) * (dM21_0 * t1 + dM22_0 * t2);

    // outgoing-condition data at y = b
    cd iB1M11_b = iu * e1 * std::sin(B1 * bb) - B1 * B2 * e1 * e1 / Dm;
    cd iB1M12_b = -am * B1 * e1 * e2 / Dm;
    cd iB2M21_b = am * B2 * e1 * e2 / Dm;
    cd iB2M22_b = iu * e2 * std::sin(B2 * bb) - B1 * B2 * e2 * e2 / Dm;
    cd r1k = -((iB1M11_b + 1.0) * t1 + iB1M12_b * t2) / bb;
    cd r2k = -(iB2M21_b * t1 + (iB2M22_b + 1.0) * t2) / bb;

    double dalpha2 = am * am - an * an;

    // int_0^b e^{i nu z} * (first-order interior forcing, component 1)
    auto int_U1 = [&](cd nu) {
        cd acc = 2.0 * B1 * B1 *
                 (t1 * (e1 * gi.S(0, nu, B1) + iu * B2 * e1 / Dm * gi.F(0, nu + B1)) +
                  t2 * (iu * am * e2 / Dm * gi.F(0, nu + B1)));
        acc += dalpha2 * (t1 * (e1 * gi.C(1, nu, B1) - B1 * B2 * e1 / Dm * gi.F(1, nu + B1)) +
                          t2 * (-am * B1 * e2 / Dm * gi.F(1, nu + B1)));
        return acc / bb;
    };
    // same for component 2
    auto int_U2 = [&](cd nu) {
        cd acc = 2.0 * B2 * B2 *
                 (t1 * (-iu * am * e1 / Dm * gi.F(0, nu + B2)) +
                  t2 * (e2 * gi.S(0, nu, B2) + iu * B1 * e2 / Dm * gi.F(0, nu + B2)));
        acc += dalpha2 * (t1 * (am * B2 * e1 / Dm * gi.F(1, nu + B2)) +
                          t2 * (e2 * gi.C(1, nu, B2) - B1 * B2 * e2 / Dm * gi.F(1, nu + B2)));
        return acc / bb;
    };

    cd I1p = int_U1(b1n), I2p = int_U2(b2n);
    cd v1 = Q0 - std::exp(iu * b1n * bb) * r1k + I1p;
    cd v2 = P0 - std::exp(iu * b2n * bb) * r2k + I2p;
    cd phi1_0 = -iu * (b2n * v1 + an * v2) / Dn;
    cd phi2_0 = -iu * (b1n * v2 - an * v1) / Dn;

    if (!vw.beta_resonant(1, n)) {
        cd I1m = int_U1(-b1n);
        cd E = std::exp(iu * b1n * bb);
        out.c1 = E / (iu * b1n) * (Q0 + iu * an * phi2_0) -
                 (E * E + 1.0) / (2.0 * iu * b1n) * r1k + E / (2.0 * iu * b1n) * (I1p + I1m);
    }
    if (!vw.beta_resonant(2, n)) {
        cd I2m = int_U2(-b2n);
        cd E = std::exp(iu * b2n * bb);
        out.c2 = E / (iu * b2n) * (P0 - iu * an * phi1_0) -
                 (E * E + 1.0) / (2.0 * iu * b2n) * r2k + E / (2.0 * iu * b2n) * (I2p + I2m);
    }
    return out;
}

std::pair<ModeCoefficients, ModeCoefficients> order1_trace(const SlabTraces& tau,
                                                           const SurfaceProfile& profile,
                                                           const ModeGrid& grid,
                                                           const VerticalWavenumbers& vw,
                                                           const ProblemConfig& config) {
    int N = grid.n_max;
    ModeCoefficients o1("phi1 first-order trace", config.b, N);
    ModeCoefficients o2("phi2 first-order trace", config.b, N);
    for (int n = -N; n <= N; ++n) {
        cd s1(0.0), s2(0.0);
        int mlo = std::max(-N, n - profile.bandwidth);
        int mhi = std::min(N, n + profile.bandwidth);
        for (int m = mlo; m <= mhi; ++m) {
            cd gh = profile.coeff(n - m);
            if (gh == cd(0.0)) continue;
            Order1RowKernel ker = order1_kernel(n, m, tau, grid, vw, config);
            s1 += ker.c1 * gh;
            s2 += ker.c2 * gh;
        }
        o1.set(n, s1);
        o2.set(n, s2);
    }
    return {o1, o2};
}

std::vector<TfeField> tfe_recursion(const SlabTraces& tau, const SurfaceProfile& profile,
                                    const ModeGrid& grid, const VerticalWavenumbers& vw,
                                    const ProblemConfig& config, int k_max, int n_quad,
                                    int mode_cap) {
    (void)vw;  // superseded by the widened table below
    if (k_max < 0) throw ConfigError("tfe_recursion: k_max must be >= 0");
    profile.validate_against(config);

    int Mg = profile.bandwidth;
    int N_all = std::max(grid.n_max, std::min(mode_cap, grid.n_max + k_max * Mg));

    Wavenumbers wn = derive_wavenumbers(config);
    ModeGrid egrid = mode_grid(config, wn, N_all);
    VerticalWavenumbers evw = vertical_wavenumbers(wn, egrid, /*strict=*/false);

    TfeWorkspace ws = make_tfe_workspace(config.b, n_quad);
    double bb = config.b;
    double h = bb / (n_quad - 1);
    double omega2 = config.omega * config.omega;
    double kap2sq[2] = {wn.kappa1 * wn.kappa1, wn.kappa2 * wn.kappa2};

    // banded coefficient sequences of g^2, (g')^2, g g', g g''
    int MB = 2 * Mg;
    std::vector<cd> cg2(2 * MB + 1, cd(0.0)), cdg2(2 * MB + 1, cd(0.0)),
        cgdg(2 * MB + 1, cd(0.0)), cgddg(2 * MB + 1, cd(0.0));
    for (int q = -Mg; q <= Mg; ++q) {
        cd gq = profile.coeff(q);
        if (gq == cd(0.0)) continue;
        for (int r = -Mg; r <= Mg; ++r) {
            cd gr = profile.coeff(r);
            if (gr == cd(0.0)) continue;
            double aq = egrid.alpha(q), ar = egrid.alpha(r);
            int p = q + r + MB;
            cg2[p] += gq * gr;
            cdg2[p] += -aq * ar * gq * gr;
            cgdg[p] += gq * (iu * ar * gr);
            cgddg[p] += gq * (-ar * ar * gr);
        }
    }

    auto make_field = [&](int k) {
        TfeField f;
        f.order = k;
        f.N = N_all;
        f.n_quad = n_quad;
        f.b = bb;
        f.y_grid = ws.y_nodes;
        int total = (2 * N_all + 1) * n_quad;
        for (int j = 0; j < 2; ++j) {
            f.phi[j].assign(total, cd(0.0));
            f.dphi[j].assign(total, cd(0.0));
            f.ddphi[j].assign(total, cd(0.0));
            f.bc_r[j].assign(2 * N_all + 1, cd(0.0));
        }
        f.bc_p.assign(2 * N_all + 1, cd(0.0));
        f.bc_q.assign(2 * N_all + 1, cd(0.0));
        return f;
    };

    std::vector<TfeField> fields;
    fields.reserve(k_max + 1);

    std::vector<cd> u1(n_quad), u2(n_quad), tmp(n_quad);
    std::vector<cd> ce_p, ce_m, cc, cs;

    for (int k = 0; k <= k_max; ++k) {
        TfeField f = make_field(k);
        int band = std::min(N_all, grid.n_max + k * Mg);
        const TfeField* prev1 = k >= 1 ? &fields[k - 1] : nullptr;
        const TfeField* prev2 = k >= 2 ? &fields[k - 2] : nullptr;

        for (int n = -band; n <= band; ++n) {
            double an = egrid.alpha(n);

            std::fill(u1.begin(), u1.end(), cd(0.0));
            std::fill(u2.begin(), u2.end(), cd(0.0));
            cd pn(0.0), qn(0.0), r1(0.0), r2(0.0);

            if (k == 0) {
                r1 = tau.tau(1).at(n);
                r2 = tau.tau(2).at(n);
            } else {
                for (int m = n - Mg; m <= n + Mg; ++m) {
                    if (!prev1->in_band(m)) continue;
                    cd gh = profile.coeff(n - m);
                    if (gh == cd(0.0)) continue;
                    double am = egrid.alpha(m);
                    double dalpha2 = am * am - an * an;
                    for (int j = 0; j < 2; ++j) {
                        double cphi = 2.0 * (kap2sq[j] - am * am);
                        std::vector<cd>& u = (j == 0) ? u1 : u2;
                        int base = prev1->idx(m, 0);
                        for (int iy = 0; iy < n_quad; ++iy) {
                            double bz = bb - ws.y_nodes[iy];
                            u[iy] += gh / bb *
                                     (cphi * prev1->phi[j][base + iy] +
                                      dalpha2 * bz * prev1->dphi[j][base + iy]);
                        }
                    }
                    // surface-coupling sources use the lower boundary values
                    int b0 = prev1->idx(m, 0);
                    pn += gh * (iu * am / bb * prev1->phi[0][b0] +
                                iu * (an - am) * prev1->dphi[0][b0]);
                    qn -= gh * (iu * am / bb * prev1->phi[1][b0] +
                                iu * (an - am) * prev1->dphi[1][b0]);
                    // outgoing-condition data uses the upper boundary values
                    int bl = prev1->idx(m, n_quad - 1);
                    cd rad1 = iu * evw.beta(1, m) * prev1->phi[0][bl];
                    cd rad2 = iu * evw.beta(2, m) * prev1->phi[1][bl];
                    if (k == 1) {
                        rad1 += tau.tau(1).at(m);
                        rad2 += tau.tau(2).at(m);
                    }
                    r1 -= gh / bb * rad1;
                    r2 -= gh / bb * rad2;
                }
            }
            if (prev2) {
                for (int m = n - MB; m <= n + MB; ++m) {
                    if (!prev2->in_band(m)) continue;
                    int p = n - m + MB;
                    cd w2 = cg2[p], wd2 = cdg2[p], wgd = cgdg[p], wgdd = cgddg[p];
                    if (w2 == cd(0.0) && wd2 == cd(0.0) && wgd == cd(0.0) && wgdd == cd(0.0))
                        continue;
                    double am = egrid.alpha(m);
                    for (int j = 0; j < 2; ++j) {
                        cd cphi = w2 * (kap2sq[j] - am * am);
                        cd cdphi_lin = 2.0 * iu * am * wgd - 2.0 * wd2 + wgdd;
                        std::vector<cd>& u = (j == 0) ? u1 : u2;
                        int base = prev2->idx(m, 0);
                        for (int iy = 0; iy < n_quad; ++iy) {
                            double bz = bb - ws.y_nodes[iy];
                            u[iy] -= (cphi * prev2->phi[j][base + iy] +
                                      wd2 * bz * bz * prev2->ddphi[j][base + iy] +
                                      cdphi_lin * bz * prev2->dphi[j][base + iy]) /
                                     (bb * bb);
                        }
                    }
                }
            }

            f.bc_p[n + N_all] = pn;
            f.bc_q[n + N_all] = qn;
            f.bc_r[0][n + N_all] = r1;
            f.bc_r[1][n + N_all] = r2;

            cd b1n = evw.beta(1, n), b2n = evw.beta(2, n);
            cd Dn = mode_determinant(egrid, evw, omega2, n);

            // running integrals of e^{i beta z} u_j(z) for the coupling solve
            for (int iy = 0; iy < n_quad; ++iy)
                tmp[iy] = std::exp(iu * b1n * ws.y_nodes[iy]) * u1[iy];
            cumulative_integral(tmp, h, ce_p);
            cd int1 = ce_p.back();
            std::vector<cd> ce1_p = ce_p;
            for (int iy = 0; iy < n_quad; ++iy)
                tmp[iy] = std::exp(iu * b2n * ws.y_nodes[iy]) * u2[iy];
            cumulative_integral(tmp, h, ce_p);
            cd int2 = ce_p.back();
            std::vector<cd> ce2_p = ce_p;

            cd v1 = qn - std::exp(iu * b1n * bb) * r1 + int1;
            cd v2 = pn - std::exp(iu * b2n * bb) * r2 + int2;
            cd phi1_0 = -iu * (b2n * v1 + an * v2) / Dn;
            cd phi2_0 = -iu * (b1n * v2 - an * v1) / Dn;
            cd qt1 = qn + iu * an * phi2_0;
            cd qt2 = pn - iu * an * phi1_0;

            for (int j = 0; j < 2; ++j) {
                cd beta = (j == 0) ? b1n : b2n;
                cd rr = (j == 0) ? r1 : r2;
                cd qt = (j == 0) ? qt1 : qt2;
                cd ph0 = (j == 0) ? phi1_0 : phi2_0;
                const std::vector<cd>& u = (j == 0) ? u1 : u2;
                const std::vector<cd>& cep = (j == 0) ? ce1_p : ce2_p;
                int base = f.idx(n, 0);

                if (std::abs(beta) * bb >= 0.5) {
                    // two-point kernel form, bounded for outgoing/evanescent modes
                    for (int iy = 0; iy < n_quad; ++iy)
                        tmp[iy] = std::exp(-iu * beta * ws.y_nodes[iy]) * u[iy];
                    cumulative_integral(tmp, h, ce_m);
                    cd eb = std::exp(iu * beta * bb);
                    cd tail_all = cep.back();
                    for (int iy = 0; iy < n_quad; ++iy) {
                        double y = ws.y_nodes[iy];
                        cd E = std::exp(iu * beta * y), Em = std::exp(-iu * beta * y);
                        cd pair = cep[iy] + ce_m[iy];
                        cd tail = tail_all - cep[iy];
                        cd ph = qt * E / (iu * beta) - rr * eb * (E + Em) / (2.0 * iu * beta) +
                                E * pair / (2.0 * iu * beta) + (E + Em) * tail / (2.0 * iu * beta);
                        cd dph = qt * E - rr * eb * (E - Em) / 2.0 + E * pair / 2.0 +
                                 (E - Em) * tail / 2.0;
                        f.phi[j][base + iy] = ph;
                        f.dphi[j][base + iy] = dph;
                        f.ddphi[j][base + iy] = u[iy] - beta * beta * ph;
                    }
                } else {
                    // initial-value form, entire in beta (resonance-safe)
                    for (int iy = 0; iy < n_quad; ++iy)
                        tmp[iy] = std::cos(beta * ws.y_nodes[iy]) * u[iy];
                    cumulative_integral(tmp, h, cc);
                    for (int iy = 0; iy < n_quad; ++iy)
                        tmp[iy] = ws.y_nodes[iy] * sinc(beta * ws.y_nodes[iy]) * u[iy];
                    cumulative_integral(tmp, h, cs);
                    cd beta2 = beta * beta;
                    for (int iy = 0; iy < n_quad; ++iy) {
                        double y = ws.y_nodes[iy];
                        cd cosv = std::cos(beta * y);
                        cd ysinc = y * sinc(beta * y);
                        cd ph = ph0 * cosv + qt * ysinc + ysinc * cc[iy] - cosv * cs[iy];
                        cd dph = -beta2 * ysinc * ph0 + qt * cosv + cosv * cc[iy] +
                                 beta2 * ysinc * cs[iy];
                        f.phi[j][base + iy] = ph;
                        f.dphi[j][base + iy] = dph;
                        f.ddphi[j][base + iy] = u[iy] - beta2 * ph;
                    }
                }
            }
        }
        fields.push_back(std::move(f));
    }
    return fields;
}

std::array<double, 4> ChangeOfVariablesMap::at(double x, double y) const {
    double fv = profile->f_at(x);
    double df = profile->epsilon * profile->dg_at(x);
    double ddf = profile->epsilon * profile->ddg_at(x);
    double c1 = (b - fv) * (b - fv);
    double c2 = df * (b - y) * df * (b - y) + b * b;
    double c3 = -2.0 * df * (b - y) * (b - fv);
    double c4 = -(b - y) * (ddf * (b - fv) + 2.0 * df * df);
    return {c1, c2, c3, c4};
}

ChangeOfVariablesMap change_of_variables_map(const SurfaceProfile& profile,
                                             const ProblemConfig& config) {
    profile.validate_against(config);
    return ChangeOfVariablesMap{&profile, config.b};
}

}  // namespace esurf
