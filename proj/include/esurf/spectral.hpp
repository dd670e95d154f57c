#pragma once

#include "esurf/common.hpp"
#include "esurf/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace esurf {

// Fourier coefficients of a periodic trace at a fixed height.
struct ModeCoefficients {
    std::string label;
    double height = 0.0;
    int N = 0;  // index range n in [-N, N]
    std::vector<cd> values;

    ModeCoefficients() = default;
    ModeCoefficients(std::string lab, double h, int n)
        : label(std::move(lab)), height(h), N(n), values(2 * n + 1, cd(0.0)) {}

    cd at(int n) const { return (n < -N || n > N) ? cd(0.0) : values[n + N]; }
    void set(int n, cd v) { values[n + N] = v; }
};

// Per-mode vertical wavenumbers on the principal branch. Entries within the
// guard tolerance of zero are recorded as resonant; require() throws so the
// failure happens only where such a value would actually be inverted.
struct VerticalWavenumbers {
    int N = 0;
    double tol1 = 0.0, tol2 = 0.0;  // guard thresholds per j
    std::vector<cd> beta1, beta2;    // sqrt(kappa_j^2 - alpha_n^2)
    std::vector<cd> gamma1, gamma2;  // sqrt(eta_j^2 - alpha_n^2)

    cd beta(int j, int n) const { return (j == 1 ? beta1 : beta2)[n + N]; }
    cd gamma(int j, int n) const { return (j == 1 ? gamma1 : gamma2)[n + N]; }
    bool beta_resonant(int j, int n) const { return std::abs(beta(j, n)) < (j == 1 ? tol1 : tol2); }
    bool gamma_resonant(int j, int n) const { return std::abs(gamma(j, n)) < (j == 1 ? tol1 : tol2); }
    cd require_beta(int j, int n) const;    // throws ResonanceError when resonant
    cd require_gamma(int j, int n) const;
};

// Boundary sources on Gamma_a for normal compressional incidence.
struct TbcSources {
    cd g1;       // scalar-potential source, -2 e^{-i kappa1 a}
    cd g2;       // zero at normal compressional incidence
    cd h2;       // displacement source is (0, h2), h2 = 2 i kappa1 (lambda+2mu) e^{-i kappa1 a}
    cd phi1_inc_a;  // incident potential trace at y = a: -(i/kappa1) e^{-i kappa1 a}

    cd g(int j) const { return j == 1 ? g1 : g2; }
    // sources live in mode n = 0 only
    cd g_mode(int j, int n) const { return n == 0 ? g(j) : cd(0.0); }
};

// strict raises ResonanceError as soon as any entry falls inside the guard
// band; pass strict = false for geometries that sit exactly on a resonance,
// where only the modes actually inverted may fail.
VerticalWavenumbers vertical_wavenumbers(const Wavenumbers& wn, const ModeGrid& grid,
                                         bool strict = true);

ModeCoefficients analyze(const std::vector<cd>& samples, double period, int N, double height,
                         const std::string& label = "");
std::vector<cd> synthesize(const ModeCoefficients& coeffs, double period, int n_samples);

// Scalar Dirichlet-to-Neumann on Gamma_a: multiplies mode n by i beta_jn.
ModeCoefficients dtn_scalar(const ModeCoefficients& coeffs, int j, const VerticalWavenumbers& vw);

// Elastic Dirichlet-to-Neumann on Gamma_a, per-mode 2x2 matrix in
// (u1, u2); denominator alpha_n^2 + beta_1n beta_2n guarded.
std::pair<ModeCoefficients, ModeCoefficients> dtn_elastic(const ModeCoefficients& u1,
                                                          const ModeCoefficients& u2,
                                                          const ProblemConfig& config,
                                                          const ModeGrid& grid,
                                                          const VerticalWavenumbers& vw);

TbcSources tbc_sources(const ProblemConfig& config, const Wavenumbers& wn);

// alpha_n^2 + beta_1n beta_2n with a SingularModeError guard at
// 1e-10 * omega^2.
cd mode_determinant(const ModeGrid& grid, const VerticalWavenumbers& vw, double omega2, int n);

}  // namespace esurf
