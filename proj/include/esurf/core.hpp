#pragma once

#include "esurf/common.hpp"

#include <vector>

namespace esurf {

// Geometry: rigid surface y = f(x) = eps*g(x), gap 0 < y < b (transformed),
// elastic slab b < y < a with density rho1, free space above with rho0.
struct ProblemConfig {
    double lambda_lame = 2.0;
    double mu = 1.0;
    double rho0 = 1.0;
    double rho1 = 1.0;
    double omega = 2.0 * pi;
    double period = 3.1;
    double a = 2.0;
    double b = 0.05;

    // Throws ConfigError on non-finite or invariant-violating values.
    void validate() const;
};

struct Wavenumbers {
    double kappa1 = 0.0;  // free-space compressional
    double kappa2 = 0.0;  // free-space shear
    double eta1 = 0.0;    // slab compressional
    double eta2 = 0.0;    // slab shear
    double wavelen1 = 0.0;
    double wavelen2 = 0.0;
};

struct ModeGrid {
    int N1 = 0;  // floor(eta1 * period / 2pi)
    int N2 = 0;
    int n_max = 0;  // alphas cover n in [-n_max, n_max]
    double period = 0.0;

    double alpha(int n) const { return 2.0 * pi * n / period; }
};

// Profile shape g, stored canonically as Fourier coefficients on the period
// lattice; samples are a derived view. f = epsilon * g.
struct SurfaceProfile {
    double epsilon = 0.0;
    double period = 0.0;
    int bandwidth = 0;            // M: coefficients cover m in [-M, M]
    std::vector<cd> g_coeffs;     // size 2M+1, index m+M
    std::vector<double> samples;  // g on the uniform x-grid (derived view)

    cd coeff(int m) const {
        return (m < -bandwidth || m > bandwidth) ? cd(0.0) : g_coeffs[m + bandwidth];
    }

    double g_at(double x) const;
    double dg_at(double x) const;   // spectral derivative
    double ddg_at(double x) const;
    double f_at(double x) const { return epsilon * g_at(x); }
    double max_abs_g() const;

    // Period must match the config and the surface must stay below the slab:
    // epsilon * max|g| < b. Throws ConfigError otherwise.
    void validate_against(const ProblemConfig& config) const;
};

enum class ProfileKind { example1, example2 };

Wavenumbers derive_wavenumbers(const ProblemConfig& config);

// n_max < 0 means max(N1, N2).
ModeGrid mode_grid(const ProblemConfig& config, const Wavenumbers& wn, int n_max = -1);

// Measurement abscissae x_i = -period/2 + i*period/n, i = 1..n.
std::vector<double> sample_grid(double period, int n);

// Plain uniform-grid DFT pair on the x-grid above. analyze approximates
// (1/period) * integral of u(x) e^{-i alpha_n x}; synthesize carries no
// normalization. Coefficient vectors are indexed n+N, size 2N+1.
std::vector<cd> dft_analyze(const std::vector<cd>& samples, double period, int N);
std::vector<cd> dft_synthesize(const std::vector<cd>& coeffs, double period, int n_samples);

// The two benchmark profiles. example1: three sines on period 3.1, band 3.
// example2: piecewise cosine bumps on period 2, C^1 but not C^2; its exact
// series is truncated at `bandwidth` (default 60 when negative).
SurfaceProfile builtin_profile(ProfileKind kind, int n_samples = 500, int bandwidth = -1);

// Exact piecewise value of the example2 shape (no truncation); used as the
// reference when measuring reconstruction error.
double example2_exact(double x);

// coefficients -> samples -> coefficients; aliasing (fewer than 2(2M+1)
// samples) throws ConfigError.
SurfaceProfile profile_roundtrip(const SurfaceProfile& profile);

}  // namespace esurf
