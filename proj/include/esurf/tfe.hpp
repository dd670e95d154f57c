#pragma once

#include "esurf/common.hpp"
#include "esurf/core.hpp"
#include "esurf/ftn.hpp"
#include "esurf/spectral.hpp"

#include <array>
#include <utility>
#include <vector>

namespace esurf {

// One order of the boundary perturbation expansion for the gap potentials:
// sampled y-profiles of phi_jn^(k), their y-derivatives, and second
// derivatives on a uniform grid over [0, b].  Modes are stored for
// |n| <= N; values outside that band read as zero.
struct TfeField {
    int order = 0;
    int N = 0;
    int n_quad = 0;
    double b = 0.0;
    std::vector<double> y_grid;

    // layout per j in {1,2}: index (n + N) * n_quad + iy
    std::array<std::vector<cd>, 2> phi;
    std::array<std::vector<cd>, 2> dphi;
    std::array<std::vector<cd>, 2> ddphi;

    // boundary data the order was solved with, for residual checks:
    // r[j-1][n+N] is the outgoing-condition right side at y = b, and
    // p/q are the surface-coupling sources at y = 0.
    std::array<std::vector<cd>, 2> bc_r;
    std::vector<cd> bc_p, bc_q;

    int idx(int n, int iy) const { return (n + N) * n_quad + iy; }
    bool in_band(int n) const { return n >= -N && n <= N; }
    cd phi_at(int j, int n, int iy) const {
        return in_band(n) ? phi[j - 1][idx(n, iy)] : cd(0.0);
    }
    cd dphi_at(int j, int n, int iy) const {
        return in_band(n) ? dphi[j - 1][idx(n, iy)] : cd(0.0);
    }
    cd ddphi_at(int j, int n, int iy) const {
        return in_band(n) ? ddphi[j - 1][idx(n, iy)] : cd(0.0);
    }
    // trace at the top of the gap, y = b
    cd trace_b(int j, int n) const { return phi_at(j, n, n_quad - 1); }
};

// Shared quadrature data for the y-grid: nodes of the uniform grid and
// composite Simpson weights (weights sum to b).
struct TfeWorkspace {
    double b = 0.0;
    int n_quad = 0;
    std::vector<double> y_nodes;
    std::vector<double> weights;
};

TfeWorkspace make_tfe_workspace(double b, int n_quad);

// Two-point kernels for u'' + beta^2 u = v on (0, h) with u'(0) = r and
// u'(h) - i beta u(h) = s, giving u = K1 r - K2 s + int K3 v.
// which selects K1 (z ignored), K2 (z ignored), or K3.
cd kernel_K(int which, double y, cd beta, double h, double z = 0.0);

// Flat-order term of the expansion: closed-form solve driven by tau alone.
TfeField order0(const SlabTraces& tau, const ModeGrid& grid, const VerticalWavenumbers& vw,
                const ProblemConfig& config, int n_quad = 257);

// Flat-order traces at y = b for both potentials, as coefficient pairs on
// the grid band.
std::pair<ModeCoefficients, ModeCoefficients> order0_trace_pair(const SlabTraces& tau,
                                                                const ModeGrid& grid,
                                                                const VerticalWavenumbers& vw,
                                                                const ProblemConfig& config);

// Per-(n,m) coefficient of g_{n-m} in the first-order trace phi_jn^(1)(b).
// c1/c2 are the j=1 and j=2 entries.  Rows whose vertical wavenumber
// beta_jn is resonant yield zero in that component (the closed form
// divides by beta_jn; callers exclude such rows).
struct Order1RowKernel {
    cd c1, c2;
};
Order1RowKernel order1_kernel(int n, int m, const SlabTraces& tau, const ModeGrid& grid,
                              const VerticalWavenumbers& vw, const ProblemConfig& config);

// First-order traces phi_jn^(1)(b) for all |n| <= grid.n_max, assembled by
// convolving the row kernels with the profile's coefficients.
std::pair<ModeCoefficients, ModeCoefficients> order1_trace(const SlabTraces& tau,
                                                           const SurfaceProfile& profile,
                                                           const ModeGrid& grid,
                                                           const VerticalWavenumbers& vw,
                                                           const ProblemConfig& config);

// Full recursion: orders k = 0..k_max of the expansion for the given
// profile.  The mode band grows by the profile bandwidth per order and is
// capped at mode_cap.  Fields for resonant modes are computed through the
// resonance-safe initial-value form and stay finite.
std::vector<TfeField> tfe_recursion(const SlabTraces& tau, const SurfaceProfile& profile,
                                    const ModeGrid& grid, const VerticalWavenumbers& vw,
                                    const ProblemConfig& config, int k_max, int n_quad = 257,
                                    int mode_cap = 96);

// Coefficients of the flattening change of variables on the gap:
// c1 = (b-f)^2, c2 = (f'(b-y))^2 + b^2, c3 = -2 f'(b-y)(b-f),
// c4 = -(b-y)(f''(b-f) + 2 f'^2), evaluated pointwise in original (x, y).
struct ChangeOfVariablesMap {
    const SurfaceProfile* profile = nullptr;
    double b = 0.0;
    std::array<double, 4> at(double x, double y) const;
};
ChangeOfVariablesMap change_of_variables_map(const SurfaceProfile& profile,
                                             const ProblemConfig& config);

}  // namespace esurf
