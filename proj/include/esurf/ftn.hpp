#pragma once

#include "esurf/common.hpp"
#include "esurf/core.hpp"
#include "esurf/spectral.hpp"

#include <vector>

namespace esurf {

// Slab-transferred quantities for the final value problem in the slab:
// renormalized potentials, impedance-shifted wavenumbers, and sources.
struct HatQuantities {
    ModeCoefficients phi_hat1, phi_hat2;  // (kappa_j^2/eta_j^2) phi_jn
    ModeCoefficients g_hat1, g_hat2;      // sources with the cross-potential shift
};

// Near-field traces at the slab bottom. Modes outside kept_modes carry no
// recoverable information (evanescent in the slab, or a resonant gamma) and
// are stored as exact zeros.
struct SlabTraces {
    ModeCoefficients psi_b1, psi_b2;    // psi_jn(b)
    ModeCoefficients dpsi_b1, dpsi_b2;  // d/dy psi_jn(b)
    ModeCoefficients tau1, tau2;        // reduced-problem data on Gamma_b
    std::vector<int> kept1, kept2;

    const ModeCoefficients& psi_b(int j) const { return j == 1 ? psi_b1 : psi_b2; }
    const ModeCoefficients& dpsi_b(int j) const { return j == 1 ? dpsi_b1 : dpsi_b2; }
    const ModeCoefficients& tau(int j) const { return j == 1 ? tau1 : tau2; }
    const std::vector<int>& kept(int j) const { return j == 1 ? kept1 : kept2; }
    bool is_kept(int j, int n) const;
};

// (eta_j^2/kappa_j^2) beta_jn
cd beta_hat(const Wavenumbers& wn, const VerticalWavenumbers& vw, int j, int n);

HatQuantities hat_quantities(const ModeCoefficients& phi1, const ModeCoefficients& phi2,
                             const TbcSources& src, const Wavenumbers& wn, const ModeGrid& grid);

// Unique solution of psi'' + gamma^2 psi = 0 on (b, a) with final conditions
// psi(a) = phi_hat, psi'(a) - i beta_hat psi(a) = g_hat, evaluated at y.
cd slab_mode_solution(cd phi_hat, cd g_hat, cd beta_hat, cd gamma, double a, double y);
// y-derivative of the same solution.
cd slab_mode_derivative(cd phi_hat, cd g_hat, cd beta_hat, cd gamma, double a, double y);

// Evaluates the slab solution and its derivative at y = b for every kept
// mode; other modes are zeroed and recorded.
SlabTraces traces_at_bottom(const ModeCoefficients& phi1, const ModeCoefficients& phi2,
                            const TbcSources& src, const ProblemConfig& config,
                            const Wavenumbers& wn, const ModeGrid& grid,
                            const VerticalWavenumbers& vw);

// Fills tau from the bottom traces:
// tau_1n = psi'_1n(b) - i beta_hat_1n psi_1n(b) + i alpha_n ((eta2^2-kappa2^2)/kappa2^2) psi_2n(b)
// tau_2n = psi'_2n(b) - i beta_hat_2n psi_2n(b) - i alpha_n ((eta1^2-kappa1^2)/kappa1^2) psi_1n(b)
SlabTraces tau_from_traces(SlabTraces traces, const Wavenumbers& wn, const ModeGrid& grid,
                           const VerticalWavenumbers& vw);

}  // namespace esurf
