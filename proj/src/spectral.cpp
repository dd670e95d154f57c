#include "esurf/spectral.hpp"

#include <cmath>

namespace esurf {

cd VerticalWavenumbers::require_beta(int j, int n) const {
    if (beta_resonant(j, n))
        throw ResonanceError("beta_" + std::to_string(j) + "," + std::to_string(n) +
                             " is resonant (Wood anomaly)");
    return beta(j, n);
}

cd VerticalWavenumbers::require_gamma(int j, int n) const {
    if (gamma_resonant(j, n))
        throw ResonanceError("gamma_" + std::to_string(j) + "," + std::to_string(n) +
                             " is resonant (Wood anomaly)");
    return gamma(j, n);
}

VerticalWavenumbers vertical_wavenumbers(const Wavenumbers& wn, const ModeGrid& grid,
                                         bool strict) {
    VerticalWavenumbers vw;
    vw.N = grid.n_max;
    vw.tol1 = 1e-8 * wn.kappa1;
    vw.tol2 = 1e-8 * wn.kappa2;
    int size = 2 * grid.n_max + 1;
    vw.beta1.resize(size);
    vw.beta2.resize(size);
    vw.gamma1.resize(size);
    vw.gamma2.resize(size);
    for (int n = -grid.n_max; n <= grid.n_max; ++n) {
        double alpha = grid.alpha(n);
        vw.beta1[n + vw.N] = vertical_root(wn.kappa1, alpha);
        vw.beta2[n + vw.N] = vertical_root(wn.kappa2, alpha);
        vw.gamma1[n + vw.N] = vertical_root(wn.eta1, alpha);
        vw.gamma2[n + vw.N] = vertical_root(wn.eta2, alpha);
        if (strict) {
            for (int j : {1, 2}) {
                vw.require_beta(j, n);
                vw.require_gamma(j, n);
            }
        }
    }
    return vw;
}

ModeCoefficients analyze(const std::vector<cd>& samples, double period, int N, double height,
                         const std::string& label) {
    ModeCoefficients out(label, height, N);
    out.values = dft_analyze(samples, period, N);
    return out;
}

std::vector<cd> synthesize(const ModeCoefficients& coeffs, double period, int n_samples) {
    return dft_synthesize(coeffs.values, period, n_samples);
}

ModeCoefficients dtn_scalar(const ModeCoefficients& coeffs, int j, const VerticalWavenumbers& vw) {
    ModeCoefficients out(coeffs.label, coeffs.height, coeffs.N);
    for (int n = -coeffs.N; n <= coeffs.N; ++n)
        out.set(n, cd(0.0, 1.0) * vw.beta(j, n) * coeffs.at(n));
    return out;
}

cd mode_determinant(const ModeGrid& grid, const VerticalWavenumbers& vw, double omega2, int n) {
    double alpha = grid.alpha(n);
    cd det = alpha * alpha + vw.beta(1, n) * vw.beta(2, n);
    if (std::abs(det) < 1e-10 * omega2)
        throw SingularModeError("mode determinant vanishes at n = " + std::to_string(n));
    return det;
}

std::pair<ModeCoefficients, ModeCoefficients> dtn_elastic(const ModeCoefficients& u1,
                                                          const ModeCoefficients& u2,
                                                          const ProblemConfig& config,
                                                          const ModeGrid& grid,
                                                          const VerticalWavenumbers& vw) {
    double w2 = config.omega * config.omega;
    double rw2 = config.rho0 * w2;
    ModeCoefficients out1(u1.label, u1.height, u1.N);
    ModeCoefficients out2(u2.label, u2.height, u2.N);
    const cd I(0.0, 1.0);
    for (int n = -u1.N; n <= u1.N; ++n) {
        double alpha = grid.alpha(n);
        cd det = mode_determinant(grid, vw, w2, n);
        // entries are pinned by the annihilation identities: applied to the
        // trace of an outgoing wave of either type, the operator returns
        // exactly mu d_y u1 and (lambda+2mu) d_y u2 + (lambda+mu) d_x u1
        cd t11 = rw2 * vw.beta(1, n) / det;
        cd t12 = config.mu * alpha - rw2 * alpha / det;
        cd t21 = -t12;
        cd t22 = rw2 * vw.beta(2, n) / det;
        out1.set(n, I * (t11 * u1.at(n) + t12 * u2.at(n)));
        out2.set(n, I * (t21 * u1.at(n) + t22 * u2.at(n)));
    }
    return {out1, out2};
}

TbcSources tbc_sources(const ProblemConfig& config, const Wavenumbers& wn) {
    TbcSources src;
    const cd I(0.0, 1.0);
    cd phase = std::exp(-I * (wn.kappa1 * config.a));
    src.g1 = -2.0 * phase;
    src.g2 = 0.0;
    src.h2 = 2.0 * I * wn.kappa1 * (config.lambda_lame + 2.0 * config.mu) * phase;
    src.phi1_inc_a = -(I / wn.kappa1) * phase;
    return src;
}

}  // namespace esurf
