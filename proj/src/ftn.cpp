#include "esurf/ftn.hpp"

#include <algorithm>
#include <cmath>

namespace esurf {

bool SlabTraces::is_kept(int j, int n) const {
    const auto& k = kept(j);
    return std::binary_search(k.begin(), k.end(), n);
}

cd beta_hat(const Wavenumbers& wn, const VerticalWavenumbers& vw, int j, int n) {
    double k = j == 1 ? wn.kappa1 : wn.kappa2;
    double e = j == 1 ? wn.eta1 : wn.eta2;
    return (e * e) / (k * k) * vw.beta(j, n);
}

HatQuantities hat_quantities(const ModeCoefficients& phi1, const ModeCoefficients& phi2,
                             const TbcSources& src, const Wavenumbers& wn, const ModeGrid& grid) {
    int N = phi1.N;
    HatQuantities hq{ModeCoefficients("phi_hat1", phi1.height, N),
                     ModeCoefficients("phi_hat2", phi1.height, N),
                     ModeCoefficients("g_hat1", phi1.height, N),
                     ModeCoefficients("g_hat2", phi1.height, N)};
    double k1 = wn.kappa1 * wn.kappa1, k2 = wn.kappa2 * wn.kappa2;
    double e1 = wn.eta1 * wn.eta1, e2 = wn.eta2 * wn.eta2;
    const cd I(0.0, 1.0);
    for (int n = -N; n <= N; ++n) {
        double alpha = grid.alpha(n);
        hq.phi_hat1.set(n, (k1 / e1) * phi1.at(n));
        hq.phi_hat2.set(n, (k2 / e2) * phi2.at(n));
        hq.g_hat1.set(n, src.g_mode(1, n) - I * alpha * ((e2 - k2) / e2) * phi2.at(n));
        hq.g_hat2.set(n, src.g_mode(2, n) + I * alpha * ((e1 - k1) / e1) * phi1.at(n));
    }
    return hq;
}

namespace {

// coefficients of the down/up going parts referenced at y = a
struct SlabBrackets {
    cd down;  // multiplies e^{-i gamma (a-y)}
    cd up;    // multiplies e^{+i gamma (a-y)}
};

SlabBrackets slab_brackets(cd phi_hat, cd g_hat, cd beta_hat, cd gamma) {
    if (std::abs(gamma) < 1e-13)
        throw ResonanceError("slab mode solution needs a nonzero gamma");
    const cd I(0.0, 1.0);
    cd inv = 1.0 / (2.0 * gamma);
    return {inv * ((gamma + beta_hat) * phi_hat - I * g_hat),
            inv * ((gamma - beta_hat) * phi_hat + I * g_hat)};
}

}  // namespace

cd slab_mode_solution(cd phi_hat, cd g_hat, cd beta_hat, cd gamma, double a, double y) {
    auto br = slab_brackets(phi_hat, g_hat, beta_hat, gamma);
    const cd I(0.0, 1.0);
    return br.down * std::exp(-I * gamma * (a - y)) + br.up * std::exp(I * gamma * (a - y));
}

cd slab_mode_derivative(cd phi_hat, cd g_hat, cd beta_hat, cd gamma, double a, double y) {
    auto br = slab_brackets(phi_hat, g_hat, beta_hat, gamma);
    const cd I(0.0, 1.0);
    return I * gamma * br.down * std::exp(-I * gamma * (a - y)) -
           I * gamma * br.up * std::exp(I * gamma * (a - y));
}

SlabTraces traces_at_bottom(const ModeCoefficients& phi1, const ModeCoefficients& phi2,
                            const TbcSources& src, const ProblemConfig& config,
                            const Wavenumbers& wn, const ModeGrid& grid,
                            const VerticalWavenumbers& vw) {
    int N = phi1.N;
    SlabTraces tr{ModeCoefficients("psi_b1", config.b, N),
                  ModeCoefficients("psi_b2", config.b, N),
                  ModeCoefficients("dpsi_b1", config.b, N),
                  ModeCoefficients("dpsi_b2", config.b, N),
                  ModeCoefficients("tau1", config.b, N),
                  ModeCoefficients("tau2", config.b, N),
                  {},
                  {}};
    auto hq = hat_quantities(phi1, phi2, src, wn, grid);
    for (int j : {1, 2}) {
        double eta = j == 1 ? wn.eta1 : wn.eta2;
        const ModeCoefficients& ph = j == 1 ? hq.phi_hat1 : hq.phi_hat2;
        const ModeCoefficients& gh = j == 1 ? hq.g_hat1 : hq.g_hat2;
        for (int n = -N; n <= N; ++n) {
            // conversion is reliable only for modes propagating in the slab;
            // a resonant gamma carries no recoverable trace either
            if (std::abs(grid.alpha(n)) >= eta || vw.gamma_resonant(j, n)) continue;
            cd bh = beta_hat(wn, vw, j, n);
            cd g = vw.gamma(j, n);
            cd v = slab_mode_solution(ph.at(n), gh.at(n), bh, g, config.a, config.b);
            cd dv = slab_mode_derivative(ph.at(n), gh.at(n), bh, g, config.a, config.b);
            if (j == 1) {
                tr.psi_b1.set(n, v);
                tr.dpsi_b1.set(n, dv);
                tr.kept1.push_back(n);
            } else {
                tr.psi_b2.set(n, v);
                tr.dpsi_b2.set(n, dv);
                tr.kept2.push_back(n);
            }
        }
    }
    return tr;
}

SlabTraces tau_from_traces(SlabTraces traces, const Wavenumbers& wn, const ModeGrid& grid,
                           const VerticalWavenumbers& vw) {
    int N = traces.psi_b1.N;
    double k1 = wn.kappa1 * wn.kappa1, k2 = wn.kappa2 * wn.kappa2;
    double e1 = wn.eta1 * wn.eta1, e2 = wn.eta2 * wn.eta2;
    const cd I(0.0, 1.0);
    for (int n = -N; n <= N; ++n) {
        double alpha = grid.alpha(n);
        if (traces.is_kept(1, n)) {
            cd t = traces.dpsi_b1.at(n) - I * beta_hat(wn, vw, 1, n) * traces.psi_b1.at(n) +
                   I * alpha * ((e2 - k2) / k2) * traces.psi_b2.at(n);
            traces.tau1.set(n, t);
        }
        if (traces.is_kept(2, n)) {
            cd t = traces.dpsi_b2.at(n) - I * beta_hat(wn, vw, 2, n) * traces.psi_b2.at(n) -
                   I * alpha * ((e1 - k1) / k1) * traces.psi_b1.at(n);
            traces.tau2.set(n, t);
        }
    }
    return traces;
}

}  // namespace esurf
