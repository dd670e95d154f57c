#include "esurf/decomposition.hpp"

namespace esurf {

std::pair<ModeCoefficients, ModeCoefficients> potentials_from_displacement(
    const FarFieldRecord& rec, const ProblemConfig& config, const ModeGrid& grid,
    const VerticalWavenumbers& vw, const TbcSources& src, int N) {
    ModeCoefficients u1n = analyze(rec.u1, config.period, N, config.a, "u1");
    ModeCoefficients u2n = analyze(rec.u2, config.period, N, config.a, "u2");
    ModeCoefficients phi1("phi1", config.a, N);
    ModeCoefficients phi2("phi2", config.a, N);
    double w2 = config.omega * config.omega;
    const cd I(0.0, 1.0);
    for (int n = -N; n <= N; ++n) {
        cd p1 = u1n.at(n) - src.g_mode(2, n);
        cd p2 = u2n.at(n) - src.g_mode(1, n);
        double alpha = grid.alpha(n);
        cd det = mode_determinant(grid, vw, w2, n);
        phi1.set(n, -I * (alpha * p1 + vw.beta(2, n) * p2) / det);
        phi2.set(n, I * (alpha * p2 - vw.beta(1, n) * p1) / det);
    }
    return {phi1, phi2};
}

std::pair<ModeCoefficients, ModeCoefficients> displacement_modes_from_potentials(
    const ModeCoefficients& phi1, const ModeCoefficients& phi2, const ModeGrid& grid,
    const VerticalWavenumbers& vw, const TbcSources& src) {
    int N = phi1.N;
    ModeCoefficients u1n("u1", phi1.height, N);
    ModeCoefficients u2n("u2", phi1.height, N);
    const cd I(0.0, 1.0);
    for (int n = -N; n <= N; ++n) {
        double alpha = grid.alpha(n);
        u1n.set(n, I * alpha * phi1.at(n) + I * vw.beta(2, n) * phi2.at(n) + src.g_mode(2, n));
        u2n.set(n, I * vw.beta(1, n) * phi1.at(n) - I * alpha * phi2.at(n) + src.g_mode(1, n));
    }
    return {u1n, u2n};
}

FarFieldRecord displacement_from_potentials(const ModeCoefficients& phi1,
                                            const ModeCoefficients& phi2, const ModeGrid& grid,
                                            const VerticalWavenumbers& vw, const TbcSources& src,
                                            const ProblemConfig& config, int n_samples) {
    auto [u1n, u2n] = displacement_modes_from_potentials(phi1, phi2, grid, vw, src);
    FarFieldRecord rec;
    rec.xs = sample_grid(config.period, n_samples);
    rec.u1 = synthesize(u1n, config.period, n_samples);
    rec.u2 = synthesize(u2n, config.period, n_samples);
    return rec;
}

}  // namespace esurf
