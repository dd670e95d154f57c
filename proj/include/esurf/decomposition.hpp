#pragma once

#include "esurf/common.hpp"
#include "esurf/core.hpp"
#include "esurf/spectral.hpp"

#include <utility>
#include <vector>

namespace esurf {

// Sampled total displacement on Gamma_a, the measurement-exchange record.
struct FarFieldRecord {
    std::vector<double> xs;
    std::vector<cd> u1, u2;
    double delta = 0.0;  // noise level the record was generated with
    unsigned long long seed = 0;

    int size() const { return static_cast<int>(xs.size()); }
};

// Cramer solve of the per-mode 2x2 system tying (phi_1n, phi_2n) to the
// source-corrected displacement coefficients.
std::pair<ModeCoefficients, ModeCoefficients> potentials_from_displacement(
    const FarFieldRecord& rec, const ProblemConfig& config, const ModeGrid& grid,
    const VerticalWavenumbers& vw, const TbcSources& src, int N);

// Forward direction of the same system, synthesized back to samples.
FarFieldRecord displacement_from_potentials(const ModeCoefficients& phi1,
                                            const ModeCoefficients& phi2, const ModeGrid& grid,
                                            const VerticalWavenumbers& vw, const TbcSources& src,
                                            const ProblemConfig& config, int n_samples);

// Mode-space forward map (no sampling): u1_n = i a_n phi1_n + i b_2n phi2_n + g2_n,
// u2_n = i b_1n phi1_n - i a_n phi2_n + g1_n.
std::pair<ModeCoefficients, ModeCoefficients> displacement_modes_from_potentials(
    const ModeCoefficients& phi1, const ModeCoefficients& phi2, const ModeGrid& grid,
    const VerticalWavenumbers& vw, const TbcSources& src);

}  // namespace esurf
