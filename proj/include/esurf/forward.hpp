#pragma once

#include "esurf/common.hpp"
#include "esurf/core.hpp"
#include "esurf/decomposition.hpp"
#include "esurf/spectral.hpp"

#include <string>
#include <vector>

namespace esurf {

// Exact per-mode solution of the flat-surface layered problem: rigid plane
// at y = 0, ambient-material gap on (0, b), slab of density rho1 on (b, a),
// ambient half space with the incident plane wave above. Each mode carries
// ten amplitudes: two outgoing potentials above Gamma_a (e^{i beta (y-a)}),
// an up/down pair per potential in the slab (e^{+-i gamma (y-b)}) and in
// the gap (e^{+-i beta y}). At normal incidence only n = 0 is excited.
struct FlatLayerSolution {
    int N = 0;
    double period = 0.0, a = 0.0, b = 0.0;
    Wavenumbers wn;
    std::vector<cd> A1, A2;              // outgoing in the upper half space
    std::vector<cd> B1p, B1m, B2p, B2m;  // slab, up/down per potential
    std::vector<cd> C1p, C1m, C2p, C2m;  // gap, up/down per potential

    cd gap_potential(int j, int n, double y) const;
    cd slab_potential(int j, int n, double y) const;
    // scattered part only; the incident potential lives in j = 1, n = 0
    cd upper_potential(int j, int n, double y) const;

    // total displacement coefficients at height y, region picked by y,
    // incident field included above Gamma_a
    std::pair<cd, cd> mode_displacement(int n, double y) const;

    // total displacement sampled on the measurement grid at y = a
    FarFieldRecord trace(int n_samples = 500) const;
};

// Solves the ten-unknown mode systems. Modes with degenerate bases (a
// vanishing vertical wavenumber collapses the up/down pair) are zero for
// the unforced flat problem and are returned as zeros; a singular system
// with nonzero forcing raises SingularModeError naming the mode.
FlatLayerSolution flat_layered_oracle(const ProblemConfig& config, const Wavenumbers& wn,
                                      const VerticalWavenumbers& vw);

// Net time-averaged upward energy flux through height y (per period,
// incident included above Gamma_a). The rigid bottom reflects everything,
// so the lossless solution carries zero net flux at every height.
double flux_through(const FlatLayerSolution& sol, const ProblemConfig& config, double y);
// Flux magnitude of the incident wave alone, for normalizing balance checks.
double incident_flux(const ProblemConfig& config, const Wavenumbers& wn);

// Finite-difference solution of the Navier system with the surface
// flattened: the gap (f, b) is mapped onto the rectangle (0, b) while the
// slab keeps physical coordinates, sharing a grid line exactly on Gamma_b.
// The vertical grid is piecewise uniform; ny sets the slab spacing
// a / ny and the thin gap gets its own proportionally finer subgrid (the
// closures at the rigid row and the interface need interior nodes that a
// single uniform spacing could not provide at sane resolutions).
struct ForwardField {
    int nx = 0, n_gap = 0, n_slab = 0;
    double hx = 0.0, h_gap = 0.0, h_slab = 0.0;
    double period = 0.0, a = 0.0, b = 0.0;
    ProblemConfig config;
    SurfaceProfile profile;
    std::vector<cd> u;  // two components per node, index 2*(k*nx + i) + c
    std::vector<std::string> warnings;

    int rows() const { return n_gap + n_slab + 1; }
    int idx(int i, int k, int c) const { return 2 * (k * nx + i) + c; }
    cd at(int i, int k, int c) const { return u[idx(i, k, c)]; }
    double x_node(int i) const { return -period / 2.0 + i * hx; }
    // transformed height of row k (gap rows below the interface line)
    double y_node(int k) const {
        return k <= n_gap ? k * h_gap : b + (k - n_gap) * h_slab;
    }
};

// Assembles and factors the sparse system: mapped second-order interior in
// the gap, high-order vertical stencils in the slab, traction-continuity
// rows on Gamma_b, rigid row at the bottom, and the per-mode outgoing map
// coupling the top row through a circulant kernel. nx is rounded up to odd
// so the discrete spectrum is symmetric. Throws SingularModeError if the
// factorization fails; appends resolution warnings instead of failing.
ForwardField solve_direct_fd(const ProblemConfig& config, const SurfaceProfile& profile,
                             int nx, int ny);

// Linear interpolation of the top-row displacement onto the measurement
// abscissae.
FarFieldRecord trace_at_top(const ForwardField& field, int n_samples = 500);

// Multiplies every displacement component by (1 + delta * r) with r drawn
// i.i.d. uniform on [-1, 1] from the seeded generator; one draw per
// component per sample, in sample order. Identical seeds give bit-identical
// records.
FarFieldRecord add_noise(const FarFieldRecord& rec, double delta, unsigned long long seed);

// Binary dump, layout: "ESFD" magic, int32 version = 1, int32 nx/n_gap/
// n_slab, float64 period/a/b/hx/h_gap/h_slab, then nodes row-major from the
// bottom row up (u1 re, u1 im, u2 re, u2 im as float64 each).
void write_field_dump(const ForwardField& field, const std::string& path);

// Finite-difference weights of the m-th derivative at z over the given
// nodes (Fornberg's recurrence); exact for polynomials up to the stencil
// order.
std::vector<double> fd_weights(double z, const std::vector<double>& xs, int m);

}  // namespace esurf
