#pragma once

#include "esurf/common.hpp"
#include "esurf/core.hpp"
#include "esurf/decomposition.hpp"
#include "esurf/ftn.hpp"
#include "esurf/spectral.hpp"

#include <Eigen/Dense>

#include <functional>
#include <utility>
#include <vector>

namespace esurf {

// Truncated linearized system C s = t for the surface coefficients s_l,
// l in [-Nj, Nj].  Row n holds the first-order trace kernel of the
// selected potential; entries with |n - l| > Nj are zero (band cutoff),
// and rows whose mode carries no recoverable data (evanescent in the
// slab, or a resonant vertical wavenumber) are zero together with their
// data entry.
struct LinearizedSystem {
    Eigen::MatrixXcd C;
    Eigen::VectorXcd t;      // measured trace minus the flat-order prediction
    Eigen::VectorXcd s;      // recovered coefficients, filled by the solve
    Eigen::VectorXd sigma;   // singular values, descending
    int j_used = 1;
    double rcond = 1e-6;     // relative singular-value cutoff
    int Nj = 0;
    double period = 0.0;
    int kept_rank = 0;       // singular values kept by the cutoff

    int dim() const { return 2 * Nj + 1; }
    int row(int n) const { return n + Nj; }
};

// Sampled reconstruction f(x) = Re sum_m s_m e^{i alpha_m x} plus the
// solve/iteration record.  residual_history holds the linear-solve
// relative residual followed by the relative change of each correction
// step; it is recorded, never asserted monotone.
struct ReconstructionResult {
    std::vector<double> f_samples;
    std::vector<cd> f_coeffs;  // index m + Nj
    int Nj = 0;
    double period = 0.0;
    int iterations = 0;  // correction steps performed
    std::vector<double> residual_history;
    int kept_rank = 0;
};

// Moore-Penrose pseudo-inverse by singular value decomposition; singular
// values below rcond * sigma_max are treated as zero.  Optionally reports
// the spectrum and the kept rank.
Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& C, double rcond,
                                Eigen::VectorXd* sigma_out = nullptr, int* rank_out = nullptr);

// Builds the banded system from the slab-transferred data.  phi_b_measured
// and phi_b_flat are (phi_1n(b), phi_2n(b)) pairs: the measured values and
// the flat-order prediction; their bands must cover the cutoff of the
// selected j.  t_n = measured - flat on rows with recoverable data.
// Rows whose gap wavenumber beta_jn is resonant are regular but outside
// the closed-form kernel's reach; they are filled through the expansion
// recursion, so cutoff geometries keep their full usable rank.
LinearizedSystem assemble_system(const SlabTraces& traces,
                                 const std::pair<ModeCoefficients, ModeCoefficients>& phi_b_measured,
                                 const std::pair<ModeCoefficients, ModeCoefficients>& phi_b_flat,
                                 const ProblemConfig& config, const ModeGrid& grid,
                                 const VerticalWavenumbers& vw, int j = 1, double rcond = 1e-6);

// Minimum-norm least-squares solve s = C^+ t.  Throws SingularModeError on
// an identically zero matrix.
LinearizedSystem solve_pseudo_inverse(LinearizedSystem sys);

// Samples f(x) = Re sum_m s_m e^{i alpha_m x} on the uniform measurement
// grid and records the linear-solve residual.
ReconstructionResult reconstruct_surface(const LinearizedSystem& sys, int n_samples = 500);

// The real surface a coefficient vector describes, stored with epsilon = 1
// and conjugate-symmetrized coefficients so spectral and sample views agree.
SurfaceProfile profile_from_coeffs(const Eigen::VectorXcd& s, int Nj, double period,
                                   int n_samples = 500);

// Full conversion chain for one measured record: potentials on the top
// boundary, slab transfer to the bottom, flat-order prediction, assembled
// system.  Used for the measured data and for every correction candidate.
LinearizedSystem system_from_record(const FarFieldRecord& rec, const ProblemConfig& config,
                                    int j = 1, double rcond = 1e-6);

// Forward-solve capability for the correction loop: produce the candidate
// surface's far-field record, or directly its assembled system.
using FarFieldSolverFn = std::function<FarFieldRecord(const SurfaceProfile&)>;
using CandidateSystemFn = std::function<LinearizedSystem(const SurfaceProfile&)>;

// Wraps a far-field solver into the conversion chain above.
CandidateSystemFn candidate_system_via(FarFieldSolverFn solve, ProblemConfig config, int j = 1,
                                       double rcond = 1e-6);

// Newton-like correction: per step, solve the direct problem for the
// current candidate surface, rebuild its system (C', t'), and update
// s <- C^+ (t + C' s - t') with C^+ fixed from the measured system.
// Stops after max_iters steps or when the relative sample-level change
// drops below tol; a solver failure aborts, returning the completed
// steps' state and history.
ReconstructionResult nonlinear_correction(const ReconstructionResult& initial,
                                          const LinearizedSystem& measured,
                                          const CandidateSystemFn& solver, int max_iters = 3,
                                          double tol = 1e-3);

// Same loop starting from the raw measured record.
ReconstructionResult nonlinear_correction(const ReconstructionResult& initial,
                                          const FarFieldRecord& rec, const ProblemConfig& config,
                                          const CandidateSystemFn& solver, int max_iters = 3,
                                          double tol = 1e-3, int j = 1, double rcond = 1e-6);

}  // namespace esurf
