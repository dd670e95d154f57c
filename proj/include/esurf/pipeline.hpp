#pragma once

#include "esurf/common.hpp"
#include "esurf/core.hpp"
#include "esurf/decomposition.hpp"
#include "esurf/forward.hpp"
#include "esurf/inversion.hpp"

#include <string>
#include <utility>
#include <vector>

namespace esurf {

// One experiment description: the physical configuration plus the surface,
// sampling, and noise bookkeeping. Parsed from a flat key-value text file
// with keys lambda, mu, rho0, rho1, omega, period, a, b, epsilon, profile,
// n_samples, noise_delta, seed.
struct RunConfig {
    ProblemConfig problem;
    double epsilon = 0.01;
    std::string profile = "example1";  // example1 | example2 | flat
    int n_samples = 500;
    double noise_delta = 0.0;
    unsigned long long seed = 1;
};

// Parses "key = value" lines ('#' comments and blank lines ignored).
// Unknown keys, unparsable values, and out-of-range settings raise
// ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);  // IoError if unreadable

// The surface named by the config, with its period forced to the problem
// period and the stated epsilon applied.
SurfaceProfile profile_from_config(const RunConfig& rc);

// Base grid at 20 points per free-space shear wavelength (nx odd), and the
// measurement grid one refinement finer in both directions. Candidate
// solves during correction run on the base grid; measured data never
// shares a grid with them.
std::pair<int, int> default_loop_grid(const ProblemConfig& config);
std::pair<int, int> data_grid_for(std::pair<int, int> loop_grid);

// Everything a run's artifacts need to be reproduced: inputs, derived
// spectral constants, and a content hash. The run id covers every field
// that influences output bytes; the timestamp is informational only.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::string out_dir;
    RunConfig rc;
    int iters = 3;
    double rcond = 1e-6;
    int nx = 0, ny = 0;  // loop grid
    Wavenumbers wn;
    int N1 = 0, N2 = 0;
    std::string timestamp;
    std::string run_id;
};

RunManifest make_manifest(const RunConfig& rc, const std::string& command,
                          const std::string& config_path, const std::string& out_dir, int iters,
                          double rcond, std::pair<int, int> loop_grid);
void write_manifest(const RunManifest& m, const std::string& path);

// Measurement-exchange format: one "# run <id>" reference line, a header,
// then rows x,re_u1,im_u1,re_u2,im_u2. Values are printed with full
// precision, so identical records give identical bytes.
void write_trace_csv(const FarFieldRecord& rec, const std::string& run_id,
                     const std::string& path);
FarFieldRecord read_trace_csv(const std::string& path);  // IoError on malformed input

// Direct solve on the given grid followed by trace sampling and the seeded
// noise pass (delta = 0 leaves the records identical).
struct ForwardArtifacts {
    FarFieldRecord clean;
    FarFieldRecord noisy;
};
ForwardArtifacts run_forward(const RunConfig& rc, std::pair<int, int> data_grid);

// Linearized solve plus the correction iterates, each one step further.
// iterates[k] is the state after k + 1 correction steps; candidate solves
// run on the loop grid.
struct ReconstructArtifacts {
    LinearizedSystem system;
    ReconstructionResult linear;
    std::vector<ReconstructionResult> iterates;
};
ReconstructArtifacts run_reconstruct(const RunConfig& rc, const FarFieldRecord& rec,
                                     std::pair<int, int> loop_grid, int iters, double rcond,
                                     int j = 1);

// Plot-data emission for a reconstruction: x, the exact surface when the
// config names one, the linearized surface, then one column per
// correction step. The diagnostics CSV lists the singular values with
// their kept/cut status.
void write_reconstruction_csv(const ReconstructArtifacts& art, const SurfaceProfile* exact,
                              const std::string& run_id, const std::string& path);
void write_sigma_csv(const LinearizedSystem& sys, const std::string& run_id,
                     const std::string& path);

// Relative L2 distance between a sampled surface and the exact profile on
// the same measurement grid; returns the absolute norm when the exact
// surface is identically zero.
double rel_l2_error(const std::vector<double>& f_samples, const SurfaceProfile& exact);

}  // namespace esurf
