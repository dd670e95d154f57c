#include "esurf/inversion.hpp"

#include "esurf/tfe.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace esurf {

namespace {

void check_j(int j, const char* where) {
    if (j != 1 && j != 2) throw ConfigError(std::string(where) + ": j must be 1 or 2");
}

std::vector<double> real_samples(const Eigen::VectorXcd& s, int Nj, double period, int n_samples) {
    ModeCoefficients mc("", 0.0, Nj);
    for (int m = -Nj; m <= Nj; ++m) mc.set(m, s(m + Nj));
    std::vector<cd> vals = synthesize(mc, period, n_samples);
    std::vector<double> out(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) out[i] = vals[i].real();
    return out;
}

double rel_change(const std::vector<double>& cur, const std::vector<double>& prev) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < cur.size(); ++i) {
        num += (cur[i] - prev[i]) * (cur[i] - prev[i]);
        den += cur[i] * cur[i];
    }
    if (den > 0.0) return std::sqrt(num / den);
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& C, double rcond,
                                Eigen::VectorXd* sigma_out, int* rank_out) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd sv = svd.singularValues();
    double cut = rcond * (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > 0.0 && sv(i) >= cut) {
            inv(i) = 1.0 / sv(i);
            ++rank;
        }
    }
    if (sigma_out) *sigma_out = sv;
    if (rank_out) *rank_out = rank;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

LinearizedSystem assemble_system(const SlabTraces& traces,
                                 const std::pair<ModeCoefficients, ModeCoefficients>& phi_b_measured,
                                 const std::pair<ModeCoefficients, ModeCoefficients>& phi_b_flat,
                                 const ProblemConfig& config, const ModeGrid& grid,
                                 const VerticalWavenumbers& vw, int j, double rcond) {
    check_j(j, "assemble_system");
    const int Nj = (j == 1) ? grid.N1 : grid.N2;
    const ModeCoefficients& meas = (j == 1) ? phi_b_measured.first : phi_b_measured.second;
    const ModeCoefficients& flat = (j == 1) ? phi_b_flat.first : phi_b_flat.second;
    if (meas.N < Nj || flat.N < Nj)
        throw ConfigError("assemble_system: trace band narrower than the mode cutoff");
    if (vw.N < Nj)
        throw ConfigError("assemble_system: wavenumber table narrower than the mode cutoff");

    LinearizedSystem sys;
    sys.j_used = j;
    sys.rcond = rcond;
    sys.Nj = Nj;
    sys.period = config.period;
    sys.C = Eigen::MatrixXcd::Zero(sys.dim(), sys.dim());
    sys.t = Eigen::VectorXcd::Zero(sys.dim());

    std::vector<int> resonant_rows;
    for (int n = -Nj; n <= Nj; ++n) {
        // rows without recoverable data (evanescent in the slab) stay zero
        if (!traces.is_kept(j, n)) continue;
        sys.t(sys.row(n)) = meas.at(n) - flat.at(n);
        if (vw.beta_resonant(j, n)) {
            // the row's trace is regular but the closed-form kernel divides
            // by beta_jn; fill it from the recursion below
            resonant_rows.push_back(n);
            continue;
        }
        for (int l = std::max(-Nj, n - Nj); l <= std::min(Nj, n + Nj); ++l) {
            Order1RowKernel ker = order1_kernel(n, n - l, traces, grid, vw, config);
            sys.C(sys.row(n), sys.row(l)) = (j == 1) ? ker.c1 : ker.c2;
        }
    }

    if (!resonant_rows.empty()) {
        // one first-order recursion per column with a unit-coefficient
        // profile; exact by the order's homogeneity in the coefficients
        const double amp = 1e-3 * config.b;
        for (int l = -Nj; l <= Nj; ++l) {
            SurfaceProfile unit;
            unit.epsilon = 1.0;
            unit.period = config.period;
            unit.bandwidth = std::abs(l);
            unit.g_coeffs.assign(2 * std::abs(l) + 1, cd(0.0));
            unit.g_coeffs[l + std::abs(l)] = cd(amp, 0.0);
            std::vector<TfeField> fields = tfe_recursion(traces, unit, grid, vw, config, 1);
            for (int n : resonant_rows)
                if (std::abs(n - l) <= Nj)
                    sys.C(sys.row(n), sys.row(l)) = fields[1].trace_b(j, n) / amp;
        }
    }
    return sys;
}

LinearizedSystem solve_pseudo_inverse(LinearizedSystem sys) {
    if (sys.C.size() == 0) throw ConfigError("solve_pseudo_inverse: system not assembled");
    if (sys.C.norm() == 0.0)
        throw SingularModeError("solve_pseudo_inverse: system matrix is identically zero");
    int rank = 0;
    Eigen::MatrixXcd P = pseudo_inverse(sys.C, sys.rcond, &sys.sigma, &rank);
    sys.s = P * sys.t;
    sys.kept_rank = rank;
    return sys;
}

ReconstructionResult reconstruct_surface(const LinearizedSystem& sys, int n_samples) {
    if (sys.s.size() != sys.dim())
        throw ConfigError("reconstruct_surface: system has not been solved");
    ReconstructionResult out;
    out.Nj = sys.Nj;
    out.period = sys.period;
    out.kept_rank = sys.kept_rank;
    out.f_coeffs.assign(sys.s.data(), sys.s.data() + sys.s.size());
    out.f_samples = real_samples(sys.s, sys.Nj, sys.period, n_samples);
    double tn = sys.t.norm();
    double rn = (sys.C * sys.s - sys.t).norm();
    out.residual_history.push_back(tn > 0.0 ? rn / tn : rn);
    return out;
}

SurfaceProfile profile_from_coeffs(const Eigen::VectorXcd& s, int Nj, double period,
                                   int n_samples) {
    SurfaceProfile p;
    p.epsilon = 1.0;
    p.period = period;
    p.bandwidth = Nj;
    p.g_coeffs.resize(2 * Nj + 1);
    // conjugate symmetrization: the coefficients of Re sum s_m e^{i alpha_m x}
    for (int m = -Nj; m <= Nj; ++m)
        p.g_coeffs[m + Nj] = 0.5 * (s(m + Nj) + std::conj(s(Nj - m)));
    std::vector<double> xs = sample_grid(period, n_samples);
    p.samples.resize(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) p.samples[i] = p.g_at(xs[i]);
    return p;
}

LinearizedSystem system_from_record(const FarFieldRecord& rec, const ProblemConfig& config, int j,
                                    double rcond) {
    check_j(j, "system_from_record");
    config.validate();
    Wavenumbers wn = derive_wavenumbers(config);
    ModeGrid grid = mode_grid(config, wn);
    VerticalWavenumbers vw = vertical_wavenumbers(wn, grid, /*strict=*/false);
    TbcSources src = tbc_sources(config, wn);

    auto phis = potentials_from_displacement(rec, config, grid, vw, src, grid.n_max);
    SlabTraces traces = tau_from_traces(
        traces_at_bottom(phis.first, phis.second, src, config, wn, grid, vw), wn, grid, vw);

    // measured gap potentials at the bottom: phi_jn(b) = (eta_j^2/kappa_j^2) psi_jn(b)
    double s1 = (wn.eta1 * wn.eta1) / (wn.kappa1 * wn.kappa1);
    double s2 = (wn.eta2 * wn.eta2) / (wn.kappa2 * wn.kappa2);
    ModeCoefficients m1("phi1 measured at b", config.b, grid.n_max);
    ModeCoefficients m2("phi2 measured at b", config.b, grid.n_max);
    for (int n = -grid.n_max; n <= grid.n_max; ++n) {
        m1.set(n, s1 * traces.psi_b(1).at(n));
        m2.set(n, s2 * traces.psi_b(2).at(n));
    }

    auto flat = order0_trace_pair(traces, grid, vw, config);
    return assemble_system(traces, {m1, m2}, flat, config, grid, vw, j, rcond);
}

CandidateSystemFn candidate_system_via(FarFieldSolverFn solve, ProblemConfig config, int j,
                                       double rcond) {
    return [solve = std::move(solve), config, j, rcond](const SurfaceProfile& f) {
        return system_from_record(solve(f), config, j, rcond);
    };
}

ReconstructionResult nonlinear_correction(const ReconstructionResult& initial,
                                          const LinearizedSystem& measured,
                                          const CandidateSystemFn& solver, int max_iters,
                                          double tol) {
    if (max_iters < 0) throw ConfigError("nonlinear_correction: max_iters must be >= 0");
    ReconstructionResult out = initial;
    if (max_iters == 0) return out;
    if (static_cast<int>(initial.f_coeffs.size()) != measured.dim())
        throw ConfigError("nonlinear_correction: initial coefficients do not match the system");

    Eigen::MatrixXcd P = pseudo_inverse(measured.C, measured.rcond);
    Eigen::VectorXcd s =
        Eigen::Map<const Eigen::VectorXcd>(initial.f_coeffs.data(), measured.dim());

    int n_samples =
        initial.f_samples.empty() ? 500 : static_cast<int>(initial.f_samples.size());
    std::vector<double> prev = initial.f_samples.empty()
                                   ? real_samples(s, measured.Nj, measured.period, n_samples)
                                   : initial.f_samples;

    for (int l = 0; l < max_iters; ++l) {
        SurfaceProfile cand = profile_from_coeffs(s, measured.Nj, measured.period, n_samples);
        LinearizedSystem sysf;
        try {
            sysf = solver(cand);
        } catch (const std::exception&) {
            break;  // abort, keeping the completed steps
        }
        if (sysf.dim() != measured.dim())
            throw ConfigError("nonlinear_correction: candidate system dimension mismatch");
        Eigen::VectorXcd s_new = P * (measured.t + sysf.C * s - sysf.t);
        std::vector<double> cur = real_samples(s_new, measured.Nj, measured.period, n_samples);
        double rel = rel_change(cur, prev);
        s = s_new;
        prev = cur;
        out.iterations += 1;
        out.residual_history.push_back(rel);
        if (rel < tol) break;
    }

    out.f_coeffs.assign(s.data(), s.data() + s.size());
    out.f_samples = prev;
    return out;
}

ReconstructionResult nonlinear_correction(const ReconstructionResult& initial,
                                          const FarFieldRecord& rec, const ProblemConfig& config,
                                          const CandidateSystemFn& solver, int max_iters,
                                          double tol, int j, double rcond) {
    LinearizedSystem sys = system_from_record(rec, config, j, rcond);
    return nonlinear_correction(initial, sys, solver, max_iters, tol);
}

}  // namespace esurf
