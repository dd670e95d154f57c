#include "CLI11.hpp"

#include "esurf/ftn.hpp"
#include "esurf/pipeline.hpp"
#include "esurf/tfe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

using namespace esurf;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<unsigned long long> seed;
    std::optional<double> delta;
    std::optional<double> rho1;
    std::string grid;  // "nx,ny"
    int iters = 3;
    double rcond = 1e-6;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_loop_flags) {
    cmd->add_option("--config", f.config_path, "experiment config file")->required();
    cmd->add_option("--out", f.out_dir, "output directory (created if missing)");
    cmd->add_option("--seed", f.seed, "override the config seed");
    cmd->add_option("--delta", f.delta, "override the config noise level");
    cmd->add_option("--grid", f.grid, "loop grid as nx,ny (data grid is 2x finer)");
    if (with_loop_flags) {
        cmd->add_option("--iters", f.iters, "correction steps (default 3)");
        cmd->add_option("--rcond", f.rcond, "relative singular-value cutoff");
    }
}

RunConfig effective_config(const CommonFlags& f) {
    RunConfig rc = load_config(f.config_path);
    if (f.seed) rc.seed = *f.seed;
    if (f.delta) rc.noise_delta = *f.delta;
    if (f.rho1) rc.problem.rho1 = *f.rho1;
    if (rc.noise_delta < 0.0 || rc.noise_delta >= 1.0)
        throw ConfigError("noise level must lie in [0, 1)");
    rc.problem.validate();
    return rc;
}

std::pair<int, int> effective_loop_grid(const CommonFlags& f, const RunConfig& rc) {
    if (f.grid.empty()) return default_loop_grid(rc.problem);
    int nx = 0, ny = 0;
    if (std::sscanf(f.grid.c_str(), "%d,%d", &nx, &ny) != 2 || nx < 1 || ny < 1)
        throw ConfigError("--grid expects nx,ny with positive integers");
    return {nx, ny};
}

std::string out_path(const CommonFlags& f, const std::string& name) {
    std::filesystem::create_directories(f.out_dir);
    return (std::filesystem::path(f.out_dir) / name).string();
}

// The measured abscissae must be the uniform grid of the configured
// period; anything else means the trace belongs to another experiment.
void check_trace_grid(const FarFieldRecord& rec, const RunConfig& rc) {
    std::vector<double> expect = sample_grid(rc.problem.period, rec.size());
    for (int s = 0; s < rec.size(); ++s) {
        if (std::abs(rec.xs[s] - expect[s]) > 1e-9 * rc.problem.period)
            throw ConfigError("trace abscissae do not match the configured period");
    }
}

int cmd_forward(const CommonFlags& f) {
    RunConfig rc = effective_config(f);
    std::pair<int, int> loop = effective_loop_grid(f, rc);
    RunManifest m = make_manifest(rc, "forward", f.config_path, f.out_dir, f.iters, f.rcond, loop);
    ForwardArtifacts art = run_forward(rc, data_grid_for(loop));
    write_trace_csv(art.clean, m.run_id, out_path(f, "trace_clean.csv"));
    write_trace_csv(art.noisy, m.run_id, out_path(f, "trace_noisy.csv"));
    write_manifest(m, out_path(f, "forward_manifest.txt"));
    std::printf("forward: run %s, %d samples, delta=%g, wrote trace_clean.csv trace_noisy.csv\n",
                m.run_id.c_str(), art.clean.size(), rc.noise_delta);
    return 0;
}

int cmd_reconstruct(const CommonFlags& f, const std::string& trace_path) {
    RunConfig rc = effective_config(f);
    std::pair<int, int> loop = effective_loop_grid(f, rc);
    RunManifest m =
        make_manifest(rc, "reconstruct", f.config_path, f.out_dir, f.iters, f.rcond, loop);

    FarFieldRecord rec;
    if (!trace_path.empty()) {
        rec = read_trace_csv(trace_path);
        check_trace_grid(rec, rc);
    } else {
        rec = run_forward(rc, data_grid_for(loop)).noisy;
    }

    ReconstructArtifacts art = run_reconstruct(rc, rec, loop, f.iters, f.rcond);
    SurfaceProfile exact = profile_from_config(rc);
    write_reconstruction_csv(art, &exact, m.run_id, out_path(f, "reconstruction.csv"));
    write_sigma_csv(art.system, m.run_id, out_path(f, "singular_values.csv"));
    write_manifest(m, out_path(f, "reconstruct_manifest.txt"));

    std::printf("reconstruct: run %s, kept rank %d/%d, linear error %.4g", m.run_id.c_str(),
                art.system.kept_rank, art.system.dim(),
                rel_l2_error(art.linear.f_samples, exact));
    for (std::size_t k = 0; k < art.iterates.size(); ++k)
        std::printf(", step %zu %.4g", k + 1, rel_l2_error(art.iterates[k].f_samples, exact));
    std::printf("\n");
    return 0;
}

int cmd_bench(const CommonFlags& f, std::vector<double> rho1_list) {
    std::sort(rho1_list.begin(), rho1_list.end());
    rho1_list.erase(std::unique(rho1_list.begin(), rho1_list.end()), rho1_list.end());
    if (rho1_list.size() < 2)
        throw ConfigError("bench-resolution needs at least two distinct densities");

    RunConfig rc = effective_config(f);
    std::pair<int, int> loop = effective_loop_grid(f, rc);
    RunManifest m =
        make_manifest(rc, "bench-resolution", f.config_path, f.out_dir, 3, f.rcond, loop);

    std::string path = out_path(f, "bench_resolution.csv");
    std::ofstream os(path);
    if (!os) throw IoError("cannot open bench CSV for writing: " + path);
    os << "# run " << m.run_id << "\n";
    os << "rho1,N1,N2,rel_L2_error_linear,rel_L2_error_after_3\n";

    std::uint64_t seed_state = rc.seed;
    for (double rho1 : rho1_list) {
        RunConfig entry = rc;
        entry.problem.rho1 = rho1;
        entry.seed = splitmix64(seed_state);
        ModeGrid grid = mode_grid(entry.problem, derive_wavenumbers(entry.problem));
        FarFieldRecord rec = run_forward(entry, data_grid_for(loop)).noisy;
        ReconstructArtifacts art = run_reconstruct(entry, rec, loop, 3, f.rcond);
        SurfaceProfile exact = profile_from_config(entry);
        double e_lin = rel_l2_error(art.linear.f_samples, exact);
        double e_it = rel_l2_error((art.iterates.empty() ? art.linear : art.iterates.back())
                                       .f_samples,
                                   exact);
        char row[160];
        std::snprintf(row, sizeof row, "%.17g,%d,%d,%.17g,%.17g", rho1, grid.N1, grid.N2, e_lin,
                      e_it);
        os << row << "\n";
        std::printf("bench rho1=%g: N1=%d N2=%d linear %.4g after_3 %.4g\n", rho1, grid.N1,
                    grid.N2, e_lin, e_it);
    }
    if (!os) throw IoError("bench CSV write failed: " + path);
    write_manifest(m, out_path(f, "bench_manifest.txt"));
    return 0;
}

int cmd_selftest() {
    int failed = 0;
    auto report = [&](const char* name, bool ok, double value) {
        std::printf("%-52s %s (%.3g)\n", name, ok ? "PASS" : "FAIL", value);
        if (!ok) ++failed;
    };

    {
        ProblemConfig c;
        c.rho1 = 4.0;
        Wavenumbers wn = derive_wavenumbers(c);
        ModeGrid grid = mode_grid(c, wn);
        bool ok = wn.kappa1 == pi && wn.kappa2 == 2.0 * pi && grid.N1 == 3 && grid.N2 == 6;
        report("derived wavenumbers and cutoffs", ok, wn.kappa1);
    }
    for (double rho1 : {1.0, 2.0, 4.0}) {
        ProblemConfig c;
        c.rho1 = rho1;
        Wavenumbers wn = derive_wavenumbers(c);
        ModeGrid grid = mode_grid(c, wn);
        VerticalWavenumbers vw = vertical_wavenumbers(wn, grid, false);
        FlatLayerSolution sol = flat_layered_oracle(c, wn, vw);
        double pinc = incident_flux(c, wn);
        double worst = 0.0;
        for (double y : {0.01, 0.5, 1.2, 2.5})
            worst = std::max(worst, std::abs(flux_through(sol, c, y)) / pinc);
        char name[64];
        std::snprintf(name, sizeof name, "flat-layer flux balance, rho1=%g", rho1);
        report(name, worst < 1e-10, worst);
        double refl = std::abs(sol.A1[sol.N]) * wn.kappa1;
        std::snprintf(name, sizeof name, "unit reflection, rho1=%g", rho1);
        report(name, std::abs(refl - 1.0) < 1e-10, refl);
    }
    {
        ProblemConfig c;
        c.rho1 = 4.0;
        Wavenumbers wn = derive_wavenumbers(c);
        ModeGrid grid = mode_grid(c, wn);
        VerticalWavenumbers vw = vertical_wavenumbers(wn, grid, false);
        FlatLayerSolution sol = flat_layered_oracle(c, wn, vw);
        FarFieldRecord rec = sol.trace(500);
        TbcSources src = tbc_sources(c, wn);
        auto [p1, p2] = potentials_from_displacement(rec, c, grid, vw, src, grid.n_max);
        SlabTraces st = traces_at_bottom(p1, p2, src, c, wn, grid, vw);
        SlabTraces taus = tau_from_traces(st, wn, grid, vw);
        TfeField f0 = order0(taus, grid, vw, c);
        double worst = 0.0;
        for (int j : {1, 2})
            worst = std::max(worst, std::abs(f0.trace_b(j, 0) - sol.gap_potential(j, 0, c.b)));
        report("far-field reduction chain vs oracle", worst < 1e-8, worst);
    }
    {
        ProblemConfig c;
        SurfaceProfile flat;
        flat.period = c.period;
        flat.g_coeffs = {cd(0.0)};
        Wavenumbers wn = derive_wavenumbers(c);
        ModeGrid grid = mode_grid(c, wn);
        VerticalWavenumbers vw = vertical_wavenumbers(wn, grid, false);
        FlatLayerSolution sol = flat_layered_oracle(c, wn, vw);
        FarFieldRecord ref = sol.trace(500);
        FarFieldRecord got = trace_at_top(solve_direct_fd(c, flat, 63, 40), 500);
        double d2 = 0.0, r2 = 0.0;
        for (int s = 0; s < got.size(); ++s) {
            d2 += std::norm(got.u1[s] - ref.u1[s]) + std::norm(got.u2[s] - ref.u2[s]);
            r2 += std::norm(ref.u1[s]) + std::norm(ref.u2[s]);
        }
        double err = std::sqrt(d2) / std::max(std::sqrt(r2), std::sqrt(double(got.size())));
        report("direct solver vs flat-layer oracle", err < 1e-3, err);
    }
    {
        ProblemConfig c;
        c.rho1 = 4.0;
        Wavenumbers wn = derive_wavenumbers(c);
        ModeGrid grid = mode_grid(c, wn);
        VerticalWavenumbers vw = vertical_wavenumbers(wn, grid, false);
        FarFieldRecord rec = flat_layered_oracle(c, wn, vw).trace(64);
        FarFieldRecord n1 = add_noise(rec, 0.02, 11);
        FarFieldRecord n2 = add_noise(rec, 0.02, 11);
        double diff = 0.0;
        for (int s = 0; s < rec.size(); ++s)
            diff = std::max(diff, std::abs(n1.u2[s] - n2.u2[s]));
        report("noise operator determinism", diff == 0.0, diff);
    }

    std::printf("selftest: %s\n", failed == 0 ? "all checks passed" : "FAILURES PRESENT");
    return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Elastic-wave scattering by a periodic surface under a dense slab: "
                 "forward simulation and surface reconstruction"};
    app.require_subcommand(1);

    CommonFlags ff, rf, bf;
    std::string trace_path;
    std::vector<double> rho1_list;
    double rho1_single_f = 0.0, rho1_single_r = 0.0;

    CLI::App* fwd = app.add_subcommand("forward", "simulate far-field measurement data");
    add_common(fwd, ff, false);
    fwd->add_option("--rho1", rho1_single_f, "override the slab density");

    CLI::App* rec = app.add_subcommand("reconstruct", "recover the surface from a trace");
    add_common(rec, rf, true);
    rec->add_option("--rho1", rho1_single_r, "override the slab density");
    rec->add_option("--trace", trace_path, "measured trace CSV (simulated when omitted)");

    CLI::App* bench = app.add_subcommand("bench-resolution",
                                         "error-vs-density sweep on the configured surface");
    add_common(bench, bf, true);
    bench->add_option("--rho1", rho1_list, "slab densities to sweep (need at least two)")
        ->delimiter(',');

    CLI::App* self = app.add_subcommand("selftest", "run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fwd->parsed()) {
            if (fwd->count("--rho1")) ff.rho1 = rho1_single_f;
            return cmd_forward(ff);
        }
        if (rec->parsed()) {
            if (rec->count("--rho1")) rf.rho1 = rho1_single_r;
            return cmd_reconstruct(rf, trace_path);
        }
        if (bench->parsed()) return cmd_bench(bf, rho1_list);
        if (self->parsed()) return cmd_selftest();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ResonanceError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const SingularModeError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
