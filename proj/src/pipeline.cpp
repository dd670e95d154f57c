#include "esurf/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace esurf {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse number from '" + v + "'");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// FNV-1a over the deterministic manifest content; collision resistance is
// irrelevant, the id only names a parameter set.
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig rc;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
        if (key == "lambda") rc.problem.lambda_lame = parse_double(key, val);
        else if (key == "mu") rc.problem.mu = parse_double(key, val);
        else if (key == "rho0") rc.problem.rho0 = parse_double(key, val);
        else if (key == "rho1") rc.problem.rho1 = parse_double(key, val);
        else if (key == "omega") rc.problem.omega = parse_double(key, val);
        else if (key == "period") rc.problem.period = parse_double(key, val);
        else if (key == "a") rc.problem.a = parse_double(key, val);
        else if (key == "b") rc.problem.b = parse_double(key, val);
        else if (key == "epsilon") rc.epsilon = parse_double(key, val);
        else if (key == "profile") rc.profile = val;
        else if (key == "n_samples") rc.n_samples = static_cast<int>(parse_double(key, val));
        else if (key == "noise_delta") rc.noise_delta = parse_double(key, val);
        else if (key == "seed") {
            double d = parse_double(key, val);
            if (d < 0) throw ConfigError("config key 'seed': must be nonnegative");
            rc.seed = static_cast<unsigned long long>(d);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    rc.problem.validate();
    if (rc.n_samples < 1) throw ConfigError("n_samples must be positive");
    if (rc.profile != "example1" && rc.profile != "example2" && rc.profile != "flat")
        throw ConfigError("profile must be example1, example2, or flat");
    if (rc.epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
    if (rc.noise_delta < 0.0 || rc.noise_delta >= 1.0)
        throw ConfigError("noise_delta must lie in [0, 1)");
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

SurfaceProfile profile_from_config(const RunConfig& rc) {
    SurfaceProfile p;
    if (rc.profile == "example1") {
        p = builtin_profile(ProfileKind::example1, rc.n_samples);
    } else if (rc.profile == "example2") {
        p = builtin_profile(ProfileKind::example2, rc.n_samples);
    } else {
        p.period = rc.problem.period;
        p.g_coeffs = {cd(0.0)};
        p.samples.assign(rc.n_samples, 0.0);
    }
    p.epsilon = rc.epsilon;
    if (std::abs(p.period - rc.problem.period) > 1e-12 * rc.problem.period)
        throw ConfigError("profile '" + rc.profile + "' has period " + fmt(p.period) +
                          " but the config says " + fmt(rc.problem.period));
    return p;
}

std::pair<int, int> default_loop_grid(const ProblemConfig& config) {
    Wavenumbers wn = derive_wavenumbers(config);
    double h = (2.0 * pi / wn.kappa2) / 20.0;
    int ny = static_cast<int>(std::lround(config.a / h));
    int nx = static_cast<int>(std::ceil(config.period / h));
    if (nx % 2 == 0) ++nx;
    return {nx, ny};
}

std::pair<int, int> data_grid_for(std::pair<int, int> loop_grid) {
    return {2 * loop_grid.first - 1, 2 * loop_grid.second};
}

RunManifest make_manifest(const RunConfig& rc, const std::string& command,
                          const std::string& config_path, const std::string& out_dir, int iters,
                          double rcond, std::pair<int, int> loop_grid) {
    RunManifest m;
    m.command = command;
    m.config_path = config_path;
    m.out_dir = out_dir;
    m.rc = rc;
    m.iters = iters;
    m.rcond = rcond;
    m.nx = loop_grid.first;
    m.ny = loop_grid.second;
    m.wn = derive_wavenumbers(rc.problem);
    ModeGrid grid = mode_grid(rc.problem, m.wn);
    m.N1 = grid.N1;
    m.N2 = grid.N2;

    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m.timestamp = buf;

    std::ostringstream id;
    id << command << '|' << rc.problem.lambda_lame << '|' << rc.problem.mu << '|'
       << rc.problem.rho0 << '|' << rc.problem.rho1 << '|' << rc.problem.omega << '|'
       << rc.problem.period << '|' << rc.problem.a << '|' << rc.problem.b << '|' << rc.epsilon
       << '|' << rc.profile << '|' << rc.n_samples << '|' << rc.noise_delta << '|' << rc.seed
       << '|' << iters << '|' << rcond << '|' << m.nx << 'x' << m.ny;
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a(id.str())));
    m.run_id = hex;
    return m;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open manifest for writing: " + path);
    os << "run_id: " << m.run_id << "\n";
    os << "command: " << m.command << "\n";
    os << "config: " << m.config_path << "\n";
    os << "out_dir: " << m.out_dir << "\n";
    os << "timestamp: " << m.timestamp << "\n";
    os << "seed: " << m.rc.seed << "\n";
    os << "lambda: " << fmt(m.rc.problem.lambda_lame) << "\n";
    os << "mu: " << fmt(m.rc.problem.mu) << "\n";
    os << "rho0: " << fmt(m.rc.problem.rho0) << "\n";
    os << "rho1: " << fmt(m.rc.problem.rho1) << "\n";
    os << "omega: " << fmt(m.rc.problem.omega) << "\n";
    os << "period: " << fmt(m.rc.problem.period) << "\n";
    os << "a: " << fmt(m.rc.problem.a) << "\n";
    os << "b: " << fmt(m.rc.problem.b) << "\n";
    os << "epsilon: " << fmt(m.rc.epsilon) << "\n";
    os << "profile: " << m.rc.profile << "\n";
    os << "n_samples: " << m.rc.n_samples << "\n";
    os << "noise_delta: " << fmt(m.rc.noise_delta) << "\n";
    os << "iters: " << m.iters << "\n";
    os << "rcond: " << fmt(m.rcond) << "\n";
    os << "grid: " << m.nx << "x" << m.ny << "\n";
    os << "kappa1: " << fmt(m.wn.kappa1) << "\n";
    os << "kappa2: " << fmt(m.wn.kappa2) << "\n";
    os << "eta1: " << fmt(m.wn.eta1) << "\n";
    os << "eta2: " << fmt(m.wn.eta2) << "\n";
    os << "N1: " << m.N1 << "\n";
    os << "N2: " << m.N2 << "\n";
    if (!os) throw IoError("manifest write failed: " + path);
}

void write_trace_csv(const FarFieldRecord& rec, const std::string& run_id,
                     const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open trace CSV for writing: " + path);
    os << "# run " << run_id << "\n";
    os << "x,re_u1,im_u1,re_u2,im_u2\n";
    for (int s = 0; s < rec.size(); ++s) {
        os << fmt(rec.xs[s]) << ',' << fmt(rec.u1[s].real()) << ',' << fmt(rec.u1[s].imag())
           << ',' << fmt(rec.u2[s].real()) << ',' << fmt(rec.u2[s].imag()) << "\n";
    }
    if (!os) throw IoError("trace CSV write failed: " + path);
}

FarFieldRecord read_trace_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open trace CSV: " + path);
    FarFieldRecord rec;
    std::string line;
    bool saw_header = false;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!saw_header) {
            if (t != "x,re_u1,im_u1,re_u2,im_u2")
                throw IoError(path + ":" + std::to_string(line_no) + ": unexpected header '" +
                              t + "'");
            saw_header = true;
            continue;
        }
        double v[5];
        std::istringstream ls(t);
        std::string cell;
        for (int c = 0; c < 5; ++c) {
            if (!std::getline(ls, cell, ','))
                throw IoError(path + ":" + std::to_string(line_no) + ": expected 5 columns");
            try {
                std::size_t used = 0;
                v[c] = std::stod(cell, &used);
                if (used != trim(cell).size() && used != cell.size())
                    throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" + cell +
                              "'");
            }
        }
        if (std::getline(ls, cell, ','))
            throw IoError(path + ":" + std::to_string(line_no) + ": more than 5 columns");
        rec.xs.push_back(v[0]);
        rec.u1.emplace_back(v[1], v[2]);
        rec.u2.emplace_back(v[3], v[4]);
    }
    if (!saw_header || rec.xs.empty()) throw IoError(path + ": no trace data found");
    return rec;
}

ForwardArtifacts run_forward(const RunConfig& rc, std::pair<int, int> data_grid) {
    SurfaceProfile profile = profile_from_config(rc);
    ForwardField field = solve_direct_fd(rc.problem, profile, data_grid.first, data_grid.second);
    ForwardArtifacts out;
    out.clean = trace_at_top(field, rc.n_samples);
    out.noisy = add_noise(out.clean, rc.noise_delta, rc.seed);
    return out;
}

ReconstructArtifacts run_reconstruct(const RunConfig& rc, const FarFieldRecord& rec,
                                     std::pair<int, int> loop_grid, int iters, double rcond,
                                     int j) {
    if (iters < 0) throw ConfigError("iteration count must be nonnegative");
    ReconstructArtifacts art;
    art.system = solve_pseudo_inverse(system_from_record(rec, rc.problem, j, rcond));
    art.linear = reconstruct_surface(art.system, rc.n_samples);

    ProblemConfig config = rc.problem;
    int nx = loop_grid.first, ny = loop_grid.second;
    CandidateSystemFn candidate = candidate_system_via(
        [config, nx, ny, n = rc.n_samples](const SurfaceProfile& p) {
            return trace_at_top(solve_direct_fd(config, p, nx, ny), n);
        },
        config, j, rcond);

    ReconstructionResult state = art.linear;
    for (int k = 0; k < iters; ++k) {
        int before = state.iterations;
        state = nonlinear_correction(state, art.system, candidate, 1, 0.0);
        if (state.iterations == before) break;  // candidate solve failed; keep completed steps
        art.iterates.push_back(state);
    }
    return art;
}

void write_reconstruction_csv(const ReconstructArtifacts& art, const SurfaceProfile* exact,
                              const std::string& run_id, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open reconstruction CSV for writing: " + path);
    os << "# run " << run_id << "\n";
    os << "x,f_exact,f_linear";
    for (std::size_t k = 0; k < art.iterates.size(); ++k) os << ",f_iter" << k + 1;
    os << "\n";
    int n = static_cast<int>(art.linear.f_samples.size());
    std::vector<double> xs = sample_grid(art.linear.period, n);
    for (int s = 0; s < n; ++s) {
        os << fmt(xs[s]) << ',' << fmt(exact ? exact->f_at(xs[s]) : 0.0) << ','
           << fmt(art.linear.f_samples[s]);
        for (const auto& it : art.iterates) os << ',' << fmt(it.f_samples[s]);
        os << "\n";
    }
    if (!os) throw IoError("reconstruction CSV write failed: " + path);
}

void write_sigma_csv(const LinearizedSystem& sys, const std::string& run_id,
                     const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open diagnostics CSV for writing: " + path);
    os << "# run " << run_id << "\n";
    os << "k,sigma,kept\n";
    for (int k = 0; k < sys.sigma.size(); ++k)
        os << k << ',' << fmt(sys.sigma(k)) << ',' << (k < sys.kept_rank ? 1 : 0) << "\n";
    if (!os) throw IoError("diagnostics CSV write failed: " + path);
}

double rel_l2_error(const std::vector<double>& f_samples, const SurfaceProfile& exact) {
    int n = static_cast<int>(f_samples.size());
    std::vector<double> xs = sample_grid(exact.period, n);
    double d2 = 0.0, r2 = 0.0;
    for (int s = 0; s < n; ++s) {
        double t = exact.f_at(xs[s]);
        d2 += (f_samples[s] - t) * (f_samples[s] - t);
        r2 += t * t;
    }
    return r2 > 0.0 ? std::sqrt(d2 / r2) : std::sqrt(d2);
}

}  // namespace esurf
