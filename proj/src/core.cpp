#include "esurf/core.hpp"

#include <algorithm>
#include <cmath>

namespace esurf {

namespace {

bool all_finite(std::initializer_list<double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void ProblemConfig::validate() const {
    if (!all_finite({lambda_lame, mu, rho0, rho1, omega, period, a, b}))
        throw ConfigError("non-finite configuration value");
    if (mu <= 0.0) throw ConfigError("mu must be positive");
    if (lambda_lame + mu <= 0.0) throw ConfigError("lambda + mu must be positive");
    if (rho0 <= 0.0) throw ConfigError("rho0 must be positive");
    if (rho1 < rho0) throw ConfigError("rho1 must be at least rho0");
    if (period <= 0.0) throw ConfigError("period must be positive");
    if (omega <= 0.0) throw ConfigError("omega must be positive");
    if (!(0.0 < b && b < a)) throw ConfigError("heights must satisfy 0 < b < a");
}

Wavenumbers derive_wavenumbers(const ProblemConfig& config) {
    config.validate();
    Wavenumbers wn;
    wn.kappa1 = config.omega * std::sqrt(config.rho0 / (config.lambda_lame + 2.0 * config.mu));
    wn.kappa2 = config.omega * std::sqrt(config.rho0 / config.mu);
    wn.eta1 = config.omega * std::sqrt(config.rho1 / (config.lambda_lame + 2.0 * config.mu));
    wn.eta2 = config.omega * std::sqrt(config.rho1 / config.mu);
    wn.wavelen1 = 2.0 * pi / wn.kappa1;
    wn.wavelen2 = 2.0 * pi / wn.kappa2;
    return wn;
}

ModeGrid mode_grid(const ProblemConfig& config, const Wavenumbers& wn, int n_max) {
    ModeGrid grid;
    grid.N1 = static_cast<int>(std::floor(wn.eta1 * config.period / (2.0 * pi)));
    grid.N2 = static_cast<int>(std::floor(wn.eta2 * config.period / (2.0 * pi)));
    grid.n_max = n_max < 0 ? std::max(grid.N1, grid.N2) : n_max;
    grid.period = config.period;
    return grid;
}

std::vector<double> sample_grid(double period, int n) {
    std::vector<double> xs(n);
    for (int i = 1; i <= n; ++i) xs[i - 1] = -period / 2.0 + i * period / n;
    return xs;
}

std::vector<cd> dft_analyze(const std::vector<cd>& samples, double period, int N) {
    int n = static_cast<int>(samples.size());
    if (n < 2 * N + 1) throw ConfigError("too few samples for requested bandwidth");
    std::vector<cd> coeffs(2 * N + 1);
    const cd mi(0.0, -1.0);
    for (int m = -N; m <= N; ++m) {
        double alpha = 2.0 * pi * m / period;
        cd acc = 0.0;
        for (int i = 1; i <= n; ++i) {
            double x = -period / 2.0 + i * period / n;
            acc += samples[i - 1] * std::exp(mi * (alpha * x));
        }
        coeffs[m + N] = acc / static_cast<double>(n);
    }
    return coeffs;
}

std::vector<cd> dft_synthesize(const std::vector<cd>& coeffs, double period, int n_samples) {
    int N = (static_cast<int>(coeffs.size()) - 1) / 2;
    std::vector<cd> samples(n_samples, cd(0.0));
    const cd pi_i(0.0, 1.0);
    for (int i = 1; i <= n_samples; ++i) {
        double x = -period / 2.0 + i * period / n_samples;
        cd acc = 0.0;
        for (int m = -N; m <= N; ++m)
            acc += coeffs[m + N] * std::exp(pi_i * (2.0 * pi * m / period * x));
        samples[i - 1] = acc;
    }
    return samples;
}

double SurfaceProfile::g_at(double x) const {
    cd acc = 0.0;
    for (int m = -bandwidth; m <= bandwidth; ++m)
        acc += coeff(m) * std::exp(cd(0.0, 2.0 * pi * m / period * x));
    return acc.real();
}

double SurfaceProfile::dg_at(double x) const {
    cd acc = 0.0;
    for (int m = -bandwidth; m <= bandwidth; ++m) {
        double alpha = 2.0 * pi * m / period;
        acc += coeff(m) * cd(0.0, alpha) * std::exp(cd(0.0, alpha * x));
    }
    return acc.real();
}

double SurfaceProfile::ddg_at(double x) const {
    cd acc = 0.0;
    for (int m = -bandwidth; m <= bandwidth; ++m) {
        double alpha = 2.0 * pi * m / period;
        acc += coeff(m) * (-alpha * alpha) * std::exp(cd(0.0, alpha * x));
    }
    return acc.real();
}

double SurfaceProfile::max_abs_g() const {
    // dense scan; profiles are band-limited so 16 points per top mode suffice
    int n = std::max(512, 16 * bandwidth);
    double best = 0.0;
    for (int i = 0; i < n; ++i)
        best = std::max(best, std::abs(g_at(-period / 2.0 + i * period / n)));
    return best;
}

void SurfaceProfile::validate_against(const ProblemConfig& config) const {
    if (bandwidth < 0 || g_coeffs.size() != static_cast<std::size_t>(2 * bandwidth + 1))
        throw ConfigError("profile coefficient storage does not match its bandwidth");
    if (std::abs(period - config.period) > 1e-12 * config.period)
        throw ConfigError("profile period does not match configuration");
    if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
    if (epsilon * max_abs_g() >= config.b)
        throw ConfigError("surface reaches the slab: epsilon*max|g| >= b");
}

namespace {

SurfaceProfile make_profile(double period, int bandwidth, std::vector<cd> coeffs, int n_samples) {
    SurfaceProfile p;
    p.period = period;
    p.bandwidth = bandwidth;
    p.g_coeffs = std::move(coeffs);
    std::vector<cd> s = dft_synthesize(p.g_coeffs, period, n_samples);
    p.samples.resize(n_samples);
    for (int i = 0; i < n_samples; ++i) p.samples[i] = s[i].real();
    return p;
}

}  // namespace

double example2_exact(double x) {
    // reduce to the fundamental period [-1, 1]
    double t = std::remainder(x, 2.0);
    if (t < 0.0) return 1.0 - std::cos(2.0 * pi * t);
    return 0.5 - 0.5 * std::cos(2.0 * pi * t);
}

SurfaceProfile builtin_profile(ProfileKind kind, int n_samples, int bandwidth) {
    if (kind == ProfileKind::example1) {
        // g = 0.2 sin(a1 x) - sin(a2 x) + sin(a3 x) on period 3.1
        int M = 3;
        if (n_samples < 4 * M) throw ConfigError("too few samples for profile bandwidth");
        std::vector<cd> c(2 * M + 1, cd(0.0));
        auto set_sine = [&](int m, double amp) {
            c[m + M] = cd(0.0, -amp / 2.0);
            c[-m + M] = cd(0.0, amp / 2.0);
        };
        set_sine(1, 0.2);
        set_sine(2, -1.0);
        set_sine(3, 1.0);
        return make_profile(3.1, M, std::move(c), n_samples);
    }
    // example2: 1 - cos(2 pi x) on [-1, 0), 0.5 - 0.5 cos(2 pi x) on (0, 1].
    // Exact series: g0 = 3/4, g_{+-2} = -3/8, odd m: -2i/(pi m (m^2-4)),
    // even |m| >= 4: zero.
    int M = bandwidth < 0 ? 60 : bandwidth;
    if (n_samples < 4 * M) throw ConfigError("too few samples for profile bandwidth");
    std::vector<cd> c(2 * M + 1, cd(0.0));
    c[M] = 0.75;
    if (M >= 2) {
        c[2 + M] = -0.375;
        c[-2 + M] = -0.375;
    }
    for (int m = 1; m <= M; m += 2) {
        cd v(0.0, -2.0 / (pi * m * (m * m - 4.0)));
        c[m + M] = v;
        c[-m + M] = std::conj(v);
    }
    return make_profile(2.0, M, std::move(c), n_samples);
}

SurfaceProfile profile_roundtrip(const SurfaceProfile& profile) {
    int n = static_cast<int>(profile.samples.size());
    if (n < 2 * (2 * profile.bandwidth + 1))
        throw ConfigError("too few samples to resolve profile bandwidth");
    std::vector<cd> s(n);
    for (int i = 0; i < n; ++i) s[i] = profile.samples[i];
    SurfaceProfile out = profile;
    out.g_coeffs = dft_analyze(s, profile.period, profile.bandwidth);
    std::vector<cd> resampled = dft_synthesize(out.g_coeffs, profile.period, n);
    for (int i = 0; i < n; ++i) out.samples[i] = resampled[i].real();
    return out;
}

}  // namespace esurf
