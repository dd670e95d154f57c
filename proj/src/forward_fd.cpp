#include "esurf/forward.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace esurf {

std::vector<double> fd_weights(double z, const std::vector<double>& xs, int m) {
    int n = static_cast<int>(xs.size());
    if (n < m + 1) throw ConfigError("fd_weights: stencil smaller than derivative order");
    // Fornberg's recurrence; c[k][j] is the weight of node j for order k.
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0;
        double c5 = c4;
        c4 = xs[i] - z;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c[m];
}

namespace {

// Derivatives of the flattening map at (x, ytilde): y_tilde = b (y - f) /
// (b - f) squashes the gap onto the rectangle. A = ytilde_x, B = ytilde_y
// (a function of x alone), Bx = dB/dx, E = A_x + A A_ytilde, so that
// d_xx -> d_xx + 2A d_xy + A^2 d_yy + E d_y, d_yy -> B^2 d_yy,
// d_xy -> B d_xy + A B d_yy + Bx d_y in the transformed frame.
struct MapCoeffs {
    double A = 0.0, B = 1.0, Bx = 0.0, E = 0.0;
};

MapCoeffs map_coeffs(const SurfaceProfile& profile, double b, double x, double yt) {
    double f = profile.f_at(x);
    double df = profile.epsilon * profile.dg_at(x);
    double ddf = profile.epsilon * profile.ddg_at(x);
    double d = b - f;
    MapCoeffs m;
    m.B = b / d;
    m.Bx = b * df / (d * d);
    m.A = -df * (b - yt) / d;
    m.E = -(b - yt) * (ddf * d + 2.0 * df * df) / (d * d);
    return m;
}

}  // namespace

ForwardField solve_direct_fd(const ProblemConfig& config, const SurfaceProfile& profile,
                             int nx, int ny) {
    config.validate();
    profile.validate_against(config);
    if (nx < 9 || ny < 8) throw ConfigError("solve_direct_fd: grid too coarse to assemble");

    ForwardField field;
    if (nx % 2 == 0) {
        ++nx;
        field.warnings.push_back("nx bumped to odd for a symmetric discrete spectrum");
    }
    Wavenumbers wn = derive_wavenumbers(config);

    field.nx = nx;
    field.n_slab = std::max(6, static_cast<int>(std::lround((config.a - config.b) * ny / config.a)));
    field.n_gap = std::max(8, ny / 5);
    field.hx = config.period / nx;
    field.h_slab = (config.a - config.b) / field.n_slab;
    field.h_gap = config.b / field.n_gap;
    field.period = config.period;
    field.a = config.a;
    field.b = config.b;
    field.config = config;
    field.profile = profile;

    double min_wavelen = 2.0 * pi / std::max(wn.kappa2, wn.eta2);
    double coarsest = std::max(field.h_slab, field.hx);
    double ppw = min_wavelen / coarsest;
    if (ppw < 20.0 * (1.0 - 1e-9)) {
        field.warnings.push_back("resolution below 20 points per shear wavelength (" +
                                 std::to_string(ppw) + ")");
    }

    const int K = field.n_gap + field.n_slab;  // top row index
    const int n_nodes = (K + 1) * nx;
    const cd I(0.0, 1.0);
    double cp = config.lambda_lame + 2.0 * config.mu;
    double cs = config.mu;
    double cm = config.lambda_lame + config.mu;
    double w2 = config.omega * config.omega;

    // Outgoing-map kernel on the discrete top-row spectrum. The per-mode
    // 2x2 matrices come from unit probes of the verified spectral operator
    // (they are diagonal in mode index, so one probe per column suffices).
    int n_half = (nx - 1) / 2;
    ModeGrid fd_grid = mode_grid(config, wn, n_half);
    VerticalWavenumbers fd_vw = vertical_wavenumbers(wn, fd_grid, false);
    ModeCoefficients ones1("", config.a, n_half), zeros(" ", config.a, n_half);
    for (int n = -n_half; n <= n_half; ++n) ones1.set(n, cd(1.0));
    auto col0 = dtn_elastic(ones1, zeros, config, fd_grid, fd_vw);
    auto col1 = dtn_elastic(zeros, ones1, config, fd_grid, fd_vw);
    // G[d][r][c]: coupling of top-row traction component r at node i to
    // displacement component c at node m, d = (i - m) mod nx.
    std::vector<std::array<std::array<cd, 2>, 2>> G(nx);
    for (int d = 0; d < nx; ++d) {
        std::array<std::array<cd, 2>, 2> acc{};
        for (int n = -n_half; n <= n_half; ++n) {
            cd phase = std::exp(I * (2.0 * pi * n * d / double(nx))) / double(nx);
            acc[0][0] += col0.first.at(n) * phase;
            acc[1][0] += col0.second.at(n) * phase;
            acc[0][1] += col1.first.at(n) * phase;
            acc[1][1] += col1.second.at(n) * phase;
        }
        G[d] = acc;
    }

    std::vector<Eigen::Triplet<cd>> trips;
    trips.reserve(static_cast<std::size_t>(n_nodes) * 26 + static_cast<std::size_t>(nx) * nx * 4);
    auto add = [&](int row, int col, cd v) {
        if (v != cd(0.0)) trips.emplace_back(row, col, v);
    };
    auto id = [&](int i, int k, int c) { return field.idx((i % nx + nx) % nx, k, c); };

    // One-sided vertical first-derivative weights, reused for every column.
    std::vector<double> gap_nodes(5), slab_lo_nodes(5), slab_hi_nodes(5);
    for (int q = 0; q < 5; ++q) {
        gap_nodes[q] = (field.n_gap - 4 + q) * field.h_gap;
        slab_lo_nodes[q] = config.b + q * field.h_slab;
        slab_hi_nodes[q] = config.b + (field.n_slab - 4 + q) * field.h_slab;
    }
    std::vector<double> w_gap_d1 = fd_weights(config.b, gap_nodes, 1);
    std::vector<double> w_slab_d1lo = fd_weights(config.b, slab_lo_nodes, 1);
    std::vector<double> w_slab_d1hi = fd_weights(config.a, slab_hi_nodes, 1);

    // Vertical second-derivative windows per slab row, clamped to the slab
    // so their accuracy does not degrade at its edges.
    std::vector<int> slab_lo(K, 0);
    std::vector<std::vector<double>> slab_wyy(K);
    for (int k = field.n_gap + 1; k < K; ++k) {
        int lo = std::max(field.n_gap, std::min(k - 3, K - 6));
        std::vector<double> nodes(7);
        for (int q = 0; q < 7; ++q) nodes[q] = field.y_node(lo + q);
        slab_lo[k] = lo;
        slab_wyy[k] = fd_weights(field.y_node(k), nodes, 2);
    }

    double hg2 = field.h_gap * field.h_gap;
    double hx2 = field.hx * field.hx;

    for (int i = 0; i < nx; ++i) {
        double x = field.x_node(i);

        // rigid bottom row: the mapped surface is ytilde = 0
        add(id(i, 0, 0), id(i, 0, 0), cd(1.0));
        add(id(i, 0, 1), id(i, 0, 1), cd(1.0));

        // mapped gap interior, second order
        for (int k = 1; k < field.n_gap; ++k) {
            MapCoeffs mc = map_coeffs(profile, config.b, x, field.y_node(k));
            for (int c = 0; c < 2; ++c) {
                int row = id(i, k, c);
                int o = 1 - c;
                double cl = (c == 0) ? cp : cs;   // on the d_xx substitution
                double cv = (c == 0) ? cs : cp;   // on the physical d_yy
                // d_xx bracket acting on component c
                add(row, id(i - 1, k, c), cl / hx2);
                add(row, id(i + 1, k, c), cl / hx2);
                add(row, id(i, k, c), -2.0 * cl / hx2 + config.rho0 * w2);
                double mix_self = 2.0 * mc.A;
                for (int sx : {-1, 1})
                    for (int sy : {-1, 1}) {
                        double wgt = sx * sy / (4.0 * field.hx * field.h_gap);
                        add(row, id(i + sx, k + sy, c), cl * mix_self * wgt);
                        add(row, id(i + sx, k + sy, o), cm * mc.B * wgt);
                    }
                double dyy_self = cl * mc.A * mc.A + cv * mc.B * mc.B;
                add(row, id(i, k - 1, c), dyy_self / hg2);
                add(row, id(i, k + 1, c), dyy_self / hg2);
                add(row, id(i, k, c), -2.0 * dyy_self / hg2);
                add(row, id(i, k - 1, o), cm * mc.A * mc.B / hg2);
                add(row, id(i, k + 1, o), cm * mc.A * mc.B / hg2);
                add(row, id(i, k, o), -2.0 * cm * mc.A * mc.B / hg2);
                add(row, id(i, k + 1, c), cl * mc.E / (2.0 * field.h_gap));
                add(row, id(i, k - 1, c), -cl * mc.E / (2.0 * field.h_gap));
                add(row, id(i, k + 1, o), cm * mc.Bx / (2.0 * field.h_gap));
                add(row, id(i, k - 1, o), -cm * mc.Bx / (2.0 * field.h_gap));
            }
        }

        // traction continuity across the shared line on Gamma_b; the
        // tangential-derivative terms cancel between the sides, leaving
        // one-sided vertical derivatives only (mapped factor B below).
        {
            double B = map_coeffs(profile, config.b, x, config.b).B;
            for (int c = 0; c < 2; ++c) {
                int row = id(i, field.n_gap, c);
                double scale = (c == 0) ? cs : cp;
                for (int q = 0; q < 5; ++q) {
                    add(row, id(i, field.n_gap - 4 + q, c), scale * B * w_gap_d1[q]);
                    add(row, id(i, field.n_gap + q, c), -scale * w_slab_d1lo[q]);
                }
            }
        }

        // slab interior: second order in x, high-order vertical windows
        for (int k = field.n_gap + 1; k < K; ++k) {
            int lo = slab_lo[k];
            const std::vector<double>& wyy = slab_wyy[k];
            for (int c = 0; c < 2; ++c) {
                int row = id(i, k, c);
                int o = 1 - c;
                double cl = (c == 0) ? cp : cs;
                double cv = (c == 0) ? cs : cp;
                add(row, id(i - 1, k, c), cl / hx2);
                add(row, id(i + 1, k, c), cl / hx2);
                add(row, id(i, k, c), -2.0 * cl / hx2 + config.rho1 * w2);
                for (int q = 0; q < 7; ++q) add(row, id(i, lo + q, c), cv * wyy[q]);
                for (int sx : {-1, 1})
                    for (int sy : {-1, 1}) {
                        double wgt = sx * sy / (4.0 * field.hx * field.h_slab);
                        add(row, id(i + sx, k + sy, o), cm * wgt);
                    }
            }
        }

        // top row: reduced traction balanced against the outgoing map
        {
            int row0 = id(i, K, 0);
            int row1 = id(i, K, 1);
            for (int q = 0; q < 5; ++q) {
                add(row0, id(i, K - 4 + q, 0), cs * w_slab_d1hi[q]);
                add(row1, id(i, K - 4 + q, 1), cp * w_slab_d1hi[q]);
            }
            add(row1, id(i + 1, K, 0), cm / (2.0 * field.hx));
            add(row1, id(i - 1, K, 0), -cm / (2.0 * field.hx));
            for (int m = 0; m < nx; ++m) {
                int d = ((i - m) % nx + nx) % nx;
                add(row0, id(m, K, 0), -G[d][0][0]);
                add(row0, id(m, K, 1), -G[d][0][1]);
                add(row1, id(m, K, 0), -G[d][1][0]);
                add(row1, id(m, K, 1), -G[d][1][1]);
            }
        }
    }

    Eigen::SparseMatrix<cd> M(2 * n_nodes, 2 * n_nodes);
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(2 * n_nodes);
    cd h2 = tbc_sources(config, wn).h2;
    for (int i = 0; i < nx; ++i) rhs(id(i, K, 1)) = h2;

    Eigen::SparseLU<Eigen::SparseMatrix<cd>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(M);
    lu.factorize(M);
    if (lu.info() != Eigen::Success)
        throw SingularModeError("direct solver factorization failed");
    Eigen::VectorXcd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SingularModeError("direct solver back-solve failed");

    field.u.assign(sol.data(), sol.data() + sol.size());
    return field;
}

FarFieldRecord trace_at_top(const ForwardField& field, int n_samples) {
    if (n_samples < 1) throw ConfigError("trace_at_top: need at least one sample");
    FarFieldRecord rec;
    rec.xs = sample_grid(field.period, n_samples);
    rec.u1.resize(rec.xs.size());
    rec.u2.resize(rec.xs.size());
    int K = field.rows() - 1;
    for (std::size_t s = 0; s < rec.xs.size(); ++s) {
        double t = (rec.xs[s] + field.period / 2.0) / field.hx;
        int i0 = static_cast<int>(std::floor(t));
        double fr = t - i0;
        int ia = (i0 % field.nx + field.nx) % field.nx;
        int ib = (ia + 1) % field.nx;
        rec.u1[s] = (1.0 - fr) * field.at(ia, K, 0) + fr * field.at(ib, K, 0);
        rec.u2[s] = (1.0 - fr) * field.at(ia, K, 1) + fr * field.at(ib, K, 1);
    }
    return rec;
}

FarFieldRecord add_noise(const FarFieldRecord& rec, double delta, unsigned long long seed) {
    if (!(delta >= 0.0) || delta >= 1.0)
        throw ConfigError("add_noise: relative level must lie in [0, 1)");
    FarFieldRecord out = rec;
    out.delta = delta;
    out.seed = seed;
    if (delta == 0.0) return out;
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;  // uniform in [-1, 1)
    };
    for (std::size_t s = 0; s < out.u1.size(); ++s) {
        double r1 = unit();
        double r2 = unit();
        out.u1[s] *= 1.0 + delta * r1;
        out.u2[s] *= 1.0 + delta * r2;
    }
    return out;
}

void write_field_dump(const ForwardField& field, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open field dump for writing: " + path);
    const char magic[4] = {'E', 'S', 'F', 'D'};
    os.write(magic, 4);
    auto put_i32 = [&os](std::int32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&os](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    put_i32(1);
    put_i32(field.nx);
    put_i32(field.n_gap);
    put_i32(field.n_slab);
    put_f64(field.period);
    put_f64(field.a);
    put_f64(field.b);
    put_f64(field.hx);
    put_f64(field.h_gap);
    put_f64(field.h_slab);
    for (int k = 0; k < field.rows(); ++k)
        for (int i = 0; i < field.nx; ++i)
            for (int c = 0; c < 2; ++c) {
                cd v = field.at(i, k, c);
                put_f64(v.real());
                put_f64(v.imag());
            }
    if (!os) throw IoError("field dump write failed: " + path);
}

}  // namespace esurf
