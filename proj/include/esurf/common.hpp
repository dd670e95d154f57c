#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <cstdint>

namespace esurf {

typedef std::complex<double> cd;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Bad or inconsistent run parameters.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A vertical wavenumber that must be inverted is (numerically) zero.
struct ResonanceError : std::runtime_error {
    explicit ResonanceError(const std::string& what) : std::runtime_error(what) {}
};

// A mode-coupling determinant that must be inverted is (numerically) zero.
struct SingularModeError : std::runtime_error {
    explicit SingularModeError(const std::string& what) : std::runtime_error(what) {}
};

// File or stream failure.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// sqrt(k^2 - a^2) on the principal branch: positive real for propagating
// modes, +i * positive real for evanescent ones.
inline cd vertical_root(double k, double alpha) {
    return std::sqrt(cd(k * k - alpha * alpha, 0.0));
}

// (e^z - 1)/z, stable at z = 0.
inline cd phi1(cd z) {
    if (std::abs(z) < 1e-4) {
        // series up to z^4: error < 1e-22 inside the cutoff
        return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)));
    }
    return (std::exp(z) - 1.0) / z;
}

// (e^z - 1 - z)/z^2, stable at z = 0.
inline cd phi2(cd z) {
    if (std::abs(z) < 1e-3) {
        // series up to z^5: error < 1e-21 inside the cutoff
        return 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z * (1.0 / 120.0 + z * (1.0 / 720.0 + z / 5040.0))));
    }
    return (std::exp(z) - 1.0 - z) / (z * z);
}

// sin(z)/z, stable at z = 0.
inline cd sinc(cd z) {
    if (std::abs(z) < 1e-4) {
        cd z2 = z * z;
        return 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0);
    }
    return std::sin(z) / z;
}

// splitmix64 step; used to derive independent seeds for grid runs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace esurf
