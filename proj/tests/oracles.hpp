#pragma once

// Independent numerical oracles used by the tests: plain ODE integrators
// that know nothing about the closed forms they check.

#include "esurf/common.hpp"

#include <array>
#include <functional>
#include <vector>

namespace oracle {

using esurf::cd;

// One RK4 trajectory of psi'' + gamma^2 psi = 0 from y0 to y1 (either
// direction), starting at (psi0, dpsi0). Returns (psi, psi') at y1.
inline std::array<cd, 2> rk4_helmholtz(cd psi0, cd dpsi0, cd gamma2, double y0, double y1,
                                       int steps) {
    cd y[2] = {psi0, dpsi0};
    double h = (y1 - y0) / steps;
    auto f = [&](const cd in[2], cd out[2]) {
        out[0] = in[1];
        out[1] = -gamma2 * in[0];
    };
    for (int s = 0; s < steps; ++s) {
        cd k1[2], k2[2], k3[2], k4[2], tmp[2];
        f(y, k1);
        for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        f(tmp, k2);
        for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        f(tmp, k3);
        for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * k3[i];
        f(tmp, k4);
        for (int i = 0; i < 2; ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return {y[0], y[1]};
}

// Final value problem of the slab: psi(a) = phi_hat,
// psi'(a) = i beta_hat phi_hat + g_hat, integrated down to y.
inline std::array<cd, 2> slab_final_value(cd phi_hat, cd g_hat, cd beta_hat, cd gamma, double a,
                                          double y, int steps = 4000) {
    cd dpsi_a = cd(0.0, 1.0) * beta_hat * phi_hat + g_hat;
    return rk4_helmholtz(phi_hat, dpsi_a, gamma * gamma, a, y, steps);
}

// Two-point boundary value problem on (0, h):
//   u'' + beta^2 u = v,  u'(0) = r,  u'(h) - i beta u(h) = s,
// solved by shooting: integrate the homogeneous and one particular RK4
// trajectory from 0, then fix u(0) from the condition at h.
inline std::vector<std::array<cd, 2>> shoot_two_point(cd r, cd s, cd beta,
                                                      const std::function<cd(double)>& vat,
                                                      double h, int steps = 2048) {
    double dy = h / steps;
    auto integrate = [&](cd u0, cd du0, bool particular) {
        std::vector<std::array<cd, 2>> out(steps + 1);
        cd y[2] = {u0, du0};
        out[0] = {y[0], y[1]};
        auto f = [&](double yy, const cd in[2], cd o[2]) {
            o[0] = in[1];
            o[1] = -beta * beta * in[0] + (particular ? vat(yy) : cd(0.0));
        };
        for (int st = 0; st < steps; ++st) {
            double yy = st * dy;
            cd k1[2], k2[2], k3[2], k4[2], tmp[2];
            f(yy, y, k1);
            for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.5 * dy * k1[i];
            f(yy + 0.5 * dy, tmp, k2);
            for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.5 * dy * k2[i];
            f(yy + 0.5 * dy, tmp, k3);
            for (int i = 0; i < 2; ++i) tmp[i] = y[i] + dy * k3[i];
            f(yy + dy, tmp, k4);
            for (int i = 0; i < 2; ++i)
                y[i] += (dy / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            out[st + 1] = {y[0], y[1]};
        }
        return out;
    };
    // particular trajectory with u(0) = 0, u'(0) = r, plus c * homogeneous
    // with w(0) = 1, w'(0) = 0; c chosen to meet the radiation row at h
    auto part = integrate(0.0, r, true);
    auto hom = integrate(1.0, 0.0, false);
    const cd I(0.0, 1.0);
    cd res_p = part[steps][1] - I * beta * part[steps][0];
    cd res_h = hom[steps][1] - I * beta * hom[steps][0];
    cd c = (s - res_p) / res_h;
    std::vector<std::array<cd, 2>> out(steps + 1);
    for (int i = 0; i <= steps; ++i)
        out[i] = {part[i][0] + c * hom[i][0], part[i][1] + c * hom[i][1]};
    return out;
}

}  // namespace oracle
