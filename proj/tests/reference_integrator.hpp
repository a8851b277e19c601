#pragma once

// Independent high-accuracy reference integrator used as an oracle for the
// production fixed-step kernel. Dormand-Prince 5(4) with adaptive step
// control. The right-hand side is re-coded here on purpose; nothing in this
// header touches the library's stepping path.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

struct SysParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double A = 0.0;
    double omega = 0.0;
    double C = 1.0;
    double a = 1.0;
};

using Vec3 = std::array<double, 3>;  // D, D_dot, S
using InputFn = std::function<double(double)>;

inline Vec3 rhs(const SysParams& p, double t, const Vec3& y, const InputFn& input) {
    return {y[1],
            -p.alpha * y[1] - p.beta * y[0] - p.gamma * y[0] * y[0] * y[0] +
                p.A * std::sin(p.omega * t),
            p.C * (input(t) - p.a * y[2])};
}

// One embedded DP54 step: returns 5th-order solution and error estimate.
inline void dp54_step(const SysParams& p, const InputFn& input, double t, const Vec3& y, double h,
                      Vec3& y5, Vec3& err) {
    auto ax = [&](const Vec3& base, std::initializer_list<std::pair<double, const Vec3*>> terms) {
        Vec3 out = base;
        for (const auto& [c, k] : terms)
            for (int i = 0; i < 3; ++i) out[i] += h * c * (*k)[i];
        return out;
    };

    Vec3 k1 = rhs(p, t, y, input);
    Vec3 k2 = rhs(p, t + h / 5.0, ax(y, {{1.0 / 5.0, &k1}}), input);
    Vec3 k3 = rhs(p, t + 3.0 * h / 10.0, ax(y, {{3.0 / 40.0, &k1}, {9.0 / 40.0, &k2}}), input);
    Vec3 k4 = rhs(p, t + 4.0 * h / 5.0,
                  ax(y, {{44.0 / 45.0, &k1}, {-56.0 / 15.0, &k2}, {32.0 / 9.0, &k3}}), input);
    Vec3 k5 = rhs(p, t + 8.0 * h / 9.0,
                  ax(y, {{19372.0 / 6561.0, &k1},
                         {-25360.0 / 2187.0, &k2},
                         {64448.0 / 6561.0, &k3},
                         {-212.0 / 729.0, &k4}}),
                  input);
    Vec3 k6 = rhs(p, t + h,
                  ax(y, {{9017.0 / 3168.0, &k1},
                         {-355.0 / 33.0, &k2},
                         {46732.0 / 5247.0, &k3},
                         {49.0 / 176.0, &k4},
                         {-5103.0 / 18656.0, &k5}}),
                  input);
    y5 = ax(y, {{35.0 / 384.0, &k1},
                {500.0 / 1113.0, &k3},
                {125.0 / 192.0, &k4},
                {-2187.0 / 6784.0, &k5},
                {11.0 / 84.0, &k6}});
    Vec3 k7 = rhs(p, t + h, y5, input);

    // 4th-order comparison weights.
    const double b4[7] = {5179.0 / 57600.0, 0.0,           7571.0 / 16695.0, 393.0 / 640.0,
                          -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};
    Vec3 y4 = y;
    const Vec3* ks[7] = {&k1, &k2, &k3, &k4, &k5, &k6, &k7};
    for (int j = 0; j < 7; ++j)
        for (int i = 0; i < 3; ++i) y4[i] += h * b4[j] * (*ks[j])[i];
    for (int i = 0; i < 3; ++i) err[i] = y5[i] - y4[i];
}

inline Vec3 integrate(const SysParams& p, const InputFn& input, Vec3 y, double t0, double t1,
                      double tol) {
    double t = t0;
    double h = std::min(1e-3, t1 - t0);
    int rejects_in_a_row = 0;
    while (t < t1) {
        if (t + h > t1) h = t1 - t;
        Vec3 y_next, err;
        dp54_step(p, input, t, y, h, y_next, err);

        double err_norm = 0.0;
        for (int i = 0; i < 3; ++i) {
            double scale = tol + tol * std::max(std::abs(y[i]), std::abs(y_next[i]));
            double e = err[i] / scale;
            err_norm += e * e;
        }
        err_norm = std::sqrt(err_norm / 3.0);

        if (err_norm <= 1.0) {
            t += h;
            y = y_next;
            rejects_in_a_row = 0;
        } else if (++rejects_in_a_row > 60) {
            throw std::runtime_error("oracle integrator: step size collapsed");
        }
        double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (h < 1e-14) throw std::runtime_error("oracle integrator: step underflow");
    }
    return y;
}

} // namespace oracle
