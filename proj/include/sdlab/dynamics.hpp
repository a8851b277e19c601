#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "sdlab/errors.hpp"

namespace sdlab::dynamics {

// Coupled awareness system:
//
//   D'' = -alpha D' - beta D - gamma D^3 + A sin(omega t)
//   S'  = C (I(t) - a S)
//   R   = S + D / (epsilon + S)
//
// D is a forced Duffing oscillator, S a first-order filter tracking the
// external input I, and R the composed response readout.

struct DuffingParams {
    double alpha = 0.3;  // damping, 1/time
    double beta = -1.0;  // linear stiffness, 1/time^2
    double gamma = 1.0;  // cubic stiffness
    double A = 0.5;      // forcing amplitude
    double omega = 1.2;  // forcing angular frequency, rad/time

    void validate() const;
};

struct SuppressiveParams {
    double C = 1.0;        // responsiveness rate, 1/time
    double a = 1.0;        // decay coefficient
    double epsilon = 0.1;  // response regularizer

    void validate() const;
};

struct AwarenessState {
    double t = 0.0;
    double D = 0.0;
    double D_dot = 0.0;
    double S = 0.0;

    bool finite() const;
};

struct Derivative {
    double dD = 0.0;
    double dD_dot = 0.0;
    double dS = 0.0;
};

// --- input signals -------------------------------------------------------

struct ZeroInput {};

struct ConstantInput {
    double level = 0.0;
};

// Evaluates to max(0, amplitude * sin(omega_in t + phase)); levels never
// go negative.
struct SinusoidInput {
    double amplitude = 0.0;
    double omega_in = 1.0;
    double phase = 0.0;
};

struct ScheduleSegment {
    double t_start = 0.0;
    double t_end = 0.0;  // half-open [t_start, t_end)
    double level = 0.0;
};

struct ScheduleInput {
    std::vector<ScheduleSegment> segments;  // sorted, non-overlapping
};

// Piecewise-constant noise: the value on cell k = floor(t / sample_interval)
// is a pure function of (seed, k), so evaluation order cannot perturb it.
struct SeededNoiseInput {
    double mean = 0.0;
    double std = 0.0;
    std::uint64_t seed = 0;
    double sample_interval = 1.0;
};

class InputSignal {
public:
    InputSignal() : v_(ZeroInput{}) {}

    static InputSignal zero();
    static InputSignal constant(double level);
    static InputSignal sinusoid(double amplitude, double omega_in, double phase);
    static InputSignal schedule(std::vector<ScheduleSegment> segments);
    static InputSignal seeded_noise(double mean, double std, std::uint64_t seed,
                                    double sample_interval);

    // Finite and >= 0 for any t >= 0.
    double value(double t) const;

    std::string describe() const;

    template <typename V>
    const V* get_if() const {
        return std::get_if<V>(&v_);
    }

private:
    using Variant =
        std::variant<ZeroInput, ConstantInput, SinusoidInput, ScheduleInput, SeededNoiseInput>;
    explicit InputSignal(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

// --- trajectory ----------------------------------------------------------

struct TrajectorySample {
    double t = 0.0;
    double D = 0.0;
    double D_dot = 0.0;
    double S = 0.0;
    double R = 0.0;
    double I = 0.0;
};

struct Trajectory {
    double h = 0.0;
    std::vector<TrajectorySample> samples;

    std::string to_csv() const;  // header t,D,D_dot,S,R,I
};

// Divergence out of simulate() carries whatever was integrated so far.
class simulation_divergence_error : public divergence_error {
public:
    simulation_divergence_error(const divergence_error& base, Trajectory partial)
        : divergence_error(base), partial_(std::move(partial)) {}
    const Trajectory& partial_trajectory() const { return partial_; }

private:
    Trajectory partial_;
};

// --- operations ----------------------------------------------------------

inline constexpr double kDivergenceBound = 1e12;
inline constexpr long long kDefaultMaxSteps = 50'000'000;

// Right-hand side of the coupled system at one instant.
Derivative derivative(const AwarenessState& state, const DuffingParams& dp,
                      const SuppressiveParams& sp, double input_value);

// R = S + D/(epsilon + S). t_context only flavors the singularity message.
double response(double D, double S, double epsilon,
                double t_context = std::numeric_limits<double>::quiet_NaN());

// One classical RK4 step of size h; input sampled exactly at t, t+h/2, t+h.
AwarenessState step(const AwarenessState& state, const DuffingParams& dp,
                    const SuppressiveParams& sp, const InputSignal& input, double h);

// Fixed-step integration over [t0, t0+T]; ceil(T/h)+1 samples including the
// initial row. Bit-reproducible for identical arguments.
Trajectory simulate(const AwarenessState& initial, const DuffingParams& dp,
                    const SuppressiveParams& sp, const InputSignal& input, double h, double T,
                    long long max_steps = kDefaultMaxSteps);

} // namespace sdlab::dynamics
