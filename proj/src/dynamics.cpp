#include "sdlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdlab/csv.hpp"
#include "sdlab/rng.hpp"

namespace sdlab::dynamics {

namespace {

bool all_finite(double a, double b, double c) {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}

bool within_bounds(const AwarenessState& s) {
    return std::abs(s.D) <= kDivergenceBound && std::abs(s.D_dot) <= kDivergenceBound &&
           std::abs(s.S) <= kDivergenceBound;
}

last_finite_state snapshot(const AwarenessState& s) {
    return last_finite_state{s.t, s.D, s.D_dot, s.S};
}

} // namespace

void DuffingParams::validate() const {
    if (!all_finite(alpha, beta, gamma) || !std::isfinite(A) || !std::isfinite(omega))
        throw argument_error("DuffingParams: all coefficients must be finite");
    if (alpha < 0.0) throw argument_error("DuffingParams: alpha must be >= 0");
    if (omega < 0.0) throw argument_error("DuffingParams: omega must be >= 0");
}

void SuppressiveParams::validate() const {
    if (!all_finite(C, a, epsilon))
        throw argument_error("SuppressiveParams: all coefficients must be finite");
    if (C <= 0.0) throw argument_error("SuppressiveParams: C must be > 0");
    if (a <= 0.0) throw argument_error("SuppressiveParams: a must be > 0");
    if (epsilon <= 0.0) throw argument_error("SuppressiveParams: epsilon must be > 0");
}

bool AwarenessState::finite() const {
    return std::isfinite(t) && std::isfinite(D) && std::isfinite(D_dot) && std::isfinite(S);
}

// --- input signals -------------------------------------------------------

InputSignal InputSignal::zero() { return InputSignal(Variant{ZeroInput{}}); }

InputSignal InputSignal::constant(double level) {
    if (!std::isfinite(level) || level < 0.0)
        throw argument_error("ConstantInput: level must be finite and >= 0");
    return InputSignal(Variant{ConstantInput{level}});
}

InputSignal InputSignal::sinusoid(double amplitude, double omega_in, double phase) {
    if (!all_finite(amplitude, omega_in, phase))
        throw argument_error("SinusoidInput: parameters must be finite");
    if (amplitude < 0.0) throw argument_error("SinusoidInput: amplitude must be >= 0");
    return InputSignal(Variant{SinusoidInput{amplitude, omega_in, phase}});
}

InputSignal InputSignal::schedule(std::vector<ScheduleSegment> segments) {
    double prev_end = -std::numeric_limits<double>::infinity();
    for (const auto& seg : segments) {
        if (!all_finite(seg.t_start, seg.t_end, seg.level))
            throw argument_error("ScheduleInput: segment values must be finite");
        if (seg.level < 0.0) throw argument_error("ScheduleInput: levels must be >= 0");
        if (seg.t_end <= seg.t_start)
            throw argument_error("ScheduleInput: segment end must exceed start");
        if (seg.t_start < prev_end)
            throw argument_error("ScheduleInput: segments must be sorted and non-overlapping");
        prev_end = seg.t_end;
    }
    return InputSignal(Variant{ScheduleInput{std::move(segments)}});
}

InputSignal InputSignal::seeded_noise(double mean, double std, std::uint64_t seed,
                                      double sample_interval) {
    if (!std::isfinite(mean) || !std::isfinite(std) || !std::isfinite(sample_interval))
        throw argument_error("SeededNoiseInput: parameters must be finite");
    if (mean < 0.0 || std < 0.0)
        throw argument_error("SeededNoiseInput: mean and std must be >= 0");
    if (sample_interval <= 0.0)
        throw argument_error("SeededNoiseInput: sample_interval must be > 0");
    return InputSignal(Variant{SeededNoiseInput{mean, std, seed, sample_interval}});
}

double InputSignal::value(double t) const {
    struct Visitor {
        double t;
        double operator()(const ZeroInput&) const { return 0.0; }
        double operator()(const ConstantInput& c) const { return c.level; }
        double operator()(const SinusoidInput& s) const {
            return std::max(0.0, s.amplitude * std::sin(s.omega_in * t + s.phase));
        }
        double operator()(const ScheduleInput& sch) const {
            // Segments are sorted; first one whose end is past t decides.
            for (const auto& seg : sch.segments) {
                if (t < seg.t_start) return 0.0;
                if (t < seg.t_end) return seg.level;
            }
            return 0.0;
        }
        double operator()(const SeededNoiseInput& n) const {
            auto cell = static_cast<std::uint64_t>(std::floor(t / n.sample_interval));
            Rng rng(derive_seed(n.seed, seed_tag::input_noise, cell));
            return std::max(0.0, n.mean + n.std * rng.next_gaussian());
        }
    };
    double v = std::visit(Visitor{t}, v_);
    if (!std::isfinite(v))
        throw invalid_state_error("input signal evaluated non-finite at t=" + format_double(t));
    return v;
}

std::string InputSignal::describe() const {
    struct Visitor {
        std::string operator()(const ZeroInput&) const { return "zero"; }
        std::string operator()(const ConstantInput& c) const {
            return "constant(level=" + format_double(c.level) + ")";
        }
        std::string operator()(const SinusoidInput& s) const {
            return "sinusoid(amplitude=" + format_double(s.amplitude) +
                   ", omega=" + format_double(s.omega_in) + ", phase=" + format_double(s.phase) +
                   ")";
        }
        std::string operator()(const ScheduleInput& sch) const {
            return "schedule(" + std::to_string(sch.segments.size()) + " segments)";
        }
        std::string operator()(const SeededNoiseInput& n) const {
            return "seeded_noise(mean=" + format_double(n.mean) + ", std=" + format_double(n.std) +
                   ", seed=" + std::to_string(n.seed) + ")";
        }
    };
    return std::visit(Visitor{}, v_);
}

// --- operations ----------------------------------------------------------

Derivative derivative(const AwarenessState& state, const DuffingParams& dp,
                      const SuppressiveParams& sp, double input_value) {
    if (!state.finite() || !std::isfinite(input_value))
        throw invalid_state_error("derivative: non-finite state or input");
    if (input_value < 0.0) throw argument_error("derivative: input_value must be >= 0");

    Derivative d;
    d.dD = state.D_dot;
    d.dD_dot = -dp.alpha * state.D_dot - dp.beta * state.D - dp.gamma * state.D * state.D * state.D +
               dp.A * std::sin(dp.omega * state.t);
    d.dS = sp.C * (input_value - sp.a * state.S);
    return d;
}

double response(double D, double S, double epsilon, double t_context) {
    if (epsilon <= 0.0) throw argument_error("response: epsilon must be > 0");
    double denom = epsilon + S;
    if (denom == 0.0) {
        std::string where = std::isnan(t_context) ? "unknown time" : ("t=" + format_double(t_context));
        throw singularity_error("response: epsilon + S hit zero at " + where, t_context);
    }
    double r = S + D / denom;
    if (!std::isfinite(r))
        throw invalid_state_error("response: non-finite result");
    return r;
}

AwarenessState step(const AwarenessState& state, const DuffingParams& dp,
                    const SuppressiveParams& sp, const InputSignal& input, double h) {
    if (h <= 0.0) throw argument_error("step: h must be > 0");
    if (!state.finite()) throw invalid_state_error("step: non-finite state");

    auto rhs = [&](double t, double D, double D_dot, double S, double iv) {
        AwarenessState s{t, D, D_dot, S};
        return derivative(s, dp, sp, iv);
    };

    const double t = state.t;
    const double i0 = input.value(t);
    const double i1 = input.value(t + 0.5 * h);
    const double i2 = input.value(t + h);

    Derivative k1 = rhs(t, state.D, state.D_dot, state.S, i0);
    Derivative k2 = rhs(t + 0.5 * h, state.D + 0.5 * h * k1.dD, state.D_dot + 0.5 * h * k1.dD_dot,
                        state.S + 0.5 * h * k1.dS, i1);
    Derivative k3 = rhs(t + 0.5 * h, state.D + 0.5 * h * k2.dD, state.D_dot + 0.5 * h * k2.dD_dot,
                        state.S + 0.5 * h * k2.dS, i1);
    Derivative k4 =
        rhs(t + h, state.D + h * k3.dD, state.D_dot + h * k3.dD_dot, state.S + h * k3.dS, i2);

    AwarenessState next;
    next.t = t + h;
    next.D = state.D + h / 6.0 * (k1.dD + 2.0 * k2.dD + 2.0 * k3.dD + k4.dD);
    next.D_dot = state.D_dot + h / 6.0 * (k1.dD_dot + 2.0 * k2.dD_dot + 2.0 * k3.dD_dot + k4.dD_dot);
    next.S = state.S + h / 6.0 * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);

    if (!next.finite() || !within_bounds(next))
        throw divergence_error("step: state diverged after t=" + format_double(t), snapshot(state),
                               -1);
    return next;
}

Trajectory simulate(const AwarenessState& initial, const DuffingParams& dp,
                    const SuppressiveParams& sp, const InputSignal& input, double h, double T,
                    long long max_steps) {
    dp.validate();
    sp.validate();
    if (h <= 0.0) throw argument_error("simulate: h must be > 0");
    if (T <= 0.0) throw argument_error("simulate: T must be > 0");
    if (!initial.finite()) throw invalid_state_error("simulate: non-finite initial state");

    auto n_steps = static_cast<long long>(std::ceil(T / h - 1e-9));
    if (n_steps < 1) n_steps = 1;
    if (n_steps > max_steps)
        throw argument_error("simulate: T/h exceeds max-steps bound of " +
                             std::to_string(max_steps));

    Trajectory traj;
    traj.h = h;
    traj.samples.reserve(static_cast<std::size_t>(n_steps) + 1);

    const double t0 = initial.t;
    AwarenessState state = initial;

    auto push_sample = [&](const AwarenessState& s) {
        TrajectorySample row;
        row.t = s.t;
        row.D = s.D;
        row.D_dot = s.D_dot;
        row.S = s.S;
        row.I = input.value(s.t);
        row.R = response(s.D, s.S, sp.epsilon, s.t);
        traj.samples.push_back(row);
    };

    push_sample(state);
    for (long long i = 0; i < n_steps; ++i) {
        try {
            state = step(state, dp, sp, input, h);
        } catch (divergence_error& e) {
            e.set_step_index(i);
            throw simulation_divergence_error(e, std::move(traj));
        }
        // Anchor time to the grid so long runs do not accumulate drift.
        state.t = t0 + static_cast<double>(i + 1) * h;
        push_sample(state);
    }
    return traj;
}

std::string Trajectory::to_csv() const {
    CsvBuilder csv("t,D,D_dot,S,R,I");
    for (const auto& s : samples) {
        csv.field(s.t).field(s.D).field(s.D_dot).field(s.S).field(s.R).field(s.I);
        csv.end_row();
    }
    return csv.text();
}

} // namespace sdlab::dynamics
