#include "sdlab/chaos.hpp"

#include <cmath>
#include <numbers>

#include "sdlab/csv.hpp"

namespace sdlab::chaos {

namespace {

double state_distance(const dynamics::AwarenessState& a, const dynamics::AwarenessState& b) {
    double dD = a.D - b.D;
    double dV = a.D_dot - b.D_dot;
    double dS = a.S - b.S;
    return std::sqrt(dD * dD + dV * dV + dS * dS);
}

double field_value(const dynamics::TrajectorySample& s, TrajectoryField f) {
    return f == TrajectoryField::D ? s.D : s.R;
}

void apply_sweep_parameter(dynamics::DuffingParams& dp, dynamics::SuppressiveParams& sp,
                           SweepParameter param, double value) {
    switch (param) {
        case SweepParameter::A: dp.A = value; break;
        case SweepParameter::alpha: dp.alpha = value; break;
        case SweepParameter::C: sp.C = value; break;
        case SweepParameter::a: sp.a = value; break;
    }
}

SweepRow sweep_one_row(const dynamics::DuffingParams& dp_base,
                       const dynamics::SuppressiveParams& sp_base, SweepParameter param,
                       double value, double h, double T, const SweepOptions& opts) {
    SweepRow row;
    row.value = value;

    dynamics::DuffingParams dp = dp_base;
    dynamics::SuppressiveParams sp = sp_base;
    apply_sweep_parameter(dp, sp, param, value);

    const double section_period = 2.0 * std::numbers::pi / dp.omega;
    const double t_transient = opts.transient_fraction * T;

    dynamics::AwarenessState state;
    state.D = 0.1;  // off the unstable origin of the double well
    dynamics::InputSignal input = dynamics::InputSignal::zero();

    try {
        dp.validate();
        sp.validate();
        auto n_steps = static_cast<long long>(std::ceil(T / h - 1e-9));
        dynamics::AwarenessState prev = state;
        long long next_section = 1;
        for (long long i = 0; i < n_steps; ++i) {
            dynamics::AwarenessState next = dynamics::step(prev, dp, sp, input, h);
            next.t = static_cast<double>(i + 1) * h;
            // Strobe at t_k = k * 2pi/omega with linear interpolation.
            double t_sec = static_cast<double>(next_section) * section_period;
            while (t_sec <= next.t) {
                if (t_sec > prev.t && t_sec >= t_transient) {
                    double w = (t_sec - prev.t) / (next.t - prev.t);
                    double D_sec = prev.D + w * (next.D - prev.D);
                    row.abs_D.push_back(std::abs(D_sec));
                }
                ++next_section;
                t_sec = static_cast<double>(next_section) * section_period;
            }
            prev = next;
        }
    } catch (const sim_error& e) {
        row.diverged = true;
        row.error = e.what();
    }
    return row;
}

} // namespace

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::contracting: return "contracting";
        case Regime::neutral: return "neutral";
        case Regime::chaotic: return "chaotic";
    }
    return "neutral";
}

Regime classify_regime(double lambda_max, double threshold) {
    if (lambda_max > threshold) return Regime::chaotic;
    if (lambda_max < -threshold) return Regime::contracting;
    return Regime::neutral;
}

LyapunovEstimate lyapunov_max(const dynamics::DuffingParams& dp,
                              const dynamics::SuppressiveParams& sp,
                              const dynamics::InputSignal& input,
                              const dynamics::AwarenessState& initial, double h, double T,
                              const LyapunovOptions& opts) {
    dp.validate();
    sp.validate();
    if (h <= 0.0) throw argument_error("lyapunov_max: h must be > 0");
    if (T <= 0.0) throw argument_error("lyapunov_max: T must be > 0");
    if (opts.d0 < 1e-10 || opts.d0 > 1e-6)
        throw argument_error("lyapunov_max: d0 must lie in [1e-10, 1e-6]");
    if (opts.renorm_interval < h)
        throw argument_error("lyapunov_max: renorm_interval must be >= h");
    if (dp.A > 0.0) {
        double forcing_period = 2.0 * std::numbers::pi / dp.omega;
        if (T < 100.0 * forcing_period)
            throw argument_error("lyapunov_max: T must cover >= 100 forcing periods when A > 0");
    }

    const auto steps_per_interval = static_cast<long long>(std::llround(opts.renorm_interval / h));
    const double interval = static_cast<double>(steps_per_interval) * h;
    const auto n_intervals = static_cast<long long>(std::floor(T / interval + 1e-9));
    if (n_intervals < 2) throw argument_error("lyapunov_max: T too short for renorm interval");

    dynamics::AwarenessState ref = initial;
    dynamics::AwarenessState pert = initial;
    pert.D += opts.d0;  // separation seeded along D

    LyapunovEstimate est;
    est.horizon = T;
    est.renorm_interval = interval;
    est.d0 = opts.d0;

    const double t0 = initial.t;
    const double t_transient = opts.transient_fraction * T;
    double sum_log = 0.0;
    double t_accumulated = 0.0;
    long long step_count = 0;

    for (long long k = 0; k < n_intervals; ++k) {
        for (long long i = 0; i < steps_per_interval; ++i) {
            ref = dynamics::step(ref, dp, sp, input, h);
            pert = dynamics::step(pert, dp, sp, input, h);
            ++step_count;
            double t_now = t0 + static_cast<double>(step_count) * h;
            ref.t = t_now;
            pert.t = t_now;
        }
        double d = state_distance(ref, pert);
        if (d <= 0.0)
            throw invalid_state_error("lyapunov_max: trajectories coincided; cannot renormalize");
        double stretch = std::log(d / opts.d0);
        double elapsed = static_cast<double>(step_count) * h;
        if (elapsed > t_transient) {
            est.log_stretch.push_back(stretch);
            sum_log += stretch;
            t_accumulated += interval;
        }
        // Pull the perturbed copy back to distance d0 along the current
        // separation direction.
        double scale = opts.d0 / d;
        pert.D = ref.D + (pert.D - ref.D) * scale;
        pert.D_dot = ref.D_dot + (pert.D_dot - ref.D_dot) * scale;
        pert.S = ref.S + (pert.S - ref.S) * scale;
    }

    est.lambda_max = sum_log / t_accumulated;
    return est;
}

std::vector<VariancePoint> windowed_variance(const dynamics::Trajectory& traj,
                                             TrajectoryField field, double window) {
    if (traj.samples.size() < 2) throw argument_error("windowed_variance: trajectory too short");
    if (window < 10.0 * traj.h)
        throw argument_error("windowed_variance: window must be >= 10 h");
    double span = traj.samples.back().t - traj.samples.front().t;
    if (window > span)
        throw argument_error("windowed_variance: window longer than trajectory");

    auto per_window = static_cast<std::size_t>(std::llround(window / traj.h));
    std::vector<VariancePoint> out;
    std::size_t i = 0;
    while (i + per_window <= traj.samples.size()) {
        double mean = 0.0;
        for (std::size_t j = i; j < i + per_window; ++j)
            mean += field_value(traj.samples[j], field);
        mean /= static_cast<double>(per_window);
        double ss = 0.0;
        for (std::size_t j = i; j < i + per_window; ++j) {
            double dv = field_value(traj.samples[j], field) - mean;
            ss += dv * dv;
        }
        VariancePoint p;
        p.variance = ss / static_cast<double>(per_window - 1);
        p.t_center = 0.5 * (traj.samples[i].t + traj.samples[i + per_window - 1].t);
        out.push_back(p);
        i += per_window;
    }
    return out;
}

std::string variance_to_csv(const std::vector<VariancePoint>& series) {
    CsvBuilder csv("t_center,variance");
    for (const auto& p : series) {
        csv.field(p.t_center).field(p.variance);
        csv.end_row();
    }
    return csv.text();
}

SweepParameter sweep_parameter_from_name(const std::string& name) {
    if (name == "A") return SweepParameter::A;
    if (name == "alpha") return SweepParameter::alpha;
    if (name == "C") return SweepParameter::C;
    if (name == "a") return SweepParameter::a;
    throw argument_error("unknown sweep parameter: " + name);
}

std::string sweep_parameter_name(SweepParameter p) {
    switch (p) {
        case SweepParameter::A: return "A";
        case SweepParameter::alpha: return "alpha";
        case SweepParameter::C: return "C";
        case SweepParameter::a: return "a";
    }
    return "A";
}

std::vector<SweepRow> parameter_sweep_serial(const dynamics::DuffingParams& dp_base,
                                             const dynamics::SuppressiveParams& sp,
                                             SweepParameter param,
                                             const std::vector<double>& values, double h, double T,
                                             const SweepOptions& opts) {
    std::vector<SweepRow> rows(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        rows[i] = sweep_one_row(dp_base, sp, param, values[i], h, T, opts);
    return rows;
}

std::vector<SweepRow> parameter_sweep(const dynamics::DuffingParams& dp_base,
                                      const dynamics::SuppressiveParams& sp, SweepParameter param,
                                      const std::vector<double>& values, double h, double T,
                                      const SweepOptions& opts) {
    std::vector<SweepRow> rows(values.size());
    const auto n = static_cast<long long>(values.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] =
            sweep_one_row(dp_base, sp, param, values[static_cast<std::size_t>(i)], h, T, opts);
    return rows;
}

std::vector<SweepRow> amplitude_sweep(const dynamics::DuffingParams& dp_base,
                                      const dynamics::SuppressiveParams& sp,
                                      const std::vector<double>& A_range, double h, double T,
                                      const SweepOptions& opts) {
    for (std::size_t i = 1; i < A_range.size(); ++i)
        if (!(A_range[i] >= A_range[i - 1]))
            throw argument_error("amplitude_sweep: A_range must be sorted");
    for (double v : A_range)
        if (!std::isfinite(v)) throw argument_error("amplitude_sweep: A_range must be finite");
    return parameter_sweep(dp_base, sp, SweepParameter::A, A_range, h, T, opts);
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows, const std::string& param_name) {
    CsvBuilder csv(param_name + ",sample_index,abs_D");
    for (const auto& row : rows) {
        if (row.diverged) continue;
        for (std::size_t i = 0; i < row.abs_D.size(); ++i) {
            csv.field(row.value).field(static_cast<long long>(i)).field(row.abs_D[i]);
            csv.end_row();
        }
    }
    return csv.text();
}

std::string sweep_errors_to_csv(const std::vector<SweepRow>& rows, const std::string& param_name) {
    CsvBuilder csv(param_name + ",error");
    for (const auto& row : rows) {
        if (!row.diverged) continue;
        csv.field(row.value).field(row.error);
        csv.end_row();
    }
    return csv.text();
}

std::string LyapunovEstimate::to_json() const {
    std::string s = "{\n";
    s += "  \"lambda_max\": " + format_double(lambda_max) + ",\n";
    s += "  \"T\": " + format_double(horizon) + ",\n";
    s += "  \"renorm_interval\": " + format_double(renorm_interval) + ",\n";
    s += "  \"d0\": " + format_double(d0) + ",\n";
    s += "  \"log_stretch\": [";
    for (std::size_t i = 0; i < log_stretch.size(); ++i) {
        if (i) s += ", ";
        s += format_double(log_stretch[i]);
    }
    s += "]\n}\n";
    return s;
}

std::string RegimeReport::to_json() const {
    std::string s = "{\n";
    s += "  \"regime\": \"" + regime_name(regime) + "\",\n";
    s += "  \"lambda_max\": " + format_double(lambda_max) + ",\n";
    s += "  \"input\": \"" + input_description + "\",\n";
    s += "  \"r_variance\": [";
    for (std::size_t i = 0; i < r_variance.size(); ++i) {
        if (i) s += ", ";
        s += "[" + format_double(r_variance[i].t_center) + ", " +
             format_double(r_variance[i].variance) + "]";
    }
    s += "]\n}\n";
    return s;
}

} // namespace sdlab::chaos
