#pragma once

#include <string>
#include <vector>

#include "sdlab/dynamics.hpp"

namespace sdlab::chaos {

// Largest Lyapunov exponent by two-trajectory renormalization: run a
// reference and a perturbed copy, rescale their separation back to d0
// every renorm_interval, and average the accumulated log-stretches.
struct LyapunovEstimate {
    double lambda_max = 0.0;       // 1/time
    double horizon = 0.0;          // T
    double renorm_interval = 0.0;
    double d0 = 0.0;
    std::vector<double> log_stretch;  // post-transient per-interval log(d_i/d0)

    std::string to_json() const;
};

enum class Regime { contracting, neutral, chaotic };

std::string regime_name(Regime r);

inline constexpr double kLambdaThreshold = 0.01;

Regime classify_regime(double lambda_max, double threshold = kLambdaThreshold);

struct VariancePoint {
    double t_center = 0.0;
    double variance = 0.0;
};

struct RegimeReport {
    Regime regime = Regime::neutral;
    double lambda_max = 0.0;
    std::vector<VariancePoint> r_variance;
    std::string input_description;

    std::string to_json() const;
};

enum class TrajectoryField { D, R };

struct LyapunovOptions {
    double renorm_interval = 1.0;
    double d0 = 1e-8;
    double transient_fraction = 0.1;  // discarded before accumulation
};

// Transient (first transient_fraction of T) is evolved but not accumulated.
// Preconditions: d0 in [1e-10, 1e-6]; when A > 0, T >= 100 forcing periods.
LyapunovEstimate lyapunov_max(const dynamics::DuffingParams& dp,
                              const dynamics::SuppressiveParams& sp,
                              const dynamics::InputSignal& input,
                              const dynamics::AwarenessState& initial, double h, double T,
                              const LyapunovOptions& opts = {});

// Unbiased sample variance over non-overlapping windows.
std::vector<VariancePoint> windowed_variance(const dynamics::Trajectory& traj,
                                             TrajectoryField field, double window);

std::string variance_to_csv(const std::vector<VariancePoint>& series);

// --- parameter sweeps ----------------------------------------------------

// One row per parameter value: post-transient Poincare-section samples of
// |D| strobed at forcing phase omega t = 0 mod 2pi. Divergence is recorded
// on the row and the sweep continues.
struct SweepRow {
    double value = 0.0;
    std::vector<double> abs_D;  // section samples, chronological
    bool diverged = false;
    std::string error;
};

enum class SweepParameter { A, alpha, C, a };

SweepParameter sweep_parameter_from_name(const std::string& name);
std::string sweep_parameter_name(SweepParameter p);

struct SweepOptions {
    double transient_fraction = 0.3;
};

// Serial reference implementation; kept alongside the parallel kernel so
// results can be cross-checked and benchmarked.
std::vector<SweepRow> parameter_sweep_serial(const dynamics::DuffingParams& dp_base,
                                             const dynamics::SuppressiveParams& sp,
                                             SweepParameter param,
                                             const std::vector<double>& values, double h, double T,
                                             const SweepOptions& opts = {});

// OpenMP-parallel over rows; row contents are identical to the serial
// kernel regardless of thread count.
std::vector<SweepRow> parameter_sweep(const dynamics::DuffingParams& dp_base,
                                      const dynamics::SuppressiveParams& sp, SweepParameter param,
                                      const std::vector<double>& values, double h, double T,
                                      const SweepOptions& opts = {});

std::vector<SweepRow> amplitude_sweep(const dynamics::DuffingParams& dp_base,
                                      const dynamics::SuppressiveParams& sp,
                                      const std::vector<double>& A_range, double h, double T,
                                      const SweepOptions& opts = {});

// header <param>,sample_index,abs_D
std::string sweep_to_csv(const std::vector<SweepRow>& rows, const std::string& param_name);
std::string sweep_errors_to_csv(const std::vector<SweepRow>& rows, const std::string& param_name);

} // namespace sdlab::chaos
