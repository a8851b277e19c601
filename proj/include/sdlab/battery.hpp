#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdlab/agents.hpp"

namespace sdlab::battery {

enum class TaskKind { latency, multistage, reconstruction };

std::string task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& name);

struct TaskSpec {
    TaskKind kind = TaskKind::latency;
    double difficulty = 1.0;
    int repetitions = 5;      // >= 3
    double noise_std = 0.01;  // >= 0

    void validate() const;
};

std::vector<TaskSpec> default_tasks();

struct BatteryResult {
    double t_admin = 0.0;
    std::vector<TaskKind> task_kinds;
    std::vector<double> task_scores;  // normalized, one per task, in [0, 1]
    double aggregate = 0.0;           // mean of task scores
    std::uint64_t seed = 0;
};

struct RecuperationCurve {
    // First point is the immediate post-deprivation battery; times strictly
    // increasing.
    std::vector<std::pair<double, double>> points;  // (t_admin, aggregate)
    double baseline = 0.0;
};

// Noiseless score for one task at capacity c.
double base_score(TaskKind kind, double difficulty, double capacity);

// Administer the battery against the agent's current capacity. The agent is
// read, never mutated; noise comes only from the administration-slot seed.
BatteryResult administer(const std::vector<TaskSpec>& tasks, const agents::Agent& agent,
                         std::uint64_t seed);

// (baseline - post) / baseline; may be negative.
double degradation(const BatteryResult& baseline, const BatteryResult& post);

struct RecoveryMetrics {
    bool applicable = false;  // false when there was no degradation to recover from
    double trend = 0.0;       // rank correlation of score vs slot index
    double recovered_fraction = 0.0;  // clamped to [0, 1.5]
    std::optional<double> time_to_90pct;
};

RecoveryMetrics recovery_metrics(const RecuperationCurve& curve);

// Spearman rank correlation with average ranks for ties; 0 when either
// side has no variation.
double rank_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

std::string battery_results_to_csv(const std::vector<BatteryResult>& slots);

} // namespace sdlab::battery
