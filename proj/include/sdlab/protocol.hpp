#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdlab/agents.hpp"
#include "sdlab/battery.hpp"
#include "sdlab/dynamics.hpp"

namespace sdlab::protocol {

struct Thresholds {
    double theta_distress_rate = 0.01;  // events per time unit during deprivation
    double delta_min = 0.1;             // significant degradation fraction
    double trend_min = 0.6;             // recovery trend floor
    double epsilon_repro = 1e-3;        // twin score distance floor
};

struct ProtocolConfig {
    // Deprivation length heuristic: one subject-day is day_units reaction
    // periods, and the test spans k_days of them.
    double delta_t_re = 2e-4;
    long long day_units = 350'000;
    int k_days = 3;

    int follow_up_count = 6;
    double follow_up_interval = 0.0;  // 0 -> one deprivation-length apart
    double warmup_duration = 50.0;
    double nominal_input_level = 1.0;
    double tick_h = 0.01;

    // Trajectory recording and post-hoc variance-spike scan.
    double record_interval = 0.5;
    double spike_window = 5.0;
    double spike_factor = 4.0;

    std::vector<battery::TaskSpec> tasks = battery::default_tasks();
    Thresholds thresholds;

    std::uint64_t master_seed = 12345;
    std::uint64_t twin_entropy_seed = 67890;
    bool consent_acknowledged = false;

    void validate() const;
    double sd_duration_value() const;
    double effective_follow_up_interval() const;
};

// duration = k_days * day_units * delta_t_re
double sd_duration(double delta_t_re, long long k_days, long long day_units);

struct ProtocolRecord {
    agents::AgentKind agent_kind = agents::AgentKind::non_aware;
    std::string agent_descriptor;
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;

    battery::BatteryResult baseline;
    double sd_start = 0.0;
    double sd_end = 0.0;
    std::vector<agents::DistressEvent> distress;  // whole run, chronological
    dynamics::Trajectory trajectory;              // downsampled; aware agents only
    battery::BatteryResult post;
    battery::RecuperationCurve follow_ups;  // post battery first, then follow-ups

    // All administered batteries in slot order: baseline, post, follow-ups.
    std::vector<battery::BatteryResult> batteries;

    bool aborted = false;
    std::string abort_reason;

    // Events with sd_start <= t < sd_end.
    std::size_t distress_count_in_sd() const;
    double distress_rate_in_sd() const;
    std::vector<double> slot_aggregates() const;  // baseline, post, follow-ups
};

struct Verdict {
    bool a_distress = false;
    bool b_degradation = false;
    bool c_recuperation = false;
    bool d_irreproducible = false;
    bool pass = false;

    struct Metrics {
        double distress_rate = 0.0;
        double degradation = 0.0;
        double trend = 0.0;
        double recovered_fraction = 0.0;
        double twin_distance = 0.0;
    } metrics;

    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t twin_entropy_seed = 0;

    std::string to_json() const;
};

// Run the full deprivation protocol: warm-up, baseline battery, deprivation
// with monitoring, reconnection, immediate post battery, follow-up
// batteries. Bit-reproducible for a fixed config and seed. Dynamics
// divergence mid-run yields an aborted record with partial data.
ProtocolRecord run_protocol(agents::Agent agent, const ProtocolConfig& config);

// Judge criteria (a)-(d) from a subject record and its twin-control record.
Verdict evaluate(const ProtocolRecord& record, const ProtocolRecord& twin_record,
                 const ProtocolConfig& config);

// FNV-1a over the canonical config serialization (tool version excluded).
std::uint64_t config_hash(const ProtocolConfig& config);

} // namespace sdlab::protocol
