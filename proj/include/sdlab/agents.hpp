#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sdlab/dynamics.hpp"

namespace sdlab::agents {

enum class AgentKind { aware, non_aware, cheating };

std::string agent_kind_name(AgentKind k);
AgentKind agent_kind_from_name(const std::string& name);

struct DistressEvent {
    enum class Kind { excursion, variance_spike };

    double t = 0.0;
    double magnitude = 0.0;  // > 0
    Kind kind = Kind::excursion;
};

std::string distress_kind_name(DistressEvent::Kind k);
std::string distress_to_csv(const std::vector<DistressEvent>& events);

// Thresholds and rates for the coupled agent. Simulation-unit constants;
// every report echoes them.
struct AwareParams {
    double theta_d = 2.0;     // distress excursion threshold on |R|
    double theta_dmg = 2.5;   // damage accrual dead-band on |R|
    double kappa_dmg = 0.02;  // damage gain, 1/(R * time)
    double rho = 0.005;       // recovery rate under input, 1/time (0 = permanent damage)
    double kappa_cap = 2.0;   // capacity curvature

    void validate() const;
};

struct AwareInternals {
    dynamics::AwarenessState dyn;
    dynamics::DuffingParams dp;
    dynamics::SuppressiveParams sp;
    AwareParams params;
    double damage = 0.0;
    std::uint64_t entropy_seed = 0;
    bool in_excursion = false;  // excursion events fire on onset crossings
};

struct CheatSchedulePoint {
    double t_offset = 0.0;  // relative to trigger_time
    double capacity = 1.0;
};

// The forbidden construction: behavior is a pure function of the internal
// clock, so two instances always coincide exactly.
struct CheatInternals {
    double clock = 0.0;
    double trigger_time = 0.0;
    std::vector<CheatSchedulePoint> capacity_schedule;  // sorted by t_offset
    double event_period = 4.0;     // scripted distress cadence after trigger
    double event_until = 0.0;      // offset from trigger where events stop
    double event_magnitude = 1.0;
};

struct NonAwareInternals {
    double clock = 0.0;
};

class Agent {
public:
    static Agent make_aware(const dynamics::AwarenessState& initial,
                            const dynamics::DuffingParams& dp,
                            const dynamics::SuppressiveParams& sp, const AwareParams& params,
                            std::uint64_t entropy_seed);
    static Agent make_non_aware();
    static Agent make_cheating(CheatInternals internals);

    // Rebuild an aware agent from a saved internal snapshot.
    static Agent resume_aware(AwareInternals internals);

    AgentKind kind() const { return kind_; }
    double time() const;

    // Latent cognitive capacity in (0, 1]; the quantity the battery probes.
    double capacity() const;

    // Advance the agent by one step of size dt under the given input level.
    // input_level == 0 is effective deprivation.
    std::vector<DistressEvent> tick(double input_level, double dt);

    // Identical parameters and initial state; the aware twin's initial D is
    // micro-perturbed by a seeded draw in [-1e-6, 1e-6]. Non-aware and
    // cheating twins are exact copies (they consume no entropy).
    Agent clone_twin(std::uint64_t twin_entropy_seed) const;

    const AwareInternals* aware() const { return std::get_if<AwareInternals>(&impl_); }
    const CheatInternals* cheat() const { return std::get_if<CheatInternals>(&impl_); }

    std::string describe() const;

private:
    using Impl = std::variant<AwareInternals, NonAwareInternals, CheatInternals>;
    Agent(AgentKind kind, Impl impl) : kind_(kind), impl_(std::move(impl)) {}

    AgentKind kind_;
    Impl impl_;
};

inline constexpr double kTwinPerturbationScale = 1e-6;

// Timing knowledge a scripted cheater bakes into its clock: when deprivation
// starts, how long it lasts, and when the follow-up checks land.
struct CheatScriptTiming {
    double sd_start = 0.0;
    double sd_duration = 0.0;
    double follow_up_interval = 0.0;
    int follow_up_count = 0;
};

// Builds a clock-driven script that mimics distress, post-deprivation
// capacity loss, and staged recovery.
CheatInternals make_cheat_script(const CheatScriptTiming& timing);

} // namespace sdlab::agents
