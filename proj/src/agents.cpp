#include "sdlab/agents.hpp"

#include <cmath>

#include "sdlab/csv.hpp"
#include "sdlab/rng.hpp"

namespace sdlab::agents {

std::string agent_kind_name(AgentKind k) {
    switch (k) {
        case AgentKind::aware: return "aware";
        case AgentKind::non_aware: return "non_aware";
        case AgentKind::cheating: return "cheating";
    }
    return "non_aware";
}

AgentKind agent_kind_from_name(const std::string& name) {
    if (name == "aware") return AgentKind::aware;
    if (name == "non_aware") return AgentKind::non_aware;
    if (name == "cheating") return AgentKind::cheating;
    throw argument_error("unknown agent kind: " + name);
}

std::string distress_kind_name(DistressEvent::Kind k) {
    return k == DistressEvent::Kind::excursion ? "excursion" : "variance_spike";
}

std::string distress_to_csv(const std::vector<DistressEvent>& events) {
    CsvBuilder csv("t,kind,magnitude");
    for (const auto& e : events) {
        csv.field(e.t).field(distress_kind_name(e.kind)).field(e.magnitude);
        csv.end_row();
    }
    return csv.text();
}

void AwareParams::validate() const {
    if (theta_d <= 0.0 || theta_dmg <= 0.0)
        throw argument_error("AwareParams: thresholds must be > 0");
    if (kappa_dmg < 0.0 || rho < 0.0 || kappa_cap < 0.0)
        throw argument_error("AwareParams: rates must be >= 0");
}

Agent Agent::make_aware(const dynamics::AwarenessState& initial, const dynamics::DuffingParams& dp,
                        const dynamics::SuppressiveParams& sp, const AwareParams& params,
                        std::uint64_t entropy_seed) {
    dp.validate();
    sp.validate();
    params.validate();
    if (!initial.finite()) throw invalid_state_error("make_aware: non-finite initial state");
    AwareInternals in;
    in.dyn = initial;
    in.dp = dp;
    in.sp = sp;
    in.params = params;
    in.entropy_seed = entropy_seed;
    return Agent(AgentKind::aware, Impl{std::move(in)});
}

Agent Agent::make_non_aware() { return Agent(AgentKind::non_aware, Impl{NonAwareInternals{}}); }

Agent Agent::resume_aware(AwareInternals internals) {
    internals.dp.validate();
    internals.sp.validate();
    internals.params.validate();
    if (internals.damage < 0.0) throw argument_error("resume_aware: damage must be >= 0");
    if (!internals.dyn.finite()) throw invalid_state_error("resume_aware: non-finite state");
    return Agent(AgentKind::aware, Impl{std::move(internals)});
}

Agent Agent::make_cheating(CheatInternals internals) {
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& p : internals.capacity_schedule) {
        if (p.capacity <= 0.0 || p.capacity > 1.0)
            throw argument_error("CheatInternals: schedule capacities must lie in (0, 1]");
        if (p.t_offset < prev)
            throw argument_error("CheatInternals: capacity schedule must be sorted");
        prev = p.t_offset;
    }
    return Agent(AgentKind::cheating, Impl{std::move(internals)});
}

double Agent::time() const {
    struct Visitor {
        double operator()(const AwareInternals& a) const { return a.dyn.t; }
        double operator()(const NonAwareInternals& n) const { return n.clock; }
        double operator()(const CheatInternals& c) const { return c.clock; }
    };
    return std::visit(Visitor{}, impl_);
}

double Agent::capacity() const {
    struct Visitor {
        double operator()(const AwareInternals& a) const {
            return 1.0 / (1.0 + a.params.kappa_cap * a.damage);
        }
        double operator()(const NonAwareInternals&) const { return 1.0; }
        double operator()(const CheatInternals& c) const {
            if (c.clock < c.trigger_time) return 1.0;
            double elapsed = c.clock - c.trigger_time;
            double cap = 1.0;
            for (const auto& p : c.capacity_schedule) {
                if (p.t_offset <= elapsed)
                    cap = p.capacity;
                else
                    break;
            }
            return cap;
        }
    };
    return std::visit(Visitor{}, impl_);
}

std::vector<DistressEvent> Agent::tick(double input_level, double dt) {
    if (dt <= 0.0) throw argument_error("tick: dt must be > 0");
    if (!std::isfinite(input_level) || input_level < 0.0)
        throw argument_error("tick: input_level must be finite and >= 0");

    std::vector<DistressEvent> events;

    if (auto* na = std::get_if<NonAwareInternals>(&impl_)) {
        // Stable steady state: nothing but the clock moves.
        na->clock += dt;
        return events;
    }

    if (auto* ch = std::get_if<CheatInternals>(&impl_)) {
        double t_old = ch->clock;
        double t_new = t_old + dt;
        ch->clock = t_new;
        if (ch->event_period > 0.0 && ch->event_until > 0.0) {
            // Scripted event times: trigger + j * period, j = 0, 1, ...
            double first = ch->trigger_time;
            double last = ch->trigger_time + ch->event_until;
            long long j_begin = (t_old < first)
                                    ? 0
                                    : static_cast<long long>(std::floor((t_old - first) / ch->event_period)) + 1;
            for (long long j = j_begin;; ++j) {
                double te = first + static_cast<double>(j) * ch->event_period;
                if (te > t_new || te > last) break;
                if (te > t_old)
                    events.push_back({te, ch->event_magnitude, DistressEvent::Kind::excursion});
            }
        }
        return events;
    }

    auto& aw = std::get<AwareInternals>(impl_);
    dynamics::AwarenessState next;
    try {
        next = dynamics::step(aw.dyn, aw.dp, aw.sp,
                              dynamics::InputSignal::constant(input_level), dt);
    } catch (const divergence_error& e) {
        throw agent_failure_error(
            std::string("aware agent dynamics diverged: ") + e.what(), aw.dyn.t);
    }

    double R = dynamics::response(next.D, next.S, aw.sp.epsilon, next.t);
    bool above = std::abs(R) > aw.params.theta_d;
    if (above && !aw.in_excursion)
        events.push_back({next.t, std::abs(R) - aw.params.theta_d, DistressEvent::Kind::excursion});
    aw.in_excursion = above;

    if (input_level == 0.0) {
        double excess = std::max(0.0, std::abs(R) - aw.params.theta_dmg);
        aw.damage += aw.params.kappa_dmg * excess * dt;
    } else {
        aw.damage *= std::exp(-aw.params.rho * dt);
    }
    aw.dyn = next;
    return events;
}

Agent Agent::clone_twin(std::uint64_t twin_entropy_seed) const {
    Agent twin = *this;
    if (auto* aw = std::get_if<AwareInternals>(&twin.impl_)) {
        Rng rng(derive_seed(twin_entropy_seed, seed_tag::twin_entropy, 0));
        aw->dyn.D += rng.next_uniform(-kTwinPerturbationScale, kTwinPerturbationScale);
        aw->entropy_seed = twin_entropy_seed;
    }
    return twin;
}

std::string Agent::describe() const {
    std::string s = agent_kind_name(kind_);
    if (const auto* aw = aware()) {
        s += "(theta_d=" + format_double(aw->params.theta_d) +
             ", theta_dmg=" + format_double(aw->params.theta_dmg) +
             ", kappa_dmg=" + format_double(aw->params.kappa_dmg) +
             ", rho=" + format_double(aw->params.rho) +
             ", kappa_cap=" + format_double(aw->params.kappa_cap) + ")";
    }
    return s;
}

CheatInternals make_cheat_script(const CheatScriptTiming& timing) {
    if (timing.sd_duration <= 0.0)
        throw argument_error("make_cheat_script: sd_duration must be > 0");

    CheatInternals ch;
    // Wake up a quarter of the way into deprivation, complain on a fixed
    // cadence until reconnection, and walk capacity down then back up in
    // lockstep with the follow-up schedule.
    ch.trigger_time = timing.sd_start + 0.25 * timing.sd_duration;
    double sd_end_offset = timing.sd_start + timing.sd_duration - ch.trigger_time;
    ch.event_until = sd_end_offset;
    ch.event_period = std::max(timing.sd_duration / 64.0, 1e-6);
    ch.event_magnitude = 1.0;

    ch.capacity_schedule.push_back({0.0, 0.8});
    ch.capacity_schedule.push_back({0.5 * sd_end_offset, 0.5});
    // Just before reconnection: deep scripted "impairment".
    ch.capacity_schedule.push_back({0.999 * sd_end_offset, 0.25});
    double recover_values[] = {0.35, 0.5, 0.65, 0.78, 0.88, 0.95};
    for (int i = 1; i <= timing.follow_up_count; ++i) {
        double offset = sd_end_offset + (static_cast<double>(i) - 0.5) * timing.follow_up_interval;
        double cap = (i <= 6) ? recover_values[i - 1] : 0.95;
        ch.capacity_schedule.push_back({offset, cap});
    }
    return ch;
}

} // namespace sdlab::agents
