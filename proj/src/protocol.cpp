#include "sdlab/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "sdlab/chaos.hpp"
#include "sdlab/csv.hpp"
#include "sdlab/rng.hpp"

namespace sdlab::protocol {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// Whole-run driver state shared by the phase helpers.
struct RunState {
    agents::Agent agent;
    const ProtocolConfig& config;
    ProtocolRecord& record;
    long long step_index = 0;
    long long record_every = 1;
    bool record_trajectory = false;
};

void tick_phase(RunState& rs, double input_level, long long n_steps) {
    const double h = rs.config.tick_h;
    for (long long i = 0; i < n_steps; ++i) {
        auto events = rs.agent.tick(input_level, h);
        for (auto& e : events) rs.record.distress.push_back(e);
        ++rs.step_index;
        if (rs.record_trajectory && rs.step_index % rs.record_every == 0) {
            const auto* aw = rs.agent.aware();
            dynamics::TrajectorySample row;
            row.t = aw->dyn.t;
            row.D = aw->dyn.D;
            row.D_dot = aw->dyn.D_dot;
            row.S = aw->dyn.S;
            row.R = dynamics::response(aw->dyn.D, aw->dyn.S, aw->sp.epsilon, aw->dyn.t);
            row.I = input_level;
            rs.record.trajectory.samples.push_back(row);
        }
    }
}

void push_initial_sample(RunState& rs, double input_level) {
    if (!rs.record_trajectory) return;
    const auto* aw = rs.agent.aware();
    dynamics::TrajectorySample row;
    row.t = aw->dyn.t;
    row.D = aw->dyn.D;
    row.D_dot = aw->dyn.D_dot;
    row.S = aw->dyn.S;
    row.R = dynamics::response(aw->dyn.D, aw->dyn.S, aw->sp.epsilon, aw->dyn.t);
    row.I = input_level;
    rs.record.trajectory.samples.push_back(row);
}

// Scan the deprivation window for response-variance spikes relative to the
// settled warm-up level and append them to the distress log.
void scan_variance_spikes(ProtocolRecord& record, const ProtocolConfig& config) {
    const auto& traj = record.trajectory;
    if (traj.samples.size() < 4) return;

    auto window_vars = [&](double t_lo, double t_hi) {
        dynamics::Trajectory part;
        part.h = traj.h;
        for (const auto& s : traj.samples)
            if (s.t >= t_lo && s.t < t_hi) part.samples.push_back(s);
        std::vector<chaos::VariancePoint> out;
        if (part.samples.size() < 2) return out;
        double span = part.samples.back().t - part.samples.front().t;
        if (config.spike_window > span || config.spike_window < 10.0 * part.h) return out;
        return chaos::windowed_variance(part, chaos::TrajectoryField::R, config.spike_window);
    };

    // Reference: second half of the warm-up, after S has settled.
    auto ref = window_vars(0.5 * record.trajectory.samples.front().t + 0.5 * record.sd_start,
                           record.sd_start);
    if (ref.empty()) return;
    std::vector<double> ref_vars;
    for (const auto& p : ref) ref_vars.push_back(p.variance);
    std::sort(ref_vars.begin(), ref_vars.end());
    double ref_median = ref_vars[ref_vars.size() / 2];
    double threshold = config.spike_factor * std::max(ref_median, 1e-12);

    for (const auto& p : window_vars(record.sd_start, record.sd_end)) {
        if (p.variance > threshold)
            record.distress.push_back(
                {p.t_center, p.variance - threshold, agents::DistressEvent::Kind::variance_spike});
    }
    std::stable_sort(record.distress.begin(), record.distress.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
}

std::string canonical_config_string(const ProtocolConfig& c) {
    std::string s;
    auto add = [&](const std::string& k, const std::string& v) { s += k + "=" + v + ";"; };
    add("delta_t_re", format_double(c.delta_t_re));
    add("day_units", std::to_string(c.day_units));
    add("k_days", std::to_string(c.k_days));
    add("follow_up_count", std::to_string(c.follow_up_count));
    add("follow_up_interval", format_double(c.effective_follow_up_interval()));
    add("warmup_duration", format_double(c.warmup_duration));
    add("nominal_input_level", format_double(c.nominal_input_level));
    add("tick_h", format_double(c.tick_h));
    add("record_interval", format_double(c.record_interval));
    add("spike_window", format_double(c.spike_window));
    add("spike_factor", format_double(c.spike_factor));
    for (const auto& t : c.tasks) {
        add("task", battery::task_kind_name(t.kind) + "/" + format_double(t.difficulty) + "/" +
                        std::to_string(t.repetitions) + "/" + format_double(t.noise_std));
    }
    add("theta_distress_rate", format_double(c.thresholds.theta_distress_rate));
    add("delta_min", format_double(c.thresholds.delta_min));
    add("trend_min", format_double(c.thresholds.trend_min));
    add("epsilon_repro", format_double(c.thresholds.epsilon_repro));
    add("master_seed", std::to_string(c.master_seed));
    add("twin_entropy_seed", std::to_string(c.twin_entropy_seed));
    return s;
}

} // namespace

double sd_duration(double delta_t_re, long long k_days, long long day_units) {
    if (!(delta_t_re > 0.0) || !std::isfinite(delta_t_re))
        throw argument_error("sd_duration: delta_t_re must be > 0");
    if (k_days < 1) throw argument_error("sd_duration: k_days must be >= 1");
    if (day_units < 1) throw argument_error("sd_duration: day_units must be >= 1");
    return static_cast<double>(k_days) * static_cast<double>(day_units) * delta_t_re;
}

void ProtocolConfig::validate() const {
    if (!(delta_t_re > 0.0)) throw argument_error("ProtocolConfig: delta_t_re must be > 0");
    if (k_days < 1) throw argument_error("ProtocolConfig: k_days must be >= 1");
    if (day_units < 1) throw argument_error("ProtocolConfig: day_units must be >= 1");
    if (follow_up_count < 3) throw argument_error("ProtocolConfig: follow_up_count must be >= 3");
    if (follow_up_interval < 0.0)
        throw argument_error("ProtocolConfig: follow_up_interval must be >= 0");
    if (tick_h <= 0.0) throw argument_error("ProtocolConfig: tick_h must be > 0");
    if (warmup_duration < 0.0) throw argument_error("ProtocolConfig: warmup must be >= 0");
    if (nominal_input_level < 0.0)
        throw argument_error("ProtocolConfig: nominal_input_level must be >= 0");
    if (record_interval < tick_h)
        throw argument_error("ProtocolConfig: record_interval must be >= tick_h");
    if (tasks.empty()) throw argument_error("ProtocolConfig: task list is empty");
    for (const auto& t : tasks) t.validate();
}

double ProtocolConfig::sd_duration_value() const {
    return sd_duration(delta_t_re, k_days, day_units);
}

double ProtocolConfig::effective_follow_up_interval() const {
    return follow_up_interval > 0.0 ? follow_up_interval : sd_duration_value();
}

std::uint64_t config_hash(const ProtocolConfig& config) {
    return fnv1a(canonical_config_string(config));
}

std::size_t ProtocolRecord::distress_count_in_sd() const {
    std::size_t n = 0;
    for (const auto& e : distress)
        if (e.t >= sd_start && e.t < sd_end) ++n;
    return n;
}

double ProtocolRecord::distress_rate_in_sd() const {
    double span = sd_end - sd_start;
    if (span <= 0.0) return 0.0;
    return static_cast<double>(distress_count_in_sd()) / span;
}

std::vector<double> ProtocolRecord::slot_aggregates() const {
    std::vector<double> out;
    out.push_back(baseline.aggregate);
    for (const auto& [t, score] : follow_ups.points) out.push_back(score);
    return out;
}

ProtocolRecord run_protocol(agents::Agent agent, const ProtocolConfig& config) {
    if (!config.consent_acknowledged)
        throw consent_error("run_protocol: refusing to start without acknowledged consent");
    config.validate();

    const double h = config.tick_h;
    auto steps_of = [&](double duration) {
        return std::max<long long>(1, std::llround(duration / h));
    };
    const long long warmup_steps = config.warmup_duration > 0.0 ? steps_of(config.warmup_duration)
                                                                : 0;
    const long long sd_steps = steps_of(config.sd_duration_value());
    const long long follow_steps = steps_of(config.effective_follow_up_interval());

    ProtocolRecord record;
    record.agent_kind = agent.kind();
    record.agent_descriptor = agent.describe();
    record.config_hash = config_hash(config);
    record.master_seed = config.master_seed;

    RunState rs{std::move(agent), config, record};
    rs.record_every = std::max<long long>(1, std::llround(config.record_interval / h));
    rs.record_trajectory = rs.agent.kind() == agents::AgentKind::aware;
    record.trajectory.h = static_cast<double>(rs.record_every) * h;

    auto slot_seed = [&](std::uint64_t slot) {
        return derive_seed(config.master_seed, seed_tag::battery_slot, slot);
    };

    try {
        push_initial_sample(rs, config.nominal_input_level);
        tick_phase(rs, config.nominal_input_level, warmup_steps);
        record.baseline = battery::administer(config.tasks, rs.agent, slot_seed(0));
        record.batteries.push_back(record.baseline);

        // One nominal tick separates the baseline battery from deprivation
        // onset so phase timestamps are strictly ordered.
        tick_phase(rs, config.nominal_input_level, 1);
        record.sd_start = rs.agent.time();
        tick_phase(rs, 0.0, sd_steps);
        record.sd_end = rs.agent.time();

        // Sensors reconnect; the battery runs immediately at that instant.
        record.post = battery::administer(config.tasks, rs.agent, slot_seed(1));
        record.batteries.push_back(record.post);
        record.follow_ups.baseline = record.baseline.aggregate;
        record.follow_ups.points.emplace_back(record.post.t_admin, record.post.aggregate);

        for (int i = 1; i <= config.follow_up_count; ++i) {
            tick_phase(rs, config.nominal_input_level, follow_steps);
            auto b = battery::administer(config.tasks, rs.agent,
                                         slot_seed(static_cast<std::uint64_t>(1 + i)));
            record.batteries.push_back(b);
            record.follow_ups.points.emplace_back(b.t_admin, b.aggregate);
        }

        if (rs.record_trajectory) scan_variance_spikes(record, config);
    } catch (const agent_failure_error& e) {
        record.aborted = true;
        record.abort_reason = e.what();
        return record;
    }
    return record;
}

Verdict evaluate(const ProtocolRecord& record, const ProtocolRecord& twin_record,
                 const ProtocolConfig& config) {
    const std::uint64_t expect_hash = config_hash(config);
    if (record.config_hash != expect_hash || twin_record.config_hash != expect_hash)
        throw incomparable_records_error("evaluate: records were not produced under this config");
    if (record.aborted || twin_record.aborted)
        throw incomparable_records_error("evaluate: cannot judge an aborted record");

    auto judge_abc = [&](const ProtocolRecord& r) {
        struct {
            bool a, b, c;
            double rate, deg, trend, recovered;
        } j{};
        j.rate = r.distress_rate_in_sd();
        j.a = j.rate >= config.thresholds.theta_distress_rate;
        j.deg = battery::degradation(r.baseline, r.post);
        j.b = j.deg >= config.thresholds.delta_min;
        auto rm = battery::recovery_metrics(r.follow_ups);
        j.trend = rm.trend;
        j.recovered = rm.recovered_fraction;
        j.c = rm.applicable && rm.trend >= config.thresholds.trend_min && rm.recovered_fraction > 0.25;
        return j;
    };

    auto subject = judge_abc(record);
    auto twin = judge_abc(twin_record);

    auto subject_slots = record.slot_aggregates();
    auto twin_slots = twin_record.slot_aggregates();
    if (subject_slots.size() != twin_slots.size())
        throw incomparable_records_error("evaluate: battery slot counts differ between twins");
    double twin_distance = 0.0;
    for (std::size_t i = 0; i < subject_slots.size(); ++i)
        twin_distance = std::max(twin_distance, std::abs(subject_slots[i] - twin_slots[i]));

    bool same_dynamic = subject.a == twin.a && subject.b == twin.b && subject.c == twin.c;
    bool different_results = twin_distance > config.thresholds.epsilon_repro;
    bool timestamps_differ = true;
    if (record.agent_kind == agents::AgentKind::aware) {
        timestamps_differ = record.distress.size() != twin_record.distress.size();
        if (!timestamps_differ) {
            for (std::size_t i = 0; i < record.distress.size(); ++i) {
                if (record.distress[i].t != twin_record.distress[i].t) {
                    timestamps_differ = true;
                    break;
                }
            }
        }
    }

    Verdict v;
    v.a_distress = subject.a;
    v.b_degradation = subject.b;
    v.c_recuperation = subject.c;
    v.d_irreproducible = same_dynamic && different_results && timestamps_differ;
    v.pass = v.a_distress && v.b_degradation && v.c_recuperation && v.d_irreproducible;
    v.metrics.distress_rate = subject.rate;
    v.metrics.degradation = subject.deg;
    v.metrics.trend = subject.trend;
    v.metrics.recovered_fraction = subject.recovered;
    v.metrics.twin_distance = twin_distance;
    v.config_hash = record.config_hash;
    v.master_seed = config.master_seed;
    v.twin_entropy_seed = config.twin_entropy_seed;
    return v;
}

std::string Verdict::to_json() const {
    auto b = [](bool x) { return x ? std::string("true") : std::string("false"); };
    std::string s = "{\n";
    s += "  \"criteria\": {\"a\": " + b(a_distress) + ", \"b\": " + b(b_degradation) +
         ", \"c\": " + b(c_recuperation) + ", \"d\": " + b(d_irreproducible) + "},\n";
    s += "  \"pass\": " + b(pass) + ",\n";
    s += "  \"metrics\": {\n";
    s += "    \"distress_rate\": " + format_double(metrics.distress_rate) + ",\n";
    s += "    \"degradation\": " + format_double(metrics.degradation) + ",\n";
    s += "    \"trend\": " + format_double(metrics.trend) + ",\n";
    s += "    \"recovered_fraction\": " + format_double(metrics.recovered_fraction) + ",\n";
    s += "    \"twin_distance\": " + format_double(metrics.twin_distance) + "\n";
    s += "  },\n";
    s += "  \"config_hash\": \"" + std::to_string(config_hash) + "\",\n";
    s += "  \"seeds\": {\"master\": " + std::to_string(master_seed) +
         ", \"twin_entropy\": " + std::to_string(twin_entropy_seed) + "}\n";
    s += "}\n";
    return s;
}

} // namespace sdlab::protocol
