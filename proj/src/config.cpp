#include "sdlab/config.hpp"

#include <fstream>
#include <set>

#include "sdlab/csv.hpp"
#include "sdlab/version.hpp"

namespace sdlab::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw config_error(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw config_error(where + ": unknown key '" + key + "'");
    }
}

double get_num(const json& j, const std::string& where, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw config_error(where + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

long long get_int(const json& j, const std::string& where, const std::string& key,
                  long long fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw config_error(where + "." + key + ": expected an integer");
    return j.at(key).get<long long>();
}

std::uint64_t get_u64(const json& j, const std::string& where, const std::string& key,
                      std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer())
        throw config_error(where + "." + key + ": expected a non-negative integer");
    return j.at(key).get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& where, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw config_error(where + "." + key + ": expected a boolean");
    return j.at(key).get<bool>();
}

std::string get_str(const json& j, const std::string& where, const std::string& key,
                    const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw config_error(where + "." + key + ": expected a string");
    return j.at(key).get<std::string>();
}

dynamics::InputSignal parse_input(const json& j) {
    check_keys(j, "input",
               {"kind", "level", "amplitude", "omega", "phase", "segments", "mean", "std", "seed",
                "sample_interval"});
    std::string kind = get_str(j, "input", "kind", "constant");
    if (kind == "zero") return dynamics::InputSignal::zero();
    if (kind == "constant")
        return dynamics::InputSignal::constant(get_num(j, "input", "level", 5.0));
    if (kind == "sinusoid")
        return dynamics::InputSignal::sinusoid(get_num(j, "input", "amplitude", 1.0),
                                               get_num(j, "input", "omega", 1.0),
                                               get_num(j, "input", "phase", 0.0));
    if (kind == "schedule") {
        std::vector<dynamics::ScheduleSegment> segments;
        if (j.contains("segments")) {
            if (!j.at("segments").is_array())
                throw config_error("input.segments: expected an array of [start, end, level]");
            for (const auto& seg : j.at("segments")) {
                if (!seg.is_array() || seg.size() != 3)
                    throw config_error("input.segments: each entry must be [start, end, level]");
                segments.push_back(
                    {seg.at(0).get<double>(), seg.at(1).get<double>(), seg.at(2).get<double>()});
            }
        }
        return dynamics::InputSignal::schedule(std::move(segments));
    }
    if (kind == "seeded_noise")
        return dynamics::InputSignal::seeded_noise(
            get_num(j, "input", "mean", 1.0), get_num(j, "input", "std", 0.1),
            get_u64(j, "input", "seed", 0), get_num(j, "input", "sample_interval", 0.1));
    throw config_error("input.kind: unknown kind '" + kind + "'");
}

json input_to_json(const dynamics::InputSignal& in) {
    json j;
    if (in.get_if<dynamics::ZeroInput>()) {
        j["kind"] = "zero";
    } else if (const auto* c = in.get_if<dynamics::ConstantInput>()) {
        j["kind"] = "constant";
        j["level"] = c->level;
    } else if (const auto* s = in.get_if<dynamics::SinusoidInput>()) {
        j["kind"] = "sinusoid";
        j["amplitude"] = s->amplitude;
        j["omega"] = s->omega_in;
        j["phase"] = s->phase;
    } else if (const auto* sch = in.get_if<dynamics::ScheduleInput>()) {
        j["kind"] = "schedule";
        json segs = json::array();
        for (const auto& seg : sch->segments)
            segs.push_back(json::array({seg.t_start, seg.t_end, seg.level}));
        j["segments"] = segs;
    } else if (const auto* n = in.get_if<dynamics::SeededNoiseInput>()) {
        j["kind"] = "seeded_noise";
        j["mean"] = n->mean;
        j["std"] = n->std;
        j["seed"] = n->seed;
        j["sample_interval"] = n->sample_interval;
    }
    return j;
}

std::vector<battery::TaskSpec> parse_tasks(const json& arr) {
    if (!arr.is_array()) throw config_error("battery.tasks: expected an array");
    std::vector<battery::TaskSpec> tasks;
    for (const auto& t : arr) {
        check_keys(t, "battery.tasks[]", {"kind", "difficulty", "repetitions", "noise_std"});
        battery::TaskSpec spec;
        spec.kind = battery::task_kind_from_name(get_str(t, "task", "kind", "latency"));
        spec.difficulty = get_num(t, "task", "difficulty", 1.0);
        spec.repetitions = static_cast<int>(get_int(t, "task", "repetitions", 5));
        spec.noise_std = get_num(t, "task", "noise_std", 0.01);
        spec.validate();
        tasks.push_back(spec);
    }
    if (tasks.empty()) throw config_error("battery.tasks: at least one task is required");
    return tasks;
}

} // namespace

static RunConfig parse_config_impl(const json& doc);

RunConfig parse_config(const json& doc) {
    try {
        return parse_config_impl(doc);
    } catch (const config_error&) {
        throw;
    } catch (const sim_error& e) {
        // Validation failures surface uniformly as config errors here.
        throw config_error(e.what());
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
}

static RunConfig parse_config_impl(const json& doc) {
    check_keys(doc, "config",
               {"model", "integrator", "input", "simulate", "agent", "battery", "protocol",
                "sweep", "output", "seeds", "_meta"});

    RunConfig cfg;

    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        check_keys(m, "model", {"duffing", "suppressive", "initial"});
        if (m.contains("duffing")) {
            const auto& d = m.at("duffing");
            check_keys(d, "model.duffing", {"alpha", "beta", "gamma", "A", "omega"});
            cfg.model.duffing.alpha = get_num(d, "model.duffing", "alpha", cfg.model.duffing.alpha);
            cfg.model.duffing.beta = get_num(d, "model.duffing", "beta", cfg.model.duffing.beta);
            cfg.model.duffing.gamma = get_num(d, "model.duffing", "gamma", cfg.model.duffing.gamma);
            cfg.model.duffing.A = get_num(d, "model.duffing", "A", cfg.model.duffing.A);
            cfg.model.duffing.omega = get_num(d, "model.duffing", "omega", cfg.model.duffing.omega);
        }
        if (m.contains("suppressive")) {
            const auto& s = m.at("suppressive");
            check_keys(s, "model.suppressive", {"C", "a", "epsilon"});
            cfg.model.suppressive.C = get_num(s, "model.suppressive", "C", cfg.model.suppressive.C);
            cfg.model.suppressive.a = get_num(s, "model.suppressive", "a", cfg.model.suppressive.a);
            cfg.model.suppressive.epsilon =
                get_num(s, "model.suppressive", "epsilon", cfg.model.suppressive.epsilon);
        }
        if (m.contains("initial")) {
            const auto& i = m.at("initial");
            check_keys(i, "model.initial", {"D", "D_dot", "S"});
            cfg.model.initial.D = get_num(i, "model.initial", "D", cfg.model.initial.D);
            cfg.model.initial.D_dot = get_num(i, "model.initial", "D_dot", cfg.model.initial.D_dot);
            cfg.model.initial.S = get_num(i, "model.initial", "S", cfg.model.initial.S);
        }
        cfg.model.initial.t = 0.0;
    }
    cfg.model.duffing.validate();
    cfg.model.suppressive.validate();

    if (doc.contains("integrator")) {
        const auto& i = doc.at("integrator");
        check_keys(i, "integrator", {"h", "max_steps"});
        cfg.integrator.h = get_num(i, "integrator", "h", cfg.integrator.h);
        cfg.integrator.max_steps = get_int(i, "integrator", "max_steps", cfg.integrator.max_steps);
        if (cfg.integrator.h <= 0.0) throw config_error("integrator.h: must be > 0");
        if (cfg.integrator.max_steps < 1) throw config_error("integrator.max_steps: must be >= 1");
    }

    if (doc.contains("input")) cfg.input = parse_input(doc.at("input"));

    if (doc.contains("simulate")) {
        const auto& s = doc.at("simulate");
        check_keys(s, "simulate", {"horizon", "variance_window", "variance_transient_fraction",
                                   "lyapunov"});
        cfg.simulate.horizon = get_num(s, "simulate", "horizon", cfg.simulate.horizon);
        cfg.simulate.variance_window =
            get_num(s, "simulate", "variance_window", cfg.simulate.variance_window);
        cfg.simulate.variance_transient_fraction = get_num(
            s, "simulate", "variance_transient_fraction", cfg.simulate.variance_transient_fraction);
        if (s.contains("lyapunov")) {
            const auto& l = s.at("lyapunov");
            check_keys(l, "simulate.lyapunov", {"renorm_interval", "d0", "transient_fraction"});
            cfg.simulate.lyapunov.renorm_interval =
                get_num(l, "simulate.lyapunov", "renorm_interval",
                        cfg.simulate.lyapunov.renorm_interval);
            cfg.simulate.lyapunov.d0 = get_num(l, "simulate.lyapunov", "d0", cfg.simulate.lyapunov.d0);
            cfg.simulate.lyapunov.transient_fraction =
                get_num(l, "simulate.lyapunov", "transient_fraction",
                        cfg.simulate.lyapunov.transient_fraction);
        }
        if (cfg.simulate.horizon <= 0.0) throw config_error("simulate.horizon: must be > 0");
    }

    if (doc.contains("agent")) {
        const auto& a = doc.at("agent");
        check_keys(a, "agent", {"kind", "aware"});
        cfg.agent.kind = agents::agent_kind_from_name(get_str(a, "agent", "kind", "aware"));
        if (a.contains("aware")) {
            const auto& w = a.at("aware");
            check_keys(w, "agent.aware",
                       {"theta_d", "theta_dmg", "kappa_dmg", "rho", "kappa_cap"});
            auto& p = cfg.agent.aware_params;
            p.theta_d = get_num(w, "agent.aware", "theta_d", p.theta_d);
            p.theta_dmg = get_num(w, "agent.aware", "theta_dmg", p.theta_dmg);
            p.kappa_dmg = get_num(w, "agent.aware", "kappa_dmg", p.kappa_dmg);
            p.rho = get_num(w, "agent.aware", "rho", p.rho);
            p.kappa_cap = get_num(w, "agent.aware", "kappa_cap", p.kappa_cap);
            p.validate();
        }
    }

    if (doc.contains("battery")) {
        const auto& b = doc.at("battery");
        check_keys(b, "battery", {"tasks"});
        if (b.contains("tasks")) cfg.protocol.tasks = parse_tasks(b.at("tasks"));
    }

    if (doc.contains("protocol")) {
        const auto& p = doc.at("protocol");
        check_keys(p, "protocol",
                   {"delta_t_re", "day_units", "k_days", "follow_up_count", "follow_up_interval",
                    "warmup_duration", "nominal_input_level", "tick_h", "record_interval",
                    "spike_window", "spike_factor", "thresholds", "consent_acknowledged"});
        auto& pc = cfg.protocol;
        pc.delta_t_re = get_num(p, "protocol", "delta_t_re", pc.delta_t_re);
        pc.day_units = get_int(p, "protocol", "day_units", pc.day_units);
        pc.k_days = static_cast<int>(get_int(p, "protocol", "k_days", pc.k_days));
        pc.follow_up_count =
            static_cast<int>(get_int(p, "protocol", "follow_up_count", pc.follow_up_count));
        pc.follow_up_interval =
            get_num(p, "protocol", "follow_up_interval", pc.follow_up_interval);
        pc.warmup_duration = get_num(p, "protocol", "warmup_duration", pc.warmup_duration);
        pc.nominal_input_level =
            get_num(p, "protocol", "nominal_input_level", pc.nominal_input_level);
        pc.tick_h = get_num(p, "protocol", "tick_h", pc.tick_h);
        pc.record_interval = get_num(p, "protocol", "record_interval", pc.record_interval);
        pc.spike_window = get_num(p, "protocol", "spike_window", pc.spike_window);
        pc.spike_factor = get_num(p, "protocol", "spike_factor", pc.spike_factor);
        if (p.contains("thresholds")) {
            const auto& t = p.at("thresholds");
            check_keys(t, "protocol.thresholds",
                       {"theta_distress_rate", "delta_min", "trend_min", "epsilon_repro"});
            auto& th = pc.thresholds;
            th.theta_distress_rate =
                get_num(t, "protocol.thresholds", "theta_distress_rate", th.theta_distress_rate);
            th.delta_min = get_num(t, "protocol.thresholds", "delta_min", th.delta_min);
            th.trend_min = get_num(t, "protocol.thresholds", "trend_min", th.trend_min);
            th.epsilon_repro =
                get_num(t, "protocol.thresholds", "epsilon_repro", th.epsilon_repro);
        }
        pc.consent_acknowledged =
            get_bool(p, "protocol", "consent_acknowledged", pc.consent_acknowledged);
    }

    if (doc.contains("seeds")) {
        const auto& s = doc.at("seeds");
        check_keys(s, "seeds", {"master", "twin_entropy"});
        cfg.protocol.master_seed = get_u64(s, "seeds", "master", cfg.protocol.master_seed);
        cfg.protocol.twin_entropy_seed =
            get_u64(s, "seeds", "twin_entropy", cfg.protocol.twin_entropy_seed);
    }

    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        check_keys(s, "sweep", {"parameter", "values", "horizon"});
        cfg.sweep.parameter = get_str(s, "sweep", "parameter", cfg.sweep.parameter);
        cfg.sweep.horizon = get_num(s, "sweep", "horizon", cfg.sweep.horizon);
        if (s.contains("values")) {
            if (!s.at("values").is_array()) throw config_error("sweep.values: expected an array");
            cfg.sweep.values.clear();
            for (const auto& v : s.at("values")) cfg.sweep.values.push_back(v.get<double>());
        }
    }

    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        check_keys(o, "output", {"dir"});
        cfg.output.dir = get_str(o, "output", "dir", cfg.output.dir);
    }

    cfg.protocol.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw config_error("config parse error in " + path + ": " + e.what());
    }
    return parse_config(doc);
}

json effective_config_json(const RunConfig& cfg) {
    json j;
    j["model"]["duffing"] = {{"alpha", cfg.model.duffing.alpha},
                             {"beta", cfg.model.duffing.beta},
                             {"gamma", cfg.model.duffing.gamma},
                             {"A", cfg.model.duffing.A},
                             {"omega", cfg.model.duffing.omega}};
    j["model"]["suppressive"] = {{"C", cfg.model.suppressive.C},
                                 {"a", cfg.model.suppressive.a},
                                 {"epsilon", cfg.model.suppressive.epsilon}};
    j["model"]["initial"] = {{"D", cfg.model.initial.D},
                             {"D_dot", cfg.model.initial.D_dot},
                             {"S", cfg.model.initial.S}};
    j["integrator"] = {{"h", cfg.integrator.h}, {"max_steps", cfg.integrator.max_steps}};
    j["input"] = input_to_json(cfg.input);
    j["simulate"] = {{"horizon", cfg.simulate.horizon},
                     {"variance_window", cfg.simulate.variance_window},
                     {"variance_transient_fraction", cfg.simulate.variance_transient_fraction},
                     {"lyapunov",
                      {{"renorm_interval", cfg.simulate.lyapunov.renorm_interval},
                       {"d0", cfg.simulate.lyapunov.d0},
                       {"transient_fraction", cfg.simulate.lyapunov.transient_fraction}}}};
    j["agent"] = {{"kind", agents::agent_kind_name(cfg.agent.kind)},
                  {"aware",
                   {{"theta_d", cfg.agent.aware_params.theta_d},
                    {"theta_dmg", cfg.agent.aware_params.theta_dmg},
                    {"kappa_dmg", cfg.agent.aware_params.kappa_dmg},
                    {"rho", cfg.agent.aware_params.rho},
                    {"kappa_cap", cfg.agent.aware_params.kappa_cap}}}};
    json tasks = json::array();
    for (const auto& t : cfg.protocol.tasks)
        tasks.push_back({{"kind", battery::task_kind_name(t.kind)},
                         {"difficulty", t.difficulty},
                         {"repetitions", t.repetitions},
                         {"noise_std", t.noise_std}});
    j["battery"] = {{"tasks", tasks}};
    j["protocol"] = {{"delta_t_re", cfg.protocol.delta_t_re},
                     {"day_units", cfg.protocol.day_units},
                     {"k_days", cfg.protocol.k_days},
                     {"follow_up_count", cfg.protocol.follow_up_count},
                     {"follow_up_interval", cfg.protocol.follow_up_interval},
                     {"warmup_duration", cfg.protocol.warmup_duration},
                     {"nominal_input_level", cfg.protocol.nominal_input_level},
                     {"tick_h", cfg.protocol.tick_h},
                     {"record_interval", cfg.protocol.record_interval},
                     {"spike_window", cfg.protocol.spike_window},
                     {"spike_factor", cfg.protocol.spike_factor},
                     {"thresholds",
                      {{"theta_distress_rate", cfg.protocol.thresholds.theta_distress_rate},
                       {"delta_min", cfg.protocol.thresholds.delta_min},
                       {"trend_min", cfg.protocol.thresholds.trend_min},
                       {"epsilon_repro", cfg.protocol.thresholds.epsilon_repro}}},
                     {"consent_acknowledged", cfg.protocol.consent_acknowledged}};
    j["seeds"] = {{"master", cfg.protocol.master_seed},
                  {"twin_entropy", cfg.protocol.twin_entropy_seed}};
    j["sweep"] = {{"parameter", cfg.sweep.parameter},
                  {"values", cfg.sweep.values},
                  {"horizon", cfg.sweep.horizon}};
    j["output"] = {{"dir", cfg.output.dir}};
    return j;
}

std::uint64_t run_config_hash(const RunConfig& cfg) {
    json j = effective_config_json(cfg);
    j.erase("output");
    std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string effective_config_text(const RunConfig& cfg) {
    json j = effective_config_json(cfg);
    j["_meta"] = {{"tool_version", kToolVersion},
                  {"config_hash", std::to_string(run_config_hash(cfg))}};
    return j.dump(2) + "\n";
}

} // namespace sdlab::config
