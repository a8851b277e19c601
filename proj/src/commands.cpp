#include "sdlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "sdlab/chaos.hpp"
#include "sdlab/csv.hpp"

namespace sdlab::commands {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw argument_error("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// Trajectory rows from t >= t_min, re-rooted for windowing.
dynamics::Trajectory tail_from(const dynamics::Trajectory& traj, double t_min) {
    dynamics::Trajectory out;
    out.h = traj.h;
    for (const auto& s : traj.samples)
        if (s.t >= t_min) out.samples.push_back(s);
    return out;
}

chaos::RegimeReport build_regime_report(const config::RunConfig& cfg,
                                        const dynamics::InputSignal& input,
                                        const dynamics::Trajectory& traj,
                                        const chaos::LyapunovEstimate& lyap) {
    chaos::RegimeReport report;
    report.lambda_max = lyap.lambda_max;
    report.regime = chaos::classify_regime(lyap.lambda_max);
    report.input_description = input.describe();
    double t_settled = cfg.simulate.variance_transient_fraction * cfg.simulate.horizon;
    report.r_variance = chaos::windowed_variance(tail_from(traj, t_settled),
                                                 chaos::TrajectoryField::R,
                                                 cfg.simulate.variance_window);
    return report;
}

std::string recuperation_csv(const protocol::ProtocolRecord& record) {
    CsvBuilder csv("slot,t_admin,aggregate,baseline");
    for (std::size_t i = 0; i < record.follow_ups.points.size(); ++i) {
        csv.field(static_cast<long long>(i))
            .field(record.follow_ups.points[i].first)
            .field(record.follow_ups.points[i].second)
            .field(record.follow_ups.baseline);
        csv.end_row();
    }
    return csv.text();
}

void write_record_files(const std::string& out_dir, const std::string& suffix,
                        const protocol::ProtocolRecord& record) {
    write_text_file(join(out_dir, "battery" + suffix + ".csv"),
                    battery::battery_results_to_csv(record.batteries));
    write_text_file(join(out_dir, "distress" + suffix + ".csv"),
                    agents::distress_to_csv(record.distress));
    write_text_file(join(out_dir, "trajectory" + suffix + ".csv"), record.trajectory.to_csv());
    if (suffix.empty())
        write_text_file(join(out_dir, "recuperation.csv"), recuperation_csv(record));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

dynamics::Trajectory read_trajectory_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line != "t,D,D_dot,S,R,I")
        throw argument_error("not a trajectory CSV: " + path);
    dynamics::Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 6) throw argument_error("malformed trajectory row in " + path);
        dynamics::TrajectorySample s;
        s.t = std::stod(f[0]);
        s.D = std::stod(f[1]);
        s.D_dot = std::stod(f[2]);
        s.S = std::stod(f[3]);
        s.R = std::stod(f[4]);
        s.I = std::stod(f[5]);
        traj.samples.push_back(s);
    }
    if (traj.samples.size() >= 2) traj.h = traj.samples[1].t - traj.samples[0].t;
    return traj;
}

} // namespace

agents::Agent make_agent(const config::RunConfig& cfg) {
    switch (cfg.agent.kind) {
        case agents::AgentKind::aware:
            return agents::Agent::make_aware(cfg.model.initial, cfg.model.duffing,
                                             cfg.model.suppressive, cfg.agent.aware_params,
                                             cfg.protocol.master_seed);
        case agents::AgentKind::non_aware:
            return agents::Agent::make_non_aware();
        case agents::AgentKind::cheating: {
            agents::CheatScriptTiming timing;
            timing.sd_start = cfg.protocol.warmup_duration;
            timing.sd_duration = cfg.protocol.sd_duration_value();
            timing.follow_up_interval = cfg.protocol.effective_follow_up_interval();
            timing.follow_up_count = cfg.protocol.follow_up_count;
            return agents::Agent::make_cheating(agents::make_cheat_script(timing));
        }
    }
    throw argument_error("make_agent: unknown agent kind");
}

void cmd_simulate(const config::RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    ensure_dir(out_dir);
    write_text_file(join(out_dir, "effective_config.json"), config::effective_config_text(cfg));

    struct Condition {
        std::string name;
        dynamics::InputSignal input;
    };
    const Condition conditions[] = {
        {"input_on", cfg.input},
        {"deprived", dynamics::InputSignal::zero()},
    };

    for (const auto& cond : conditions) {
        auto traj = dynamics::simulate(cfg.model.initial, cfg.model.duffing, cfg.model.suppressive,
                                       cond.input, cfg.integrator.h, cfg.simulate.horizon,
                                       cfg.integrator.max_steps);
        auto lyap = chaos::lyapunov_max(cfg.model.duffing, cfg.model.suppressive, cond.input,
                                        cfg.model.initial, cfg.integrator.h, cfg.simulate.horizon,
                                        cfg.simulate.lyapunov);
        auto regime = build_regime_report(cfg, cond.input, traj, lyap);

        write_text_file(join(out_dir, "trajectory_" + cond.name + ".csv"), traj.to_csv());
        write_text_file(join(out_dir, "variance_" + cond.name + ".csv"),
                        chaos::variance_to_csv(regime.r_variance));
        write_text_file(join(out_dir, "lyapunov_" + cond.name + ".json"), lyap.to_json());
        write_text_file(join(out_dir, "regime_" + cond.name + ".json"), regime.to_json());
        log << cond.name << ": lambda_max=" << format_double(lyap.lambda_max)
            << " regime=" << chaos::regime_name(regime.regime) << "\n";
    }
}

protocol::Verdict cmd_run_protocol(const config::RunConfig& cfg, const std::string& out_dir,
                                   std::ostream& log) {
    ensure_dir(out_dir);
    write_text_file(join(out_dir, "effective_config.json"), config::effective_config_text(cfg));

    agents::Agent subject = make_agent(cfg);
    agents::Agent twin = subject.clone_twin(cfg.protocol.twin_entropy_seed);

    auto record = protocol::run_protocol(std::move(subject), cfg.protocol);
    write_record_files(out_dir, "", record);
    if (record.aborted) {
        write_text_file(join(out_dir, "aborted.txt"), record.abort_reason + "\n");
        throw agent_failure_error("protocol aborted: " + record.abort_reason, record.sd_start);
    }

    auto twin_record = protocol::run_protocol(std::move(twin), cfg.protocol);
    write_record_files(out_dir, "_twin", twin_record);
    if (twin_record.aborted) {
        write_text_file(join(out_dir, "aborted.txt"), twin_record.abort_reason + "\n");
        throw agent_failure_error("twin protocol aborted: " + twin_record.abort_reason,
                                  twin_record.sd_start);
    }

    auto verdict = protocol::evaluate(record, twin_record, cfg.protocol);
    write_text_file(join(out_dir, "verdict.json"), verdict.to_json());

    log << "agent=" << agents::agent_kind_name(record.agent_kind)
        << " pass=" << (verdict.pass ? "true" : "false") << " a=" << verdict.a_distress
        << " b=" << verdict.b_degradation << " c=" << verdict.c_recuperation
        << " d=" << verdict.d_irreproducible << "\n";
    return verdict;
}

void cmd_sweep(const config::RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    ensure_dir(out_dir);
    write_text_file(join(out_dir, "effective_config.json"), config::effective_config_text(cfg));

    const std::string& param = cfg.sweep.parameter;
    if (param == "k_days") {
        CsvBuilder csv("k_days,metric,value");
        for (double v : cfg.sweep.values) {
            auto k = static_cast<int>(std::llround(v));
            config::RunConfig run_cfg = cfg;
            run_cfg.protocol.k_days = k;
            agents::Agent subject = make_agent(run_cfg);
            auto record = protocol::run_protocol(std::move(subject), run_cfg.protocol);
            if (record.aborted) {
                csv.field(static_cast<long long>(k)).field("aborted").field(1.0);
                csv.end_row();
                continue;
            }
            double deg = battery::degradation(record.baseline, record.post);
            auto rm = battery::recovery_metrics(record.follow_ups);
            csv.field(static_cast<long long>(k)).field("degradation").field(deg);
            csv.end_row();
            csv.field(static_cast<long long>(k)).field("distress_rate")
                .field(record.distress_rate_in_sd());
            csv.end_row();
            csv.field(static_cast<long long>(k))
                .field("recovered_fraction")
                .field(rm.applicable ? rm.recovered_fraction : 0.0);
            csv.end_row();
        }
        write_text_file(join(out_dir, "sweep.csv"), csv.text());
        log << "k_days sweep: " << cfg.sweep.values.size() << " rows\n";
        return;
    }

    auto p = chaos::sweep_parameter_from_name(param);
    auto rows = chaos::parameter_sweep(cfg.model.duffing, cfg.model.suppressive, p,
                                       cfg.sweep.values, cfg.integrator.h, cfg.sweep.horizon);
    write_text_file(join(out_dir, "sweep.csv"), chaos::sweep_to_csv(rows, param));
    write_text_file(join(out_dir, "sweep_errors.csv"), chaos::sweep_errors_to_csv(rows, param));

    CsvBuilder spread(param + ",spread");
    for (const auto& row : rows) {
        if (row.diverged || row.abs_D.empty()) continue;
        auto [mn, mx] = std::minmax_element(row.abs_D.begin(), row.abs_D.end());
        spread.field(row.value).field(*mx - *mn);
        spread.end_row();
    }
    write_text_file(join(out_dir, "sweep_spread.csv"), spread.text());
    log << param << " sweep: " << rows.size() << " rows\n";
}

void cmd_report(const std::string& bundle_dir, std::ostream& log) {
    if (!fs::exists(bundle_dir)) throw argument_error("no such bundle: " + bundle_dir);

    if (fs::exists(join(bundle_dir, "verdict.json"))) {
        // Protocol bundle: re-derive the recuperation plot from battery.csv.
        std::istringstream in(read_text_file(join(bundle_dir, "battery.csv")));
        std::string line;
        if (!std::getline(in, line) || line != "slot,t_admin,task_kind,score,aggregate")
            throw argument_error("not a battery CSV in " + bundle_dir);
        std::vector<std::pair<long long, std::pair<double, double>>> slots;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto f = split_csv_line(line);
            if (f.size() != 5) throw argument_error("malformed battery row");
            long long slot = std::stoll(f[0]);
            if (slots.empty() || slots.back().first != slot)
                slots.push_back({slot, {std::stod(f[1]), std::stod(f[4])}});
        }
        if (slots.empty()) throw argument_error("battery CSV has no rows");
        CsvBuilder csv("slot,t_admin,aggregate,baseline");
        double baseline = slots.front().second.second;
        for (std::size_t i = 1; i < slots.size(); ++i) {
            csv.field(static_cast<long long>(i - 1))
                .field(slots[i].second.first)
                .field(slots[i].second.second)
                .field(baseline);
            csv.end_row();
        }
        write_text_file(join(bundle_dir, "recuperation.csv"), csv.text());
        log << read_text_file(join(bundle_dir, "verdict.json"));
        return;
    }

    if (fs::exists(join(bundle_dir, "trajectory_deprived.csv"))) {
        // Simulation bundle: re-derive variance series from the trajectories.
        auto cfg = config::load_config(join(bundle_dir, "effective_config.json"));
        for (const std::string name : {"input_on", "deprived"}) {
            auto traj = read_trajectory_csv(join(bundle_dir, "trajectory_" + name + ".csv"));
            double t_settled = cfg.simulate.variance_transient_fraction * cfg.simulate.horizon;
            auto series = chaos::windowed_variance(tail_from(traj, t_settled),
                                                   chaos::TrajectoryField::R,
                                                   cfg.simulate.variance_window);
            write_text_file(join(bundle_dir, "variance_" + name + ".csv"),
                            chaos::variance_to_csv(series));
            log << name << ": " << series.size() << " variance windows\n";
        }
        return;
    }

    throw argument_error("unrecognized bundle layout in " + bundle_dir);
}

int run_with_exit_codes(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const consent_error& e) {
        err << "refusal: " << e.what() << "\n";
        return exit_code::refusal;
    } catch (const agent_failure_error& e) {
        err << "divergence: " << e.what() << "\n";
        return exit_code::divergence;
    } catch (const divergence_error& e) {
        err << "divergence: " << e.what() << "\n";
        return exit_code::divergence;
    } catch (const invalid_state_error& e) {
        err << "divergence: " << e.what() << "\n";
        return exit_code::divergence;
    } catch (const singularity_error& e) {
        err << "divergence: " << e.what() << "\n";
        return exit_code::divergence;
    } catch (const sim_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
}

} // namespace sdlab::commands
