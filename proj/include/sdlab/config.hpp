#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "sdlab/agents.hpp"
#include "sdlab/battery.hpp"
#include "sdlab/chaos.hpp"
#include "sdlab/dynamics.hpp"
#include "sdlab/protocol.hpp"

namespace sdlab::config {

struct IntegratorSection {
    double h = 0.01;
    long long max_steps = dynamics::kDefaultMaxSteps;
};

struct ModelSection {
    dynamics::DuffingParams duffing;
    dynamics::SuppressiveParams suppressive;
    dynamics::AwarenessState initial;  // initial.t is forced to 0
};

struct SimulateSection {
    double horizon = 600.0;  // >= 100 forcing periods at the default omega
    double variance_window = 20.0;
    double variance_transient_fraction = 0.25;  // settled-window start for regime reports
    chaos::LyapunovOptions lyapunov;
};

struct AgentSection {
    agents::AgentKind kind = agents::AgentKind::aware;
    agents::AwareParams aware_params;
    // The cheat script is derived from the protocol timing (the scripted
    // agent "knows the exam schedule" through its internal clock).
};

struct SweepSection {
    std::string parameter = "A";
    std::vector<double> values;
    double horizon = 1500.0;
};

struct OutputSection {
    std::string dir = "out";
};

// One self-describing document drives every subcommand. Unknown keys are
// rejected; every default is materialized into the effective-config echo.
struct RunConfig {
    ModelSection model;
    IntegratorSection integrator;
    dynamics::InputSignal input = dynamics::InputSignal::constant(5.0);
    SimulateSection simulate;
    AgentSection agent;
    protocol::ProtocolConfig protocol;  // holds battery tasks, thresholds, seeds
    SweepSection sweep;
    OutputSection output;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Fully materialized document, without the _meta block.
nlohmann::json effective_config_json(const RunConfig& cfg);

// FNV-1a over the canonical effective-config dump (output section and
// _meta excluded, so relocating a bundle does not change its identity).
std::uint64_t run_config_hash(const RunConfig& cfg);

// effective config + _meta {tool_version, config_hash}, serialized.
std::string effective_config_text(const RunConfig& cfg);

} // namespace sdlab::config
