#pragma once

#include <functional>
#include <ostream>
#include <string>

#include "sdlab/config.hpp"
#include "sdlab/protocol.hpp"

namespace sdlab::commands {

// Process exit contract shared by the CLI and its tests.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int refusal = 2;
inline constexpr int divergence = 3;
inline constexpr int verdict_failed = 4;
} // namespace exit_code

// Write trajectories, variance series, Lyapunov estimates and regime
// reports for the input-on and deprived conditions of one model config.
void cmd_simulate(const config::RunConfig& cfg, const std::string& out_dir, std::ostream& log);

// Run subject and twin through the full protocol and write the record
// bundle with the verdict. Returns the verdict for strict-mode mapping.
protocol::Verdict cmd_run_protocol(const config::RunConfig& cfg, const std::string& out_dir,
                                   std::ostream& log);

// Parameter sweep; dynamics parameters produce a Poincare-section table,
// k_days produces protocol severity metrics.
void cmd_sweep(const config::RunConfig& cfg, const std::string& out_dir, std::ostream& log);

// Re-derive plot data from an existing bundle directory.
void cmd_report(const std::string& bundle_dir, std::ostream& log);

// Build the configured test subject.
agents::Agent make_agent(const config::RunConfig& cfg);

// Exception-to-exit-code mapping used by the CLI entry point.
int run_with_exit_codes(const std::function<int()>& body, std::ostream& err);

} // namespace sdlab::commands
