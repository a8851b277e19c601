#pragma once

#include <stdexcept>
#include <string>

namespace sdlab {

// Base class for everything thrown by this library.
class sim_error : public std::runtime_error {
public:
    explicit sim_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument / precondition violation (finite but out of range, malformed
// schedule, unknown config key, ...).
class argument_error : public sim_error {
public:
    explicit argument_error(const std::string& msg) : sim_error(msg) {}
};

// Non-finite value fed into the dynamics.
class invalid_state_error : public sim_error {
public:
    explicit invalid_state_error(const std::string& msg) : sim_error(msg) {}
};

// epsilon + S hit zero while composing the response.
class singularity_error : public sim_error {
public:
    singularity_error(const std::string& msg, double t) : sim_error(msg), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

// State left the configured bounds or went non-finite while integrating.
// Carries the last finite state and the step index at which it happened.
struct last_finite_state {
    double t = 0.0;
    double D = 0.0;
    double D_dot = 0.0;
    double S = 0.0;
};

class divergence_error : public sim_error {
public:
    divergence_error(const std::string& msg, last_finite_state last, long long step_index)
        : sim_error(msg), last_(last), step_index_(step_index) {}

    const last_finite_state& last_state() const { return last_; }
    long long step_index() const { return step_index_; }
    void set_step_index(long long i) { step_index_ = i; }

private:
    last_finite_state last_;
    long long step_index_;
};

// An agent's dynamics diverged mid-run.
class agent_failure_error : public sim_error {
public:
    agent_failure_error(const std::string& msg, double t) : sim_error(msg), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

// Protocol start refused (consent flag not set).
class consent_error : public sim_error {
public:
    explicit consent_error(const std::string& msg) : sim_error(msg) {}
};

// The two records handed to the verdict evaluator were not produced under
// the same configuration, or one of them is incomplete.
class incomparable_records_error : public sim_error {
public:
    explicit incomparable_records_error(const std::string& msg) : sim_error(msg) {}
};

// Degradation against a zero baseline aggregate.
class undefined_baseline_error : public sim_error {
public:
    explicit undefined_baseline_error(const std::string& msg) : sim_error(msg) {}
};

// Malformed or rejected run configuration file.
class config_error : public sim_error {
public:
    explicit config_error(const std::string& msg) : sim_error(msg) {}
};

} // namespace sdlab
