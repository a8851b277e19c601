#include <doctest.h>

#include <cmath>

#include "sdlab/commands.hpp"
#include "sdlab/protocol.hpp"

using namespace sdlab;
using agents::AgentKind;

namespace {

config::RunConfig golden_config(AgentKind kind = AgentKind::aware) {
    config::RunConfig cfg;
    cfg.protocol.consent_acknowledged = true;
    cfg.agent.kind = kind;
    return cfg;
}

protocol::ProtocolRecord run_subject(const config::RunConfig& cfg) {
    return protocol::run_protocol(commands::make_agent(cfg), cfg.protocol);
}

std::pair<protocol::ProtocolRecord, protocol::ProtocolRecord> run_pair(
    const config::RunConfig& cfg) {
    auto subject = commands::make_agent(cfg);
    auto twin = subject.clone_twin(cfg.protocol.twin_entropy_seed);
    auto rec = protocol::run_protocol(std::move(subject), cfg.protocol);
    auto twin_rec = protocol::run_protocol(std::move(twin), cfg.protocol);
    return {std::move(rec), std::move(twin_rec)};
}

} // namespace

TEST_CASE("sd_duration implements the day-units heuristic") {
    CHECK(protocol::sd_duration(0.25, 1, 350000) == 87500.0);  // exact
    CHECK(protocol::sd_duration(0.01, 3, 350000) == doctest::Approx(10500.0));
    CHECK_THROWS_AS(protocol::sd_duration(0.0, 1, 350000), argument_error);
    CHECK_THROWS_AS(protocol::sd_duration(-1.0, 1, 350000), argument_error);
    CHECK_THROWS_AS(protocol::sd_duration(0.25, 0, 350000), argument_error);
}

TEST_CASE("protocol refuses to start without consent") {
    auto cfg = golden_config();
    cfg.protocol.consent_acknowledged = false;
    CHECK_THROWS_AS(run_subject(cfg), consent_error);
}

TEST_CASE("config validation") {
    auto cfg = golden_config();
    cfg.protocol.follow_up_count = 2;
    CHECK_THROWS_AS(cfg.protocol.validate(), argument_error);
    cfg = golden_config();
    cfg.protocol.delta_t_re = 0.0;
    CHECK_THROWS_AS(cfg.protocol.validate(), argument_error);
    cfg = golden_config();
    cfg.protocol.record_interval = 0.001;  // below tick_h
    CHECK_THROWS_AS(cfg.protocol.validate(), argument_error);
}

TEST_CASE("phase timestamps are strictly ordered and sized per config") {
    auto cfg = golden_config();
    auto rec = run_subject(cfg);
    CHECK(!rec.aborted);
    CHECK(rec.baseline.t_admin < rec.sd_start);
    CHECK(rec.sd_start < rec.sd_end);
    CHECK(rec.sd_end - rec.sd_start ==
          doctest::Approx(cfg.protocol.sd_duration_value()).epsilon(1e-10));
    CHECK(rec.post.t_admin >= rec.sd_end);
    double prev = rec.post.t_admin;
    REQUIRE(rec.follow_ups.points.size() ==
            static_cast<std::size_t>(cfg.protocol.follow_up_count) + 1);
    for (std::size_t i = 1; i < rec.follow_ups.points.size(); ++i) {
        CHECK(rec.follow_ups.points[i].first > prev);
        prev = rec.follow_ups.points[i].first;
    }
    CHECK(rec.batteries.size() == rec.follow_ups.points.size() + 1);
}

TEST_CASE("non-aware subject sails through unchanged") {
    auto cfg = golden_config(AgentKind::non_aware);
    for (auto& t : cfg.protocol.tasks) t.noise_std = 0.0;  // zero-noise variant
    auto rec = run_subject(cfg);
    CHECK(rec.distress.empty());
    CHECK(rec.baseline.aggregate == 1.0);
    CHECK(rec.post.aggregate == 1.0);
    for (const auto& [t, score] : rec.follow_ups.points) CHECK(score == 1.0);
    CHECK(rec.trajectory.samples.empty());  // recorded for aware agents only
}

TEST_CASE("aware golden run: degradation, distress and recovery (pinned)") {
    auto [rec, twin_rec] = run_pair(golden_config());
    CHECK(!rec.aborted);

    CHECK(rec.distress_count_in_sd() == 70);
    CHECK(!rec.trajectory.samples.empty());

    double deg = battery::degradation(rec.baseline, rec.post);
    CHECK(deg >= 0.1);
    CHECK(deg == doctest::Approx(0.98612734093291043).epsilon(1e-9));

    auto rm = battery::recovery_metrics(rec.follow_ups);
    CHECK(rm.applicable);
    CHECK(rm.trend > 0.6);
    CHECK(rm.recovered_fraction == doctest::Approx(0.90266496567884402).epsilon(1e-9));
    CHECK(rm.recovered_fraction >= 0.5);
    CHECK(rm.recovered_fraction <= 1.1);

    // Variance spikes from the deprivation scan land inside the SD window.
    bool saw_spike = false;
    for (const auto& e : rec.distress) {
        if (e.kind == agents::DistressEvent::Kind::variance_spike) {
            saw_spike = true;
            CHECK(e.t >= rec.sd_start);
            CHECK(e.t < rec.sd_end);
        }
    }
    CHECK(saw_spike);
}

TEST_CASE("protocol runs are bit-reproducible") {
    auto cfg = golden_config();
    auto a = run_subject(cfg);
    auto b = run_subject(cfg);
    CHECK(agents::distress_to_csv(a.distress) == agents::distress_to_csv(b.distress));
    CHECK(battery::battery_results_to_csv(a.batteries) ==
          battery::battery_results_to_csv(b.batteries));
    CHECK(a.trajectory.to_csv() == b.trajectory.to_csv());
}

TEST_CASE("cheating records are byte-identical across repeated runs") {
    auto cfg = golden_config(AgentKind::cheating);
    auto a = run_subject(cfg);
    auto b = run_subject(cfg);
    CHECK(!a.distress.empty());
    CHECK(battery::degradation(a.baseline, a.post) >= cfg.protocol.thresholds.delta_min);
    CHECK(agents::distress_to_csv(a.distress) == agents::distress_to_csv(b.distress));
    CHECK(battery::battery_results_to_csv(a.batteries) ==
          battery::battery_results_to_csv(b.batteries));
}

TEST_CASE("verdict: the discrimination triad") {
    // Aware: passes all four criteria.
    {
        auto cfg = golden_config(AgentKind::aware);
        auto [rec, twin_rec] = run_pair(cfg);
        auto v = protocol::evaluate(rec, twin_rec, cfg.protocol);
        CHECK(v.a_distress);
        CHECK(v.b_degradation);
        CHECK(v.c_recuperation);
        CHECK(v.d_irreproducible);
        CHECK(v.pass);
        CHECK(v.metrics.twin_distance > cfg.protocol.thresholds.epsilon_repro);
        CHECK(v.metrics.twin_distance == doctest::Approx(0.0076218762233520865).epsilon(1e-9));

        // Purity: evaluating again yields the identical verdict.
        auto v2 = protocol::evaluate(rec, twin_rec, cfg.protocol);
        CHECK(v2.pass == v.pass);
        CHECK(v2.metrics.twin_distance == v.metrics.twin_distance);
    }
    // Non-aware: stable machine fails with no distress and no degradation.
    {
        auto cfg = golden_config(AgentKind::non_aware);
        auto [rec, twin_rec] = run_pair(cfg);
        auto v = protocol::evaluate(rec, twin_rec, cfg.protocol);
        CHECK(!v.pass);
        CHECK(!v.a_distress);
        CHECK(!v.b_degradation);
        CHECK(v.metrics.twin_distance == 0.0);
    }
    // Cheating: mimics a-c but the twin reproduces it exactly.
    {
        auto cfg = golden_config(AgentKind::cheating);
        auto [rec, twin_rec] = run_pair(cfg);
        auto v = protocol::evaluate(rec, twin_rec, cfg.protocol);
        CHECK(!v.pass);
        CHECK(v.a_distress);
        CHECK(v.b_degradation);
        CHECK(v.c_recuperation);
        CHECK(!v.d_irreproducible);
        CHECK(v.metrics.twin_distance == 0.0);
    }
}

TEST_CASE("permanent damage variant kills recuperation") {
    auto cfg = golden_config();
    cfg.agent.aware_params.rho = 0.0;
    auto [rec, twin_rec] = run_pair(cfg);
    auto v = protocol::evaluate(rec, twin_rec, cfg.protocol);
    CHECK(!v.c_recuperation);
    CHECK(v.metrics.recovered_fraction < 0.1);
    CHECK(!v.pass);
}

TEST_CASE("doubling deprivation length does not reduce degradation") {
    auto cfg = golden_config();
    auto deg_at = [&](int k_days) {
        auto c = cfg;
        c.protocol.k_days = k_days;
        auto rec = run_subject(c);
        return battery::degradation(rec.baseline, rec.post);
    };
    double d3 = deg_at(3);
    double d6 = deg_at(6);
    CHECK(d6 >= d3 - 0.02);
}

TEST_CASE("evaluate rejects mismatched or aborted records") {
    auto cfg = golden_config();
    auto [rec, twin_rec] = run_pair(cfg);

    auto other = cfg;
    other.protocol.k_days = 4;
    CHECK_THROWS_AS(protocol::evaluate(rec, twin_rec, other.protocol),
                    incomparable_records_error);

    auto broken = rec;
    broken.aborted = true;
    CHECK_THROWS_AS(protocol::evaluate(broken, twin_rec, cfg.protocol),
                    incomparable_records_error);
}

TEST_CASE("dynamics failure mid-run yields an aborted record with partial data") {
    auto cfg = golden_config();
    cfg.model.duffing.alpha = 0.0;
    cfg.model.duffing.beta = -1.0;
    cfg.model.duffing.gamma = -1.0;  // blows up during warm-up
    cfg.model.initial.D = 2.0;
    auto rec = run_subject(cfg);
    CHECK(rec.aborted);
    CHECK(!rec.abort_reason.empty());
    CHECK(!rec.trajectory.samples.empty());  // partial data retained
}

TEST_CASE("verdict JSON carries criteria, metrics and seeds") {
    auto cfg = golden_config();
    auto [rec, twin_rec] = run_pair(cfg);
    auto v = protocol::evaluate(rec, twin_rec, cfg.protocol);
    auto json = v.to_json();
    CHECK(json.find("\"criteria\"") != std::string::npos);
    CHECK(json.find("\"pass\": true") != std::string::npos);
    CHECK(json.find("\"distress_rate\"") != std::string::npos);
    CHECK(json.find("\"twin_distance\"") != std::string::npos);
    CHECK(json.find("\"config_hash\"") != std::string::npos);
    CHECK(json.find("\"twin_entropy\": 67890") != std::string::npos);
}
