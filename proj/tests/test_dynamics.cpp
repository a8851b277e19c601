#include <doctest.h>

#include <cmath>
#include <string>

#include "sdlab/dynamics.hpp"
#include "sdlab/rng.hpp"
#include "reference_integrator.hpp"

using namespace sdlab;
using dynamics::AwarenessState;
using dynamics::DuffingParams;
using dynamics::InputSignal;
using dynamics::SuppressiveParams;

namespace {

DuffingParams chaotic_params() { return DuffingParams{0.3, -1.0, 1.0, 0.5, 1.2}; }

DuffingParams damped_params() {
    DuffingParams dp;
    dp.alpha = 0.3;
    dp.beta = 1.0;
    dp.gamma = 1.0;
    dp.A = 0.0;
    return dp;
}

double max_state_diff(const dynamics::Trajectory& coarse, const dynamics::Trajectory& fine,
                      std::size_t stride) {
    double m = 0.0;
    for (std::size_t i = 0; i < coarse.samples.size(); ++i) {
        const auto& a = coarse.samples[i];
        const auto& b = fine.samples[i * stride];
        m = std::max({m, std::abs(a.D - b.D), std::abs(a.D_dot - b.D_dot), std::abs(a.S - b.S)});
    }
    return m;
}

} // namespace

TEST_CASE("derivative matches the model equations at reference points") {
    SuppressiveParams sp;

    // Origin of the unforced system is a fixed point.
    DuffingParams unforced = chaotic_params();
    unforced.A = 0.0;
    auto d = dynamics::derivative({0, 0, 0, 0}, unforced, sp, 0.0);
    CHECK(d.dD == 0.0);
    CHECK(d.dD_dot == 0.0);
    CHECK(d.dS == 0.0);

    // S equilibrium at I = a * S0.
    sp.a = 2.0;
    auto d2 = dynamics::derivative({0, 0, 0, 3.0}, unforced, sp, 6.0);
    CHECK(d2.dS == doctest::Approx(0.0));

    // Direct substitution: alpha=0.3, beta=-1, gamma=1, A=0.5, omega=1.2 at
    // (D=1, Ddot=0, S=0), I=0 -> acceleration 1 - 1 + 0.5 sin(0) = 0.
    auto d3 = dynamics::derivative({0, 1.0, 0, 0}, chaotic_params(), SuppressiveParams{}, 0.0);
    CHECK(d3.dD == 0.0);
    CHECK(d3.dD_dot == doctest::Approx(0.0));
    CHECK(d3.dS == 0.0);
}

TEST_CASE("derivative rejects bad inputs") {
    CHECK_THROWS_AS(dynamics::derivative({0, std::nan(""), 0, 0}, chaotic_params(),
                                         SuppressiveParams{}, 0.0),
                    invalid_state_error);
    CHECK_THROWS_AS(dynamics::derivative({0, 0, 0, 0}, chaotic_params(), SuppressiveParams{},
                                         std::nan("")),
                    invalid_state_error);
    CHECK_THROWS_AS(dynamics::derivative({0, 0, 0, 0}, chaotic_params(), SuppressiveParams{}, -1.0),
                    argument_error);
}

TEST_CASE("response composes S and the weighted D term") {
    CHECK(dynamics::response(0.0, 2.0, 0.01) == doctest::Approx(2.0));
    CHECK(dynamics::response(1.0, 0.0, 0.1) == doctest::Approx(10.0));
    CHECK(dynamics::response(0.5, 1.0, 0.01) == doctest::Approx(1.0 + 0.5 / 1.01));

    CHECK_THROWS_AS(dynamics::response(1.0, -0.5, 0.5, 3.25), singularity_error);
    try {
        dynamics::response(1.0, -0.5, 0.5, 3.25);
    } catch (const singularity_error& e) {
        CHECK(e.time() == doctest::Approx(3.25));
        CHECK(std::string(e.what()).find("3.25") != std::string::npos);
    }
    CHECK_THROWS_AS(dynamics::response(1.0, 0.0, 0.0), argument_error);
}

TEST_CASE("step leaves the unforced fixed point alone") {
    DuffingParams dp = chaotic_params();
    dp.A = 0.0;
    AwarenessState s{0, 0, 0, 0};
    for (double h : {0.01, 0.1, 1.0}) {
        auto next = dynamics::step(s, dp, SuppressiveParams{}, InputSignal::zero(), h);
        CHECK(next.t == doctest::Approx(s.t + h));
        CHECK(next.D == 0.0);
        CHECK(next.D_dot == 0.0);
        CHECK(next.S == 0.0);
    }
}

TEST_CASE("one RK4 step agrees with the adaptive reference integrator") {
    // Frozen from the DP54 oracle at tolerance 1e-12.
    constexpr double kOracleD = 1.0000000999233261;
    constexpr double kOracleDdot = 2.9969163309374911e-05;

    oracle::SysParams p{0.3, -1.0, 1.0, 0.5, 1.2, 1.0, 1.0};
    auto ref = oracle::integrate(p, [](double) { return 0.0; }, {1.0, 0.0, 0.0}, 0.0, 0.01, 1e-12);
    CHECK(ref[0] == doctest::Approx(kOracleD).epsilon(1e-12));
    CHECK(ref[1] == doctest::Approx(kOracleDdot).epsilon(1e-9));

    auto s = dynamics::step({0, 1.0, 0, 0}, chaotic_params(), SuppressiveParams{},
                            InputSignal::zero(), 0.01);
    CHECK(std::abs(s.D - ref[0]) < 5e-12);
    CHECK(std::abs(s.D_dot - ref[1]) < 5e-12);
    CHECK(s.S == 0.0);
}

TEST_CASE("S subsystem reproduces its closed form under constant input") {
    DuffingParams dp;
    dp.alpha = 0.3;
    dp.beta = 1.0;
    dp.gamma = 0.0;
    dp.A = 0.0;
    SuppressiveParams sp;  // C = 1, a = 1
    auto traj = dynamics::simulate({0, 0, 0, 0}, dp, sp, InputSignal::constant(1.0), 0.01, 10.0);
    double max_err = 0.0;
    for (const auto& r : traj.samples)
        max_err = std::max(max_err, std::abs(r.S - (1.0 - std::exp(-r.t))));
    CHECK(max_err < 1e-8);
}

TEST_CASE("simulate: zero model stays exactly zero") {
    DuffingParams dp = chaotic_params();
    dp.A = 0.0;
    auto traj = dynamics::simulate({0, 0, 0, 0}, dp, SuppressiveParams{}, InputSignal::zero(), 0.01,
                                   5.0);
    CHECK(traj.samples.size() == 501);
    for (const auto& r : traj.samples) {
        CHECK(r.D == 0.0);
        CHECK(r.D_dot == 0.0);
        CHECK(r.S == 0.0);
        CHECK(r.R == 0.0);
        CHECK(r.I == 0.0);
    }
}

TEST_CASE("S contraction bound holds for random constant inputs") {
    Rng rng(20240901);
    DuffingParams dp = damped_params();
    for (int trial = 0; trial < 20; ++trial) {
        SuppressiveParams sp;
        sp.C = 0.2 + 2.0 * rng.next_unit();
        sp.a = 0.2 + 2.0 * rng.next_unit();
        double I0 = 3.0 * rng.next_unit();
        double S0 = 4.0 * rng.next_unit();
        double h = 0.01;
        auto traj = dynamics::simulate({0, 0, 0, S0}, dp, sp, InputSignal::constant(I0), h, 8.0);
        const double target = I0 / sp.a;
        const double slack = 10.0 * h * h * h * h;
        double prev_dev = std::abs(S0 - target);
        for (const auto& r : traj.samples) {
            double dev = std::abs(r.S - target);
            CHECK(dev <= std::abs(S0 - target) * std::exp(-sp.C * sp.a * r.t) + slack);
            CHECK(dev <= prev_dev + slack);
            prev_dev = dev;
        }
    }
}

TEST_CASE("unforced energy is non-increasing") {
    DuffingParams dp = damped_params();
    SuppressiveParams sp;
    const double h = 0.01;
    auto traj = dynamics::simulate({0, 1.2, 0.4, 0}, dp, sp, InputSignal::zero(), h, 50.0);
    auto energy = [&](const dynamics::TrajectorySample& s) {
        return 0.5 * s.D_dot * s.D_dot + 0.5 * dp.beta * s.D * s.D +
               0.25 * dp.gamma * s.D * s.D * s.D * s.D;
    };
    const double slack = 10.0 * h * h * h * h;
    double prev = energy(traj.samples.front());
    for (const auto& s : traj.samples) {
        double e = energy(s);
        CHECK(e <= prev + slack);
        prev = e;
    }
}

TEST_CASE("suppression weight is strictly decreasing in S") {
    const double eps = 0.1;
    double prev = 1.0 / eps;
    for (double S = 0.25; S <= 5.0; S += 0.25) {
        double w = 1.0 / (eps + S);
        CHECK(w < prev);
        prev = w;
    }
    // And therefore the response's D sensitivity shrinks as S grows.
    CHECK(dynamics::response(1.0, 4.0, eps) - 4.0 < dynamics::response(1.0, 1.0, eps) - 1.0);
}

TEST_CASE("simulate is bit-deterministic") {
    auto run = [] {
        return dynamics::simulate({0, 0.3, -0.2, 0.5}, chaotic_params(), SuppressiveParams{},
                                  InputSignal::seeded_noise(1.0, 0.2, 77, 0.05), 0.01, 30.0);
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].D == b.samples[i].D);
        CHECK(a.samples[i].D_dot == b.samples[i].D_dot);
        CHECK(a.samples[i].S == b.samples[i].S);
        CHECK(a.samples[i].R == b.samples[i].R);
        CHECK(a.samples[i].I == b.samples[i].I);
    }
}

TEST_CASE("step halving shrinks the trajectory difference by >= 8") {
    DuffingParams dp = chaotic_params();
    dp.beta = 1.0;  // smooth single-well response
    SuppressiveParams sp;
    auto run = [&](double h) {
        return dynamics::simulate({0, 0.5, 0, 0.2}, dp, sp, InputSignal::constant(1.0), h, 20.0);
    };
    auto coarse = run(0.02);
    auto mid = run(0.01);
    auto fine = run(0.005);
    double d1 = max_state_diff(coarse, mid, 2);
    double d2 = max_state_diff(mid, fine, 2);
    CHECK(d1 / d2 >= 8.0);
}

TEST_CASE("trajectory rows sit on the time grid and R recomputes from its own row") {
    SuppressiveParams sp;
    const double h = 0.01;
    auto traj = dynamics::simulate({0, 0.4, 0.1, 0.3}, chaotic_params(), sp,
                                   InputSignal::constant(1.0), h, 10.0);
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        CHECK(s.t == doctest::Approx(static_cast<double>(i) * h).epsilon(1e-12));
        if (i) CHECK(s.t > traj.samples[i - 1].t);
        double r = dynamics::response(s.D, s.S, sp.epsilon, s.t);
        CHECK(std::abs(s.R - r) <= 1e-12 * std::max(1.0, std::abs(r)));
    }
}

TEST_CASE("divergence carries last finite state, step index and partial trajectory") {
    DuffingParams dp;
    dp.alpha = 0.0;
    dp.beta = -1.0;
    dp.gamma = -1.0;  // anti-restoring cubic blows up
    dp.A = 0.0;
    try {
        dynamics::simulate({0, 2.0, 0, 0}, dp, SuppressiveParams{}, InputSignal::zero(), 0.01,
                           100.0);
        FAIL("expected divergence");
    } catch (const dynamics::simulation_divergence_error& e) {
        CHECK(e.step_index() >= 0);
        CHECK(std::isfinite(e.last_state().D));
        CHECK(!e.partial_trajectory().samples.empty());
        CHECK(e.partial_trajectory().samples.size() ==
              static_cast<std::size_t>(e.step_index()) + 1);
    }
}

TEST_CASE("simulate enforces the max-steps bound") {
    CHECK_THROWS_AS(dynamics::simulate({0, 0, 0, 0}, damped_params(), SuppressiveParams{},
                                       InputSignal::zero(), 0.001, 100.0, 1000),
                    argument_error);
}

TEST_CASE("input signals evaluate by kind with validated construction") {
    auto sched = InputSignal::schedule({{0.0, 1.0, 2.0}, {1.5, 2.0, 0.5}});
    CHECK(sched.value(0.0) == 2.0);
    CHECK(sched.value(0.999) == 2.0);
    CHECK(sched.value(1.0) == 0.0);  // half-open segment
    CHECK(sched.value(1.5) == 0.5);
    CHECK(sched.value(2.0) == 0.0);
    CHECK(sched.value(10.0) == 0.0);

    CHECK_THROWS_AS(InputSignal::schedule({{0.0, 2.0, 1.0}, {1.0, 3.0, 1.0}}), argument_error);
    CHECK_THROWS_AS(InputSignal::schedule({{2.0, 1.0, 1.0}}), argument_error);
    CHECK_THROWS_AS(InputSignal::schedule({{0.0, 1.0, -1.0}}), argument_error);
    CHECK_THROWS_AS(InputSignal::constant(-0.1), argument_error);

    auto sine = InputSignal::sinusoid(2.0, 1.0, 0.0);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        double t = 50.0 * rng.next_unit();
        CHECK(sine.value(t) >= 0.0);
        CHECK(sine.value(t) <= 2.0);
    }

    auto noise = InputSignal::seeded_noise(1.0, 0.5, 99, 0.1);
    for (int i = 0; i < 200; ++i) {
        double t = 20.0 * rng.next_unit();
        double v = noise.value(t);
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
        CHECK(noise.value(t) == v);  // pure function of t
    }
    // Constant within a sample cell, seeded across cells.
    CHECK(noise.value(0.01) == noise.value(0.09));
    auto noise2 = InputSignal::seeded_noise(1.0, 0.5, 100, 0.1);
    CHECK(noise.value(0.05) != noise2.value(0.05));
}

TEST_CASE("trajectory CSV uses the pinned header and full precision") {
    auto traj = dynamics::simulate({0, 1.0 / 3.0, 0, 0}, damped_params(), SuppressiveParams{},
                                   InputSignal::zero(), 0.01, 0.05);
    std::string csv = traj.to_csv();
    CHECK(csv.rfind("t,D,D_dot,S,R,I\n", 0) == 0);
    CHECK(csv.find("0.33333333333333331") != std::string::npos);
    CHECK(csv.find("\r") == std::string::npos);
}

TEST_CASE("parameter validation rejects out-of-range values") {
    DuffingParams dp;
    dp.alpha = -0.1;
    CHECK_THROWS_AS(dp.validate(), argument_error);
    SuppressiveParams sp;
    sp.epsilon = 0.0;
    CHECK_THROWS_AS(sp.validate(), argument_error);
    sp = SuppressiveParams{};
    sp.a = -1.0;
    CHECK_THROWS_AS(sp.validate(), argument_error);
}
