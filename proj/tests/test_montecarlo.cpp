#include <cmath>

#include "doctest.h"
#include "fsc/channel.hpp"
#include "fsc/error.hpp"
#include "fsc/exact.hpp"
#include "fsc/montecarlo.hpp"
#include "fsc/queueing.hpp"

using namespace fsc;

TEST_CASE("stream generators are replayable and distinct") {
    auto a = make_stream(5, 0), b = make_stream(5, 0), c = make_stream(5, 1), d = make_stream(6, 0);
    auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    std::uint64_t s1 = 0, s2 = 0;
    CHECK(splitmix64(s1) == splitmix64(s2));
    CHECK(s1 == s2);
}

TEST_CASE("noiseless channel with two codewords") {
    FscSpec spec = build_gilbert_elliott(0.1, 0.2, 0.0, 1e-300);
    const int N = 6;
    CodeParams code = make_code(N, 1.0 / N);
    SimConfig cfg{3, 200000, 0};
    CodeSimulation sim = simulate_random_code_failure(spec, code, md_rule(), cfg);
    const double p = std::ldexp(1.0, -N);
    for (int i = 0; i < 2; ++i) {
        double total = sim.failure.row(i).sum();
        double se = std::sqrt(p * (1 - p) / cfg.trials);
        CHECK(std::abs(total - p) <= 3 * se);
        CHECK((sim.undetected.row(i) - sim.failure.row(i)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("single codeword never fails") {
    FscSpec spec = build_gilbert_elliott(0.0533, 0.08, 0.01, 0.1);
    CodeParams code = make_code(8, 0.5);
    code.log_M = 0.0;
    CodeSimulation sim = simulate_random_code_failure(spec, code, ml_rule(spec), {1, 20000, 0});
    CHECK(sim.failure.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sim.trials_per_state == 20000);
}

TEST_CASE("simulation is reproducible and agrees with the exact law") {
    FscSpec spec = build_gilbert_elliott(0.0533, 0.08, 0.01, 0.1);
    CodeParams code = make_code(8, 0.5);
    SimConfig cfg{42, 100000, 0};
    for (double nu : {0.0, 1.0}) {
        DecoderRule rule = ml_rule(spec, nu);
        CodeSimulation a = simulate_random_code_failure(spec, code, rule, cfg);
        CodeSimulation b = simulate_random_code_failure(spec, code, rule, cfg);
        CHECK(a.failure == b.failure);
        CHECK(a.undetected == b.undetected);
        ExactFailureMatrix e = exact_failure(spec, code, rule);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(std::abs(a.failure(i, j) - e.failure(i, j)) <= 4 * std::max(a.failure_stderr(i, j), 1e-4));
                CHECK(std::abs(a.undetected(i, j) - e.undetected(i, j)) <=
                      4 * std::max(a.undetected_stderr(i, j), 1e-4));
            }
    }
    CHECK_THROWS_AS(simulate_random_code_failure(spec, make_code(20, 0.95, true), ml_rule(spec), cfg), Error);
}

TEST_CASE("queue simulation without traffic stays empty") {
    Matrix P = two_state_transition(0.0533, 0.08);
    QueueSimulation q = simulate_queue({P, "x"}, P, {0.0, 0.5}, 1.0, 50, {20000, 100, 5, 10}, {1, 0, 0});
    for (double t : q.tail) CHECK(t == 0.0);
    CHECK(q.tail.size() == 6);
}

TEST_CASE("always-succeed queue matches the analytic solver") {
    Matrix P = two_state_transition(0.0533, 0.08);
    const int N = 100;
    const double lambda = 0.003;
    QueueSimulation sim = simulate_queue({P, "x"}, P, {lambda, 0.5}, 1.0, N, {2000000, 10000, 6, 50}, {9, 0, 0});
    QueueBlocks b = build_blocks({P, "x"}, P, {lambda, 0.5}, 1.0, N);
    StationaryLevels lv = stationary_levels(b, solve_g_matrix(b));
    for (int q = 0; q <= 3; ++q) CHECK(std::abs(sim.tail[q] - tail_probability(lv, q)) <= 3 * sim.tail_stderr[q] + 1e-12);
}

TEST_CASE("state-dependent service matches the analytic solver") {
    Matrix P = two_state_transition(0.0533, 0.08);
    Matrix s(2, 2);
    s << 0.9 * P(0, 0), 0.6 * P(0, 1), 0.5 * P(1, 0), 0.7 * P(1, 1);
    const int N = 170;
    const double lambda = 1.0 / 575.0, rho_r = 0.5;
    QueueSimulation sim = simulate_queue({s, "x"}, P, {lambda, 0.5}, rho_r, N, {3000000, 10000, 6, 50}, {13, 0, 0});
    QueueBlocks b = build_blocks({s, "x"}, P, {lambda, 0.5}, rho_r, N);
    StationaryLevels lv = stationary_levels(b, solve_g_matrix(b));
    for (int q = 0; q <= 5; ++q) CHECK(std::abs(sim.tail[q] - tail_probability(lv, q)) <= 3 * sim.tail_stderr[q] + 1e-12);
}

TEST_CASE("coupled queues") {
    Matrix P = two_state_transition(0.0533, 0.08);
    Matrix s(2, 2);
    s << 0.9 * P(0, 0), 0.6 * P(0, 1), 0.5 * P(1, 0), 0.7 * P(1, 1);
    QueueSimOptions opt{200000, 1000, 8, 20};
    DominanceReport same = coupled_dominance_experiment({s, "a"}, {s, "b"}, P, {1.0 / 575.0, 0.5}, 0.5, 170, opt, {4, 0, 0});
    CHECK(same.violations == 0);
    CHECK(same.max_gap == 0);
    CHECK(same.tail_exact == same.tail_bound);
    DominanceReport worse =
        coupled_dominance_experiment({s, "a"}, {0.8 * s, "b"}, P, {1.0 / 575.0, 0.5}, 0.5, 170, opt, {4, 0, 0});
    CHECK(worse.violations == 0);
    for (std::size_t q = 0; q < worse.tail_exact.size(); ++q) CHECK(worse.tail_bound[q] >= worse.tail_exact[q]);
    QueueSimOptions short_run{5000, 0, 8, 5};
    DominanceReport never = coupled_dominance_experiment({s, "a"}, {Matrix::Zero(2, 2), "b"}, P, {1.0 / 575.0, 0.5},
                                                         0.5, 170, short_run, {4, 0, 0});
    CHECK(never.violations == 0);
    CHECK(never.max_gap > 0);
    CHECK_THROWS_AS(
        coupled_dominance_experiment({0.8 * s, "a"}, {s, "b"}, P, {1.0 / 575.0, 0.5}, 0.5, 170, opt, {4, 0, 0}), Error);
}
