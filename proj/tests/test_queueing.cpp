#include <cmath>
#include <random>

#include "doctest.h"
#include "fsc/channel.hpp"
#include "fsc/error.hpp"
#include "fsc/numeric.hpp"
#include "fsc/queueing.hpp"
#include "oracles.hpp"

using namespace fsc;

namespace {

struct Solved {
    QueueBlocks blocks;
    StationaryLevels levels;
};

Solved solve(const Matrix& s, const Matrix& P, double lambda, double rho_r, int N) {
    Solved out{build_blocks({s, "test"}, P, {lambda, 0.5}, rho_r, N), {}};
    out.levels = stationary_levels(out.blocks, solve_g_matrix(out.blocks));
    return out;
}

}  // namespace

TEST_CASE("packet completion probability") {
    CHECK(completion_probability(0.005, 0.5, 170) == doctest::Approx(1 - std::pow(0.995, 85)).epsilon(1e-14));
    CHECK(completion_probability(0.005, 0.5, 170) == doctest::Approx(0.3467).epsilon(1e-3));
    CHECK(completion_probability(1.0, 0.5, 170) == 1.0);
    CHECK(completion_probability(0.02, 1.0 / 50, 50) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(completion_probability(1e-300, 0.5, 170) > 0.0);
}

TEST_CASE("success matrix from failure") {
    Matrix P = two_state_transition(0.2, 0.3);
    Matrix F(2, 2);
    F << 0.1, 0.05, 0.0, 0.2;
    SuccessMatrix s = success_from_failure(P, F, "exact");
    CHECK((s.s - (P - F)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.provenance == "exact");
}

TEST_CASE("aggregated blocks equal the per-outcome triple sum") {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int N = 6;
    Matrix P = two_state_transition(0.15, 0.35);
    const double lambda = 0.2, rho_r = 0.63;
    // Outcome weights over (n1, e1, e2) for each (c, d), normalised to P(c, d), with per-outcome failure.
    std::vector<std::array<int, 3>> outcomes;
    for (int n1 = 0; n1 <= N; ++n1)
        for (int e1 = 0; e1 <= n1; ++e1)
            for (int e2 = 0; e2 <= N - n1; ++e2) outcomes.push_back({n1, e1, e2});
    std::vector<double> fail(outcomes.size());
    for (auto& f : fail) f = U(g);
    std::vector<std::vector<double>> w(4, std::vector<double>(outcomes.size()));
    Matrix F = Matrix::Zero(2, 2);
    for (int cd = 0; cd < 4; ++cd) {
        double total = 0.0;
        for (auto& x : w[cd]) total += (x = U(g));
        for (std::size_t o = 0; o < outcomes.size(); ++o) {
            w[cd][o] *= P(cd / 2, cd % 2) / total;
            F(cd / 2, cd % 2) += w[cd][o] * fail[o];
        }
    }
    QueueBlocks b = build_blocks(success_from_failure(P, F, "test"), P, {lambda, 0.5}, rho_r, N, 1e-14);
    auto a = oracle::poisson(lambda * N, 60);
    double worst = 0.0;
    for (int k = 0; k <= b.max_jump() + 1; ++k) {
        Matrix direct = Matrix::Zero(2, 2), direct0 = Matrix::Zero(2, 2);
        for (int cd = 0; cd < 4; ++cd)
            for (std::size_t o = 0; o < outcomes.size(); ++o) {
                double serve = (1.0 - fail[o]) * rho_r;
                double ww = w[cd][o];
                // Level q >= 1 moves by (arrivals - departure); level 0 cannot serve before an arrival.
                double to_k = k == 0 ? a[0] * serve : a[k - 1] * (1 - serve) + a[k] * serve;
                direct(cd / 2, cd % 2) += ww * to_k;
                double from0 = k == 0 ? a[0] + a[1] * serve : a[k] * (1 - serve) + a[k + 1] * serve;
                direct0(cd / 2, cd % 2) += ww * from0;
            }
        worst = std::max(worst, (b.A(k) - direct).cwiseAbs().maxCoeff());
        worst = std::max(worst, (b.boundary(k) - direct0).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-12);
    Matrix rows = Matrix::Zero(2, 2), rows0 = Matrix::Zero(2, 2);
    for (int k = 0; k <= b.max_jump() + 1; ++k) {
        rows += b.A(k);
        rows0 += b.boundary(k);
    }
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(rows.row(c).sum() - 1.0) <= 1e-12);
        CHECK(std::abs(rows0.row(c).sum() - 1.0) <= 1e-12);
    }
}

TEST_CASE("state-independent service reduces to the scalar queue") {
    Matrix P = two_state_transition(0.0533, 0.08);
    for (double frac : {0.9, 0.6})
        for (double rho_r : {0.35, 1.0}) {
            const double lambda = 0.002;
            const int N = 100;
            Solved s = solve(frac * P, P, lambda, rho_r, N);
            for (int q : {0, 2, 5, 9}) {
                double ref = oracle::scalar_queue_tail(lambda * N, frac * rho_r, q);
                CHECK(tail_probability(s.levels, q) == doctest::Approx(ref).epsilon(1e-8));
            }
        }
}

TEST_CASE("stationary levels conserve mass") {
    Matrix P = two_state_transition(0.0533, 0.08);
    Matrix s(2, 2);
    s << 0.8 * P(0, 0), 0.5 * P(0, 1), 0.3 * P(1, 0), 0.6 * P(1, 1);
    Solved sol = solve(s, P, 1.0 / 575.0, 0.6, 170);
    CompensatedSum mass;
    for (const auto& v : sol.levels.pi) {
        CHECK((v.array() >= 0.0).all());
        mass += v.sum();
    }
    CHECK(std::abs(mass.value() + sol.levels.residual - 1.0) <= 1e-10);
    CHECK(tail_probability(sol.levels, -1) == 1.0);
    // G is stochastic for a positive recurrent chain.
    Matrix G = solve_g_matrix(sol.blocks);
    for (int c = 0; c < 2; ++c) CHECK(std::abs(G.row(c).sum() - 1.0) <= 1e-10);
    CHECK(stability_drift(sol.blocks) < 0.0);
    CHECK(tail_probability(sol.levels, static_cast<int>(sol.levels.pi.size()) + 5) <= 1e-10);
}

TEST_CASE("empty traffic") {
    Matrix P = two_state_transition(0.0533, 0.08);
    Solved s = solve(P, P, 0.0, 1.0, 50);
    CHECK(tail_probability(s.levels, 0) <= 1e-14);
    CHECK(stability_drift(s.blocks) == doctest::Approx(-1.0));
    Matrix G = solve_g_matrix(s.blocks);
    for (int c = 0; c < 2; ++c) CHECK(G.row(c).sum() == doctest::Approx(1.0));
}

TEST_CASE("always failing decoder is unstable") {
    Matrix P = two_state_transition(0.0533, 0.08);
    QueueResult r = solve_queue_tail({Matrix::Zero(2, 2), "test"}, P, {1.0 / 575.0, 0.01}, 0.5, 170, 5);
    CHECK(!r.stable);
    CHECK(r.tail == 1.0);
    CHECK(r.drift > 0.0);
    QueueBlocks b = build_blocks({Matrix::Zero(2, 2), "test"}, P, {0.01, 0.5}, 0.5, 100);
    CHECK_THROWS_AS(stationary_levels(b, Matrix::Identity(2, 2)), Error);
}

TEST_CASE("larger success never increases the tail") {
    Matrix P = two_state_transition(0.0533, 0.08);
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> U(0.85, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        Matrix hi(2, 2), lo(2, 2);
        for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) {
                double x = U(g), y = U(g);
                hi(c, d) = std::max(x, y) * P(c, d);
                lo(c, d) = std::min(x, y) * P(c, d);
            }
        QueueResult a = solve_queue_tail({hi, "hi"}, P, {1.0 / 575.0, 0.01}, 0.5, 170, 0);
        Solved sa = solve(hi, P, 1.0 / 575.0, completion_probability(0.01, 0.5, 170), 170);
        Solved sb = solve(lo, P, 1.0 / 575.0, completion_probability(0.01, 0.5, 170), 170);
        CHECK(a.tail == doctest::Approx(tail_probability(sa.levels, 0)).epsilon(1e-12));
        for (int q = 0; q <= 12; ++q) CHECK(tail_probability(sa.levels, q) <= tail_probability(sb.levels, q) + 1e-12);
    }
}
