#include <cmath>

#include "doctest.h"
#include "fsc/bounds.hpp"
#include "fsc/channel.hpp"
#include "fsc/error.hpp"
#include "fsc/exact.hpp"
#include "fsc/numeric.hpp"
#include "oracles.hpp"

using namespace fsc;

namespace {

// Direct double loop over (t1, t2).
double volume_loop(int n1, int n2, double d, double gamma) {
    double v = 0.0;
    for (int t1 = 0; t1 <= n1; ++t1)
        for (int t2 = 0; t2 <= n2; ++t2)
            if (gamma * t1 + t2 <= d + 1e-12) v += std::round(std::exp(log_binomial(n1, t1) + log_binomial(n2, t2)));
    return v;
}

}  // namespace

TEST_CASE("decoder weights") {
    CHECK(ml_gamma(0.01, 0.1) == doctest::Approx(2.0913).epsilon(1e-4));
    CHECK(ml_gamma(0.1, 0.1) == 1.0);
    CHECK_THROWS_AS(ml_gamma(0.0, 0.1), Error);
    FscSpec spec = build_gilbert_elliott(0.0533, 0.08, 0.01, 0.1);
    CHECK(ml_rule(spec, 3).nu == 3);
    CHECK(md_rule().gamma == 1.0);
}

TEST_CASE("volume counts") {
    CHECK(volume_count(3, 2, 1, 1.0) == 6.0);
    CHECK(volume_count(2, 2, 100, 2.0913) == 16.0);
    CHECK(volume_count(4, 3, -0.5, 1.0) == 0.0);
    for (int n1 : {0, 3, 9})
        for (int n2 : {0, 4, 11})
            for (double d : {0.0, 2.0913, 4.5, 7.0})
                for (double g : {1.0, 2.0913}) CHECK(volume_count(n1, n2, d, g) == volume_loop(n1, n2, d, g));
    // Boundary ties count.
    CHECK(volume_count(3, 3, 2.0913 + 1.0, 2.0913) == volume_loop(3, 3, 3.0913, 2.0913));
}

TEST_CASE("conditional failure") {
    CodeParams two = make_code(2, 0.5);
    CHECK(conditional_failure(2, 0, 0, 0, two, md_rule()) == doctest::Approx(0.25).epsilon(1e-14));
    CodeParams single = two;
    single.log_M = 0.0;
    CHECK(conditional_failure(2, 0, 1, 0, single, md_rule()) == 0.0);
    CHECK(conditional_failure(2, 0, 0, 0, two, md_rule(10)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(conditional_failure(2, 0, 3, 0, two, md_rule()), Error);
}

TEST_CASE("equal crossovers reproduce the single-state random-coding failure") {
    for (int N : {12, 30})
        for (double Rb : {0.25, 0.5})
            for (double nu : {0.0, 1.0, 2.5}) {
                CodeParams code = make_code(N, Rb, true);
                TypeConditionalFailure t = failure_given_type(0.07, 0.07, code, md_rule(nu));
                double ref = oracle::bsc_failure(N, 0.07, code.log_M, nu);
                for (int n1 = 0; n1 <= N; ++n1) CHECK(std::abs(t.failure[n1] - ref) <= 1e-12);
            }
}

TEST_CASE("margin monotonicity and ordering") {
    for (double a : {0.0533, 0.2})
        for (int N : {20, 40}) {
            FscSpec spec = build_gilbert_elliott(a, 0.08, 0.01, 0.1);
            CodeParams code = make_code(N, 0.5);
            for (bool ml : {true, false}) {
                Matrix pf, pu;
                for (int nu = 0; nu <= 6; ++nu) {
                    DecoderRule rule = ml ? ml_rule(spec, nu) : md_rule(nu);
                    ExactFailureMatrix e = exact_failure(spec, code, rule);
                    CHECK(((e.undetected - e.failure).array() <= 1e-15).all());
                    CHECK((e.failure.array() >= 0.0).all());
                    CHECK((e.failure.array() <= 1.0).all());
                    if (nu == 0) CHECK((e.undetected - e.failure).cwiseAbs().maxCoeff() <= 1e-15);
                    if (nu > 0) {
                        CHECK(((e.failure - pf).array() >= -1e-15).all());
                        CHECK(((e.undetected - pu).array() <= 1e-15).all());
                    }
                    pf = e.failure;
                    pu = e.undetected;
                }
                DecoderRule far = ml ? ml_rule(spec, 1000) : md_rule(1000);
                CHECK(undetected_matrix_exact(spec, code, far).cwiseAbs().maxCoeff() == 0.0);
            }
        }
}

TEST_CASE("exact failure is bounded by the final-state law") {
    FscSpec spec = build_gilbert_elliott(0.0533, 0.08, 0.01, 0.1);
    CodeParams code = make_code(40, 0.5);
    Matrix f = failure_matrix_exact(spec, code, ml_rule(spec));
    Matrix P = block_transition(spec, 40);
    CHECK(((f - P).array() <= 1e-15).all());
    // ML weighting never does worse than minimum distance on this channel.
    Matrix md = failure_matrix_exact(spec, code, md_rule());
    Vector pi = stationary_distribution(spec.P());
    CHECK(state_average(f, pi) <= state_average(md, pi));
}
