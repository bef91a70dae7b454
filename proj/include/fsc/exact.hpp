#pragma once

#include <vector>

#include "fsc/bounds.hpp"
#include "fsc/channel.hpp"
#include "fsc/occupation.hpp"

namespace fsc {

struct DecoderRule {
    double gamma = 1.0;
    double nu = 0.0;
};

double ml_gamma(double eps1, double eps2);
DecoderRule ml_rule(const FscSpec& spec, double nu = 0.0);
DecoderRule md_rule(double nu = 0.0);

// Natural log of sum over gamma*t1 + t2 <= d of C(n1, t1) C(n2, t2); -inf when empty.
double log_volume_count(int n1, int n2, double d, double gamma);
double volume_count(int n1, int n2, double d, double gamma);

// Probability that some competitor falls within the decoding radius.
double conditional_failure(int n1, int n2, int e1, int e2, const CodeParams& code, const DecoderRule& rule);

// Failure and undetected-error probabilities given N1 = n1, for n1 = 0..N.
struct TypeConditionalFailure {
    std::vector<double> failure;
    std::vector<double> undetected;
};

TypeConditionalFailure failure_given_type(double eps1, double eps2, const CodeParams& code, const DecoderRule& rule);

struct ExactFailureMatrix {
    Matrix failure;
    Matrix undetected;
    CodeParams code;
    DecoderRule rule;
};

ExactFailureMatrix exact_failure(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule);
Matrix failure_matrix_exact(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule);
Matrix undetected_matrix_exact(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule);

}  // namespace fsc
