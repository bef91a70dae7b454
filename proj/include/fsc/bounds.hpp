#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fsc/channel.hpp"
#include "fsc/occupation.hpp"

namespace fsc {

struct CodeParams {
    int N = 0;
    double R_bits = 0.0;
    double R = 0.0;      // nats per code bit
    double log_M = 0.0;  // natural log of the codeword count
    bool integral_payload = true;

    double payload_bits() const { return N * R_bits; }
};

// Rejects non-integer N * R_bits unless allow_fractional is set.
CodeParams make_code(int N, double R_bits, bool allow_fractional = false);
bool integral_payload(int N, double R_bits);

enum class BoundKind { gallager_matrix, type_sum, rare_transition, undetected_bound, error_bound_with_margin };

std::string to_string(BoundKind kind);

struct FailureBoundMatrix {
    BoundKind kind = BoundKind::rare_transition;
    Matrix values;
    Matrix rho_star;
    Matrix v_star;
    double tau = 0.0;
};

double state_exponent_b(double eps, double rho);
std::vector<double> state_exponents(const FscSpec& spec, double rho);

// E0 for a type given as per-state visit counts; input_dist over {0, 1}.
double gallager_e0n(const FscSpec& spec, const std::vector<double>& input_dist, double rho,
                    const std::vector<int>& type_counts);

FailureBoundMatrix gallager_matrix_bound(const FscSpec& spec, const CodeParams& code, double rho);
FailureBoundMatrix type_sum_bound(const DiscreteOccupancyLaw& law, const FscSpec& spec, const CodeParams& code,
                                  double rho);
// Per-type optimization of rho inside the expectation.
Matrix type_sum_bound_inner_min(const DiscreteOccupancyLaw& law, const FscSpec& spec, const CodeParams& code);
FailureBoundMatrix rare_transition_bound(const ContinuousOccupancyLaw& law, const FscSpec& spec,
                                         const CodeParams& code, double rho);
// Any number of states: Stieltjes integral against the weighted occupation CDF of Q.
FailureBoundMatrix rare_transition_bound_general(const Matrix& Q, const FscSpec& spec, const CodeParams& code,
                                                 double rho, double tol = 1e-10);

// E[min{1, exp(-N (W - rho R + shift))}; S_N = j | S_0 = i]
using ShiftedBound = std::function<double(double rho, double shift, int i, int j)>;

ShiftedBound integral_form(const ContinuousOccupancyLaw& law, const FscSpec& spec, const CodeParams& code);
ShiftedBound discrete_form(const DiscreteOccupancyLaw& law, const FscSpec& spec, const CodeParams& code);
ShiftedBound gallager_form(const FscSpec& spec, const CodeParams& code);

struct RhoOptimum {
    double rho = 0.0;
    double value = 0.0;
};

RhoOptimum optimize_rho(const std::function<double(double)>& bound_fn, double grid_step = 0.01);

struct RhoVOptimum {
    double rho = 0.0;
    double v = 0.0;
    double value = 0.0;
};

// Nested search over 0 <= v <= rho <= 1.
RhoVOptimum optimize_rho_v(const std::function<double(double, double)>& bound_fn, double grid_step = 0.01);

// Per-entry rho optimization of a shifted bound with zero shift.
FailureBoundMatrix optimize_entries(BoundKind kind, const ShiftedBound& bound, int S, double grid_step = 0.01);

enum class TiltPolicy {
    forney,  // v = rho / (1 + rho)
    joint    // common (rho, v) minimizing failure subject to the undetected target
};

struct MarginBounds {
    FailureBoundMatrix undetected;
    FailureBoundMatrix failure;
};

// Undetected exponent shift (1 - v) tau, failure exponent shift -v tau.
MarginBounds undetected_and_error_bounds(const ShiftedBound& bound, int S, double tau,
                                         TiltPolicy policy = TiltPolicy::forney, double target = 0.0,
                                         double grid_step = 0.01);

double state_average(const Matrix& values, const Vector& initial);

}  // namespace fsc
