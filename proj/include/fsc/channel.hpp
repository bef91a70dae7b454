#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace fsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DiscreteDynamics {
    Matrix P;
};

struct ContinuousDynamics {
    Matrix Q;
};

using Dynamics = std::variant<DiscreteDynamics, ContinuousDynamics>;

// Finite-state channel with binary-symmetric per-state channels.
struct FscSpec {
    int num_states = 0;
    std::vector<double> crossover;
    Dynamics dynamics;

    bool is_discrete() const { return std::holds_alternative<DiscreteDynamics>(dynamics); }
    const Matrix& P() const;
    const Matrix& Q() const;
};

struct UniformizedChain {
    Matrix A;
    double sigma = 0.0;
    bool degenerate = false;
};

// Two-state generator rates: 1 -> 2 at mu, 2 -> 1 at xi.
struct GeneratorRates {
    double mu = 0.0;
    double xi = 0.0;
};

void validate_stochastic(const Matrix& P);
void validate_generator(const Matrix& Q);
void validate(const FscSpec& spec);

FscSpec make_spec(std::vector<double> crossover, Dynamics dynamics);

FscSpec build_gilbert_elliott(double alpha, double beta, double eps1, double eps2);
FscSpec build_gilbert_elliott_continuous(double mu, double xi, double eps1, double eps2);

Matrix two_state_generator(double mu, double xi);
Matrix two_state_transition(double alpha, double beta);

Matrix matrix_exponential(const Matrix& X);
Matrix transition_matrix_from_generator(const Matrix& Q, double N);
Matrix two_state_sampled_closed_form(double mu, double xi, double N);

GeneratorRates generator_from_discrete(double alpha, double beta, double N);

UniformizedChain uniformize(const Matrix& Q);

Vector stationary_distribution(const Matrix& P);

// Transition matrix of the channel over one block of N uses.
Matrix block_transition(const FscSpec& spec, int N);

double binary_entropy_bits(double p);
double csi_capacity(const FscSpec& spec);

std::string spec_to_json(const FscSpec& spec);
FscSpec spec_from_json(const std::string& text);

}  // namespace fsc
