#pragma once

#include <array>
#include <ostream>
#include <vector>

#include "fsc/channel.hpp"

namespace fsc {

// States are indexed from 0; index 0 is the lowest-crossover state.
// N1 counts visits to state 0 among s_0..s_{N-1}.
struct DiscreteOccupancyLaw {
    int N = 0;
    // table[m][i][j] = P(N1 = m, S_N = j | S_0 = i)
    std::vector<std::array<std::array<double, 2>, 2>> table;

    double operator()(int m, int i, int j) const { return table[m][i][j]; }
    Matrix final_state_matrix() const;
};

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

// Occupation fraction of state 0 over a unit interval for a two-state CTMC.
struct ContinuousOccupancyLaw {
    double mu = 0.0;  // rate 0 -> 1
    double xi = 0.0;  // rate 1 -> 0

    double density(double r, int i, int j) const;
    Atom atom(int i, int j) const;
    // P(eta <= r, S_f = j | S_i = i)
    double cdf(double r, int i, int j) const;
    Matrix final_state_matrix() const;
};

DiscreteOccupancyLaw discrete_occupancy_law(double alpha, double beta, int N);
ContinuousOccupancyLaw continuous_occupancy_law(double mu, double xi);

// Matrix CDF of W = sum_i b_i * eta_i for a CTMC over a unit interval.
class WeightedOccupancyCdf {
public:
    WeightedOccupancyCdf(const Matrix& Q, std::vector<double> b, double tol = 1e-10);

    // [G(w)]_{ij} = P(W <= w, S_f = j | S_i = i)
    Matrix operator()(double w) const;

    const std::vector<double>& weights() const { return b_; }
    int truncation() const { return static_cast<int>(poisson_.size()) - 1; }
    bool degenerate() const { return degenerate_; }

private:
    // coef_[n][k][c] is the (n+1) x S block C^{(k)}_{c,.}(n, l) for l = 0..n.
    std::vector<std::vector<std::vector<Matrix>>> coef_;
    std::vector<double> b_;
    std::vector<double> poisson_;
    Matrix full_;
    int S_ = 0;
    bool degenerate_ = false;
};

Matrix weighted_cdf_matrix(const Matrix& Q, const std::vector<double>& b, double w, double tol = 1e-10);

// Sup distance over r, i, j between the CDFs of N1/N and eta.
double kolmogorov_distance(const DiscreteOccupancyLaw& disc, const ContinuousOccupancyLaw& cont);

void write_csv(std::ostream& os, const DiscreteOccupancyLaw& law);
void write_csv(std::ostream& os, const ContinuousOccupancyLaw& law, int points);
void write_atoms_csv(std::ostream& os, const ContinuousOccupancyLaw& law);

}  // namespace fsc
