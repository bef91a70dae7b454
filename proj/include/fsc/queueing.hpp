#pragma once

#include <string>
#include <vector>

#include "fsc/channel.hpp"

namespace fsc {

struct TrafficSpec {
    double lambda = 0.0;  // packets per channel use
    double p_geo = 0.5;   // geometric packet-length parameter, per bit
};

// s(c, d) = P(decoding succeeds, next channel state d | channel state c).
struct SuccessMatrix {
    Matrix s;
    std::string provenance;
};

SuccessMatrix success_from_failure(const Matrix& channel_transition, const Matrix& failure,
                                   const std::string& provenance);

// Block-partitioned transition structure of the (queue length, channel state) chain.
struct QueueBlocks {
    Matrix down;                    // level q -> q - 1
    Matrix local;                   // level q -> q
    std::vector<Matrix> up;         // up[i - 1]: level q -> q + i
    Matrix boundary_local;          // level 0 -> 0
    std::vector<Matrix> boundary_up;  // boundary_up[i - 1]: level 0 -> i
    Matrix channel;
    Matrix success;
    std::vector<double> arrivals;   // Poisson(lambda N) probabilities
    double rho_r = 1.0;
    double lambda_n = 0.0;

    // A_0 = down, A_1 = local, A_{k+1} = up[k - 1].
    Matrix A(int k) const;
    // Boundary transition from level 0 to level k.
    Matrix boundary(int k) const;
    int max_jump() const { return static_cast<int>(up.size()); }
};

struct StationaryLevels {
    std::vector<Vector> pi;
    double residual = 0.0;
};

double completion_probability(double p_geo, double R_bits, int N);

QueueBlocks build_blocks(const SuccessMatrix& success, const Matrix& channel_transition, const TrafficSpec& traffic,
                         double rho_r, int N, double tol = 1e-14);

double stability_drift(const QueueBlocks& blocks);

Matrix solve_g_matrix(const QueueBlocks& blocks, double tol = 1e-13, int max_iter = 100000);

StationaryLevels stationary_levels(const QueueBlocks& blocks, const Matrix& G, int q_max = 100000,
                                   double tol = 1e-10);

double tail_probability(const StationaryLevels& levels, int q, double residual_tol = 1e-9);

struct QueueResult {
    double tail = 1.0;
    double drift = 0.0;
    double residual = 0.0;
    bool stable = false;
};

// Drift check, G matrix, levels and tail at the threshold; unstable chains report tail 1.
QueueResult solve_queue_tail(const SuccessMatrix& success, const Matrix& channel_transition,
                             const TrafficSpec& traffic, double R_bits, int N, int threshold);

}  // namespace fsc
