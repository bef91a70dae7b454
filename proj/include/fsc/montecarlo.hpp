#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fsc/bounds.hpp"
#include "fsc/channel.hpp"
#include "fsc/exact.hpp"
#include "fsc/occupation.hpp"
#include "fsc/queueing.hpp"

namespace fsc {

struct SimConfig {
    std::uint64_t seed = 1;
    std::int64_t trials = 1000000;
    std::uint64_t stream = 0;  // stratification key
};

std::uint64_t splitmix64(std::uint64_t& state);

// Independent, replayable generator for (seed, stream).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

// Brute-force sum over all 2^N state paths.
DiscreteOccupancyLaw enumerate_occupancy_exact(double alpha, double beta, int N);

struct CodeSimulation {
    // Joint estimates P(event, S_N = j | S_0 = i).
    Matrix failure;
    Matrix failure_stderr;
    Matrix undetected;
    Matrix undetected_stderr;
    std::int64_t trials_per_state = 0;
};

// Random code of M = exp(log_M) words; ties and competitors within cost + nu count as failures,
// competitors within cost - nu as undetected errors.
CodeSimulation simulate_random_code_failure(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule,
                                            const SimConfig& config);

struct QueueSimOptions {
    std::int64_t steps = 1000000;
    std::int64_t warmup = 10000;
    int q_max = 20;
    int batches = 50;
};

struct QueueSimulation {
    // tail[q] estimates Pr(Q > q), q = 0..q_max.
    std::vector<double> tail;
    std::vector<double> tail_stderr;
    std::int64_t steps = 0;
};

// Lindley recursion Q' = (Q + A - D)^+ driven by a simulated block-level channel trace.
QueueSimulation simulate_queue(const SuccessMatrix& success, const Matrix& channel_transition,
                               const TrafficSpec& traffic, double rho_r, int N, const QueueSimOptions& options,
                               const SimConfig& config);

struct DominanceReport {
    std::vector<double> tail_exact;
    std::vector<double> tail_bound;
    std::int64_t steps = 0;
    std::int64_t violations = 0;
    std::int64_t max_gap = 0;
};

// Both queues share channel trace, arrivals, decode and completion uniforms; throws on any Q_bound < Q_exact.
DominanceReport coupled_dominance_experiment(const SuccessMatrix& exact, const SuccessMatrix& bound,
                                             const Matrix& channel_transition, const TrafficSpec& traffic,
                                             double rho_r, int N, const QueueSimOptions& options,
                                             const SimConfig& config);

}  // namespace fsc
