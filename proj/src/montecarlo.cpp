#include "fsc/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "fsc/error.hpp"
#include "fsc/numeric.hpp"

namespace fsc {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    std::uint64_t t = stream ^ a;
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(splitmix64(t)), static_cast<std::uint32_t>(splitmix64(t) >> 32)};
    return std::mt19937_64(seq);
}

namespace {

double uniform(std::mt19937_64& g) { return std::generate_canonical<double, 64>(g); }

int draw_state(const Matrix& P, int c, double u) {
    const int S = static_cast<int>(P.cols());
    double acc = 0.0;
    for (int d = 0; d < S - 1; ++d) {
        acc += P(c, d);
        if (u < acc) return d;
    }
    return S - 1;
}

double binomial_stderr(double p, std::int64_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

}  // namespace

DiscreteOccupancyLaw enumerate_occupancy_exact(double alpha, double beta, int N) {
    require(N >= 1 && N <= 14, "enumeration limited to 1 <= N <= 14");
    require(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0, "transition probabilities out of range");
    const double P[2][2] = {{1.0 - alpha, alpha}, {beta, 1.0 - beta}};
    DiscreteOccupancyLaw law;
    law.N = N;
    law.table.assign(N + 1, {});
    for (int i = 0; i < 2; ++i) {
        // Path bits encode s_1..s_N.
        for (std::uint32_t path = 0; path < (1u << N); ++path) {
            double prob = 1.0;
            int prev = i, visits = (i == 0) ? 1 : 0;
            for (int k = 0; k < N; ++k) {
                int next = (path >> k) & 1u;
                prob *= P[prev][next];
                if (k < N - 1 && next == 0) ++visits;
                prev = next;
            }
            law.table[visits][i][prev] += prob;
        }
    }
    return law;
}

CodeSimulation simulate_random_code_failure(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule,
                                            const SimConfig& config) {
    require(spec.is_discrete(), "simulation needs a discrete-time channel");
    const int N = code.N;
    const int S = spec.num_states;
    require(N >= 1 && N <= 63, "simulation supports 1 <= N <= 63");
    const double Mreal = std::exp(code.log_M);
    const std::int64_t M = std::llround(Mreal);
    require(M >= 1 && M <= 4096 && std::abs(Mreal - M) < 1e-6 * Mreal, "codebook size must be a small integer");
    require(S == 2, "decoder weights are defined for two states");
    const Matrix& P = spec.P();
    const std::uint64_t mask = (N == 64) ? ~0ULL : ((1ULL << N) - 1);

    CodeSimulation out;
    out.trials_per_state = config.trials;
    out.failure = out.failure_stderr = out.undetected = out.undetected_stderr = Matrix::Zero(S, S);
    const double slack = 1e-9;
    for (int i = 0; i < S; ++i) {
        auto g = make_stream(config.seed, config.stream * 64 + static_cast<std::uint64_t>(i));
        std::vector<std::int64_t> fail(S, 0), ue(S, 0);
        for (std::int64_t t = 0; t < config.trials; ++t) {
            int state = i;
            std::uint64_t in_first = 0, errors = 0;
            for (int k = 0; k < N; ++k) {
                if (state == 0) in_first |= 1ULL << k;
                if (uniform(g) < spec.crossover[state]) errors |= 1ULL << k;
                state = draw_state(P, state, uniform(g));
            }
            const std::uint64_t sent = g() & mask;
            const std::uint64_t received = sent ^ errors;
            auto cost = [&](std::uint64_t word) {
                std::uint64_t diff = word ^ received;
                return rule.gamma * std::popcount(diff & in_first) + std::popcount(diff & ~in_first & mask);
            };
            const double own = cost(sent);
            bool f = false, u = false;
            for (std::int64_t m = 1; m < M; ++m) {
                double c = cost(g() & mask);
                if (c <= own + rule.nu + slack) f = true;
                if (c <= own - rule.nu + slack) u = true;
            }
            if (f) ++fail[state];
            if (u) ++ue[state];
        }
        for (int j = 0; j < S; ++j) {
            double pf = static_cast<double>(fail[j]) / config.trials;
            double pu = static_cast<double>(ue[j]) / config.trials;
            out.failure(i, j) = pf;
            out.undetected(i, j) = pu;
            out.failure_stderr(i, j) = binomial_stderr(pf, config.trials);
            out.undetected_stderr(i, j) = binomial_stderr(pu, config.trials);
        }
    }
    return out;
}

namespace {

struct QueueStep {
    int next_state;
    int arrivals;
    double decode_u;
    double complete_u;
};

class QueueDriver {
public:
    QueueDriver(const Matrix& P, double lambda_n, const SimConfig& config)
        : P_(P), gen_(make_stream(config.seed, config.stream)), arrivals_(lambda_n > 0.0 ? lambda_n : 1.0),
          has_arrivals_(lambda_n > 0.0) {
        Vector pi = stationary_distribution(P);
        state_ = draw_state(pi.transpose(), 0, uniform(gen_));
    }

    int state() const { return state_; }

    QueueStep next() {
        QueueStep s;
        s.next_state = draw_state(P_, state_, uniform(gen_));
        s.arrivals = has_arrivals_ ? arrivals_(gen_) : 0;
        s.decode_u = uniform(gen_);
        s.complete_u = uniform(gen_);
        return s;
    }

    void advance(const QueueStep& s) { state_ = s.next_state; }

private:
    Matrix P_;
    std::mt19937_64 gen_;
    std::poisson_distribution<int> arrivals_;
    bool has_arrivals_;
    int state_ = 0;
};

bool departs(const Matrix& s, const Matrix& P, int c, const QueueStep& step, double rho_r) {
    double p = P(c, step.next_state);
    double succ = p > 0.0 ? s(c, step.next_state) / p : 0.0;
    return step.decode_u < succ && step.complete_u < rho_r;
}

class TailAccumulator {
public:
    TailAccumulator(int q_max, std::int64_t steps, int batches)
        : q_max_(q_max), batch_len_(std::max<std::int64_t>(1, steps / std::max(1, batches))),
          current_(q_max + 1, 0), total_(q_max + 1, 0) {}

    void add(std::int64_t q) {
        for (int k = 0; k <= q_max_ && q > k; ++k) {
            ++current_[k];
            ++total_[k];
        }
        ++in_batch_;
        ++count_;
        if (in_batch_ == batch_len_) {
            std::vector<double> means(q_max_ + 1);
            for (int k = 0; k <= q_max_; ++k) means[k] = static_cast<double>(current_[k]) / batch_len_;
            batch_means_.push_back(std::move(means));
            std::fill(current_.begin(), current_.end(), 0);
            in_batch_ = 0;
        }
    }

    void finish(std::vector<double>& tail, std::vector<double>& err) const {
        tail.assign(q_max_ + 1, 0.0);
        err.assign(q_max_ + 1, 0.0);
        if (count_ == 0) return;
        const auto B = static_cast<double>(batch_means_.size());
        for (int k = 0; k <= q_max_; ++k) {
            tail[k] = static_cast<double>(total_[k]) / count_;
            if (B < 2) continue;
            double mean = 0.0, var = 0.0;
            for (const auto& b : batch_means_) mean += b[k];
            mean /= B;
            for (const auto& b : batch_means_) var += (b[k] - mean) * (b[k] - mean);
            err[k] = std::sqrt(var / (B - 1.0) / B);
        }
    }

private:
    int q_max_;
    std::int64_t batch_len_;
    std::vector<std::int64_t> current_, total_;
    std::vector<std::vector<double>> batch_means_;
    std::int64_t in_batch_ = 0, count_ = 0;
};

void check_queue_inputs(const Matrix& s, const Matrix& P, double rho_r) {
    require(s.rows() == P.rows() && s.cols() == P.cols(), "success matrix size mismatch");
    require(rho_r >= 0.0 && rho_r <= 1.0, "rho_r must lie in [0, 1]");
    validate_stochastic(P);
}

}  // namespace

QueueSimulation simulate_queue(const SuccessMatrix& success, const Matrix& channel_transition,
                               const TrafficSpec& traffic, double rho_r, int N, const QueueSimOptions& options,
                               const SimConfig& config) {
    check_queue_inputs(success.s, channel_transition, rho_r);
    QueueDriver driver(channel_transition, traffic.lambda * N, config);
    TailAccumulator acc(options.q_max, options.steps, options.batches);
    std::int64_t q = 0;
    for (std::int64_t t = 0; t < options.warmup + options.steps; ++t) {
        int c = driver.state();
        QueueStep step = driver.next();
        int d = departs(success.s, channel_transition, c, step, rho_r) ? 1 : 0;
        q = std::max<std::int64_t>(0, q + step.arrivals - d);
        driver.advance(step);
        if (t >= options.warmup) acc.add(q);
    }
    QueueSimulation out;
    out.steps = options.steps;
    acc.finish(out.tail, out.tail_stderr);
    return out;
}

DominanceReport coupled_dominance_experiment(const SuccessMatrix& exact, const SuccessMatrix& bound,
                                             const Matrix& channel_transition, const TrafficSpec& traffic,
                                             double rho_r, int N, const QueueSimOptions& options,
                                             const SimConfig& config) {
    check_queue_inputs(exact.s, channel_transition, rho_r);
    check_queue_inputs(bound.s, channel_transition, rho_r);
    require(((exact.s - bound.s).array() >= -1e-15).all(), "bound success must not exceed exact success");
    QueueDriver driver(channel_transition, traffic.lambda * N, config);
    TailAccumulator acc_exact(options.q_max, options.steps, options.batches);
    TailAccumulator acc_bound(options.q_max, options.steps, options.batches);
    std::int64_t q = 0, qb = 0;
    DominanceReport out;
    for (std::int64_t t = 0; t < options.warmup + options.steps; ++t) {
        int c = driver.state();
        QueueStep step = driver.next();
        q = std::max<std::int64_t>(0, q + step.arrivals - (departs(exact.s, channel_transition, c, step, rho_r) ? 1 : 0));
        qb = std::max<std::int64_t>(0, qb + step.arrivals - (departs(bound.s, channel_transition, c, step, rho_r) ? 1 : 0));
        driver.advance(step);
        if (qb < q) ++out.violations;
        out.max_gap = std::max(out.max_gap, qb - q);
        if (t >= options.warmup) {
            acc_exact.add(q);
            acc_bound.add(qb);
        }
    }
    out.steps = options.steps;
    std::vector<double> err;
    acc_exact.finish(out.tail_exact, err);
    acc_bound.finish(out.tail_bound, err);
    if (out.violations > 0)
        throw Error("pathwise dominance violated in " + std::to_string(out.violations) + " steps");
    return out;
}

}  // namespace fsc
