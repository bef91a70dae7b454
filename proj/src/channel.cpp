#include "fsc/channel.hpp"

#include <cmath>
#include <queue>

#include "json.hpp"

#include "fsc/error.hpp"

namespace fsc {

namespace {

constexpr double kRowTol = 1e-12;

bool strongly_connected(const Matrix& P) {
    const int S = static_cast<int>(P.rows());
    auto reach_all = [&](bool transpose) {
        std::vector<bool> seen(S, false);
        std::queue<int> todo;
        todo.push(0);
        seen[0] = true;
        while (!todo.empty()) {
            int u = todo.front();
            todo.pop();
            for (int v = 0; v < S; ++v) {
                double w = transpose ? P(v, u) : P(u, v);
                if (w > 0.0 && !seen[v]) {
                    seen[v] = true;
                    todo.push(v);
                }
            }
        }
        for (bool s : seen)
            if (!s) return false;
        return true;
    };
    return reach_all(false) && reach_all(true);
}

}  // namespace

const Matrix& FscSpec::P() const {
    require(is_discrete(), "channel has continuous dynamics");
    return std::get<DiscreteDynamics>(dynamics).P;
}

const Matrix& FscSpec::Q() const {
    require(!is_discrete(), "channel has discrete dynamics");
    return std::get<ContinuousDynamics>(dynamics).Q;
}

void validate_stochastic(const Matrix& P) {
    require(P.rows() == P.cols() && P.rows() >= 1, "transition matrix must be square");
    for (int i = 0; i < P.rows(); ++i) {
        for (int j = 0; j < P.cols(); ++j)
            require(P(i, j) >= 0.0 && std::isfinite(P(i, j)), "transition matrix has a negative entry");
        require(std::abs(P.row(i).sum() - 1.0) <= kRowTol, "transition matrix row does not sum to 1");
    }
}

void validate_generator(const Matrix& Q) {
    require(Q.rows() == Q.cols() && Q.rows() >= 1, "generator must be square");
    for (int i = 0; i < Q.rows(); ++i) {
        for (int j = 0; j < Q.cols(); ++j) {
            require(std::isfinite(Q(i, j)), "generator has a non-finite entry");
            if (i != j) require(Q(i, j) >= 0.0, "generator has a negative off-diagonal entry");
        }
        double scale = std::max(1.0, std::abs(Q(i, i)));
        require(std::abs(Q.row(i).sum()) <= kRowTol * scale, "generator row does not sum to 0");
    }
}

void validate(const FscSpec& spec) {
    require(spec.num_states >= 1, "channel needs at least one state");
    require(static_cast<int>(spec.crossover.size()) == spec.num_states, "crossover count mismatch");
    for (int i = 0; i < spec.num_states; ++i) {
        double e = spec.crossover[i];
        require(e >= 0.0 && e <= 0.5, "crossover probability outside [0, 1/2]");
        if (i > 0) require(spec.crossover[i - 1] < e, "crossover probabilities must be strictly increasing");
    }
    if (spec.is_discrete()) {
        require(spec.P().rows() == spec.num_states, "transition matrix size mismatch");
        validate_stochastic(spec.P());
    } else {
        require(spec.Q().rows() == spec.num_states, "generator size mismatch");
        validate_generator(spec.Q());
    }
}

FscSpec make_spec(std::vector<double> crossover, Dynamics dynamics) {
    FscSpec spec;
    spec.num_states = static_cast<int>(crossover.size());
    spec.crossover = std::move(crossover);
    spec.dynamics = std::move(dynamics);
    validate(spec);
    return spec;
}

Matrix two_state_transition(double alpha, double beta) {
    Matrix P(2, 2);
    P << 1.0 - alpha, alpha, beta, 1.0 - beta;
    return P;
}

Matrix two_state_generator(double mu, double xi) {
    Matrix Q(2, 2);
    Q << -mu, mu, xi, -xi;
    return Q;
}

FscSpec build_gilbert_elliott(double alpha, double beta, double eps1, double eps2) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
    require(eps1 < eps2, "eps1 must be smaller than eps2");
    return make_spec({eps1, eps2}, DiscreteDynamics{two_state_transition(alpha, beta)});
}

FscSpec build_gilbert_elliott_continuous(double mu, double xi, double eps1, double eps2) {
    require(mu > 0.0 && xi > 0.0, "rates must be positive");
    require(eps1 < eps2, "eps1 must be smaller than eps2");
    return make_spec({eps1, eps2}, ContinuousDynamics{two_state_generator(mu, xi)});
}

Matrix matrix_exponential(const Matrix& X) {
    const int n = static_cast<int>(X.rows());
    double norm = X.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    Matrix Y = X / std::ldexp(1.0, squarings);
    Matrix result = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int k = 1; k < 40; ++k) {
        term = term * Y / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18 * result.cwiseAbs().maxCoeff()) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

Matrix transition_matrix_from_generator(const Matrix& Q, double N) {
    validate_generator(Q);
    require(N >= 1.0, "block length must be at least 1");
    Matrix P = matrix_exponential(Q / N);
    for (int i = 0; i < P.rows(); ++i) {
        for (int j = 0; j < P.cols(); ++j) P(i, j) = std::max(P(i, j), 0.0);
        P.row(i) /= P.row(i).sum();
    }
    return P;
}

Matrix two_state_sampled_closed_form(double mu, double xi, double N) {
    double s = mu + xi;
    Matrix P(2, 2);
    if (s == 0.0) return Matrix::Identity(2, 2);
    double d = -std::expm1(-s / N);
    P(0, 1) = mu / s * d;
    P(0, 0) = 1.0 - P(0, 1);
    P(1, 0) = xi / s * d;
    P(1, 1) = 1.0 - P(1, 0);
    return P;
}

GeneratorRates generator_from_discrete(double alpha, double beta, double N) {
    require(alpha >= 0.0 && beta >= 0.0, "transition probabilities must be nonnegative");
    require(alpha + beta > 0.0, "alpha + beta must be positive");
    require(alpha + beta < 1.0, "alpha + beta must be smaller than 1");
    double total = -N * std::log1p(-(alpha + beta));
    return {alpha / (alpha + beta) * total, beta / (alpha + beta) * total};
}

UniformizedChain uniformize(const Matrix& Q) {
    validate_generator(Q);
    const int n = static_cast<int>(Q.rows());
    UniformizedChain out;
    out.sigma = Q.diagonal().cwiseAbs().maxCoeff();
    if (out.sigma == 0.0) {
        out.A = Matrix::Identity(n, n);
        out.degenerate = true;
        return out;
    }
    out.A = Matrix::Identity(n, n) + Q / out.sigma;
    for (int i = 0; i < n; ++i) {
        out.A(i, i) = std::max(out.A(i, i), 0.0);
        double off = out.A.row(i).sum() - out.A(i, i);
        out.A(i, i) = 1.0 - off;
    }
    return out;
}

Vector stationary_distribution(const Matrix& P) {
    validate_stochastic(P);
    require(strongly_connected(P), "transition matrix is reducible");
    const int n = static_cast<int>(P.rows());
    Matrix M = P.transpose() - Matrix::Identity(n, n);
    M.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;
    Vector pi = M.fullPivLu().solve(rhs);
    for (int i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
    pi /= pi.sum();
    return pi;
}

Matrix block_transition(const FscSpec& spec, int N) {
    if (spec.is_discrete()) {
        Matrix R = Matrix::Identity(spec.num_states, spec.num_states);
        Matrix base = spec.P();
        for (int e = N; e > 0; e >>= 1) {
            if (e & 1) R = R * base;
            base = base * base;
        }
        return R;
    }
    return matrix_exponential(spec.Q());
}

double binary_entropy_bits(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double csi_capacity(const FscSpec& spec) {
    validate(spec);
    Vector pi;
    if (spec.is_discrete()) {
        pi = stationary_distribution(spec.P());
    } else {
        pi = stationary_distribution(uniformize(spec.Q()).A);
    }
    double c = 1.0;
    for (int i = 0; i < spec.num_states; ++i) c -= pi(i) * binary_entropy_bits(spec.crossover[i]);
    return c;
}

std::string spec_to_json(const FscSpec& spec) {
    nlohmann::json j;
    j["states"] = spec.num_states;
    j["crossover"] = spec.crossover;
    const Matrix& M = spec.is_discrete() ? spec.P() : spec.Q();
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        std::vector<double> row(M.cols());
        for (int k = 0; k < M.cols(); ++k) row[k] = M(i, k);
        rows.push_back(row);
    }
    j["dynamics"] = {{"kind", spec.is_discrete() ? "discrete" : "continuous"}, {"matrix", rows}};
    return j.dump(2);
}

FscSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid channel JSON: ") + e.what());
    }
    try {
        int S = j.at("states").get<int>();
        auto crossover = j.at("crossover").get<std::vector<double>>();
        auto rows = j.at("dynamics").at("matrix").get<std::vector<std::vector<double>>>();
        std::string kind = j.at("dynamics").at("kind").get<std::string>();
        require(static_cast<int>(rows.size()) == S, "matrix row count mismatch");
        Matrix M(S, S);
        for (int i = 0; i < S; ++i) {
            require(static_cast<int>(rows[i].size()) == S, "matrix column count mismatch");
            for (int k = 0; k < S; ++k) M(i, k) = rows[i][k];
        }
        require(static_cast<int>(crossover.size()) == S, "crossover count mismatch");
        if (kind == "discrete") return make_spec(crossover, DiscreteDynamics{M});
        if (kind == "continuous") return make_spec(crossover, ContinuousDynamics{M});
        throw Error("unknown dynamics kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed channel JSON: ") + e.what());
    }
}

}  // namespace fsc
