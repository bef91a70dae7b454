#include "fsc/queueing.hpp"

#include <cmath>

#include "fsc/error.hpp"
#include "fsc/numeric.hpp"

namespace fsc {

SuccessMatrix success_from_failure(const Matrix& channel_transition, const Matrix& failure,
                                   const std::string& provenance) {
    require(channel_transition.rows() == failure.rows() && channel_transition.cols() == failure.cols(),
            "failure matrix size mismatch");
    SuccessMatrix out;
    out.provenance = provenance;
    out.s = (channel_transition - failure).cwiseMax(0.0).cwiseMin(channel_transition);
    return out;
}

Matrix QueueBlocks::A(int k) const {
    if (k == 0) return down;
    if (k == 1) return local;
    if (k - 1 <= max_jump()) return up[k - 2];
    return Matrix::Zero(down.rows(), down.cols());
}

Matrix QueueBlocks::boundary(int k) const {
    if (k == 0) return boundary_local;
    if (k <= static_cast<int>(boundary_up.size())) return boundary_up[k - 1];
    return Matrix::Zero(down.rows(), down.cols());
}

double completion_probability(double p_geo, double R_bits, int N) {
    require(p_geo > 0.0 && p_geo <= 1.0, "p_geo must lie in (0, 1]");
    require(R_bits > 0.0 && N >= 1, "invalid code parameters");
    if (p_geo == 1.0) return 1.0;
    return -std::expm1(R_bits * N * std::log1p(-p_geo));
}

QueueBlocks build_blocks(const SuccessMatrix& success, const Matrix& channel_transition, const TrafficSpec& traffic,
                         double rho_r, int N, double tol) {
    require(rho_r > 0.0 && rho_r <= 1.0, "rho_r must lie in (0, 1]");
    require(traffic.lambda >= 0.0, "arrival rate must be nonnegative");
    const Matrix& P = channel_transition;
    const Matrix& s = success.s;
    require(P.rows() == s.rows() && P.cols() == s.cols(), "success matrix size mismatch");
    for (int c = 0; c < P.rows(); ++c)
        for (int d = 0; d < P.cols(); ++d)
            require(s(c, d) >= 0.0 && s(c, d) <= P(c, d) + 1e-15, "success matrix inconsistent with the channel");
    QueueBlocks b;
    b.channel = P;
    b.success = s;
    b.rho_r = rho_r;
    b.lambda_n = traffic.lambda * N;
    b.arrivals = poisson_pmf_truncated(b.lambda_n, tol);
    auto a = [&](int i) { return i < static_cast<int>(b.arrivals.size()) ? b.arrivals[i] : 0.0; };
    Matrix served = s * rho_r;
    Matrix kept = P - served;
    auto up_by = [&](int i) { Matrix m = a(i) * kept + a(i + 1) * served; return m; };
    b.down = a(0) * served;
    b.local = up_by(0);
    b.boundary_local = a(0) * P + a(1) * served;
    const int imax = static_cast<int>(b.arrivals.size());
    for (int i = 1; i < imax; ++i) {
        b.up.push_back(up_by(i));
        b.boundary_up.push_back(up_by(i));
    }
    return b;
}

double stability_drift(const QueueBlocks& blocks) {
    Vector pi = stationary_distribution(blocks.channel);
    double served = 0.0;
    for (int c = 0; c < blocks.success.rows(); ++c) served += pi(c) * blocks.success.row(c).sum();
    return blocks.lambda_n - blocks.rho_r * served;
}

Matrix solve_g_matrix(const QueueBlocks& blocks, double tol, int max_iter) {
    const int S = static_cast<int>(blocks.down.rows());
    const Matrix I = Matrix::Identity(S, S);
    const int kmax = blocks.max_jump() + 1;
    Matrix G = Matrix::Zero(S, S);
    for (int it = 0; it < max_iter; ++it) {
        // G <- (I - sum_{k>=1} A_k G^{k-1})^{-1} A_0
        Matrix acc = Matrix::Zero(S, S);
        Matrix Gp = I;
        for (int k = 1; k <= kmax; ++k) {
            acc += blocks.A(k) * Gp;
            Gp = Gp * G;
        }
        Matrix next = (I - acc).fullPivLu().solve(blocks.down);
        double diff = (next - G).cwiseAbs().maxCoeff();
        G = next;
        if (diff < tol) return G;
    }
    throw Error("G matrix iteration did not converge; drift = " + std::to_string(stability_drift(blocks)));
}

StationaryLevels stationary_levels(const QueueBlocks& blocks, const Matrix& G, int q_max, double tol) {
    const int S = static_cast<int>(blocks.down.rows());
    require(stability_drift(blocks) < 0.0, "queue is unstable");
    const Matrix I = Matrix::Identity(S, S);
    const int kmax = blocks.max_jump() + 1;
    // Abar_k = sum_{i>=k} A_i G^{i-k}, Bbar_k likewise for the boundary, by backward Horner steps.
    std::vector<Matrix> Abar(kmax + 2, Matrix::Zero(S, S)), Bbar(kmax + 2, Matrix::Zero(S, S));
    for (int k = kmax; k >= 1; --k) {
        Abar[k] = blocks.A(k) + Abar[k + 1] * G;
        Bbar[k] = blocks.boundary(k) + Bbar[k + 1] * G;
    }
    Matrix sumA = Matrix::Zero(S, S), sumB = Matrix::Zero(S, S);
    for (int k = 1; k <= kmax; ++k) {
        sumA += Abar[k];
        sumB += Bbar[k];
    }
    Matrix inv1 = (I - Abar[1]).inverse();
    Matrix K = blocks.boundary(0) + Bbar[1] * inv1 * blocks.down;
    // Left null vector of K - I.
    Matrix M = (K - I).transpose();
    M.row(S - 1).setOnes();
    Vector rhs = Vector::Zero(S);
    rhs(S - 1) = 1.0;
    Vector pi0 = M.fullPivLu().solve(rhs);
    Vector ones = Vector::Ones(S);
    double total = pi0.sum() + (pi0.transpose() * sumB * (I - sumA).inverse() * ones)(0);
    pi0 /= total;

    StationaryLevels out;
    out.pi.push_back(pi0.cwiseMax(0.0));
    CompensatedSum mass;
    mass += out.pi[0].sum();
    for (int q = 1; q <= q_max; ++q) {
        Eigen::RowVectorXd v = pi0.transpose() * (q <= kmax ? Bbar[q] : Matrix::Zero(S, S));
        for (int j = std::max(1, q + 1 - kmax); j < q; ++j) v += out.pi[j].transpose() * Abar[q + 1 - j];
        Vector level = (v * inv1).transpose().cwiseMax(0.0);
        out.pi.push_back(level);
        mass += level.sum();
        if (1.0 - mass.value() < tol) break;
    }
    out.residual = std::max(0.0, 1.0 - mass.value());
    return out;
}

double tail_probability(const StationaryLevels& levels, int q, double residual_tol) {
    if (q < 0) return 1.0;
    require(q < static_cast<int>(levels.pi.size()) || levels.residual <= residual_tol,
            "levels truncated below the threshold; increase q_max");
    CompensatedSum mass;
    for (int j = 0; j <= q && j < static_cast<int>(levels.pi.size()); ++j) mass += levels.pi[j].sum();
    return std::max(0.0, 1.0 - mass.value());
}

QueueResult solve_queue_tail(const SuccessMatrix& success, const Matrix& channel_transition,
                             const TrafficSpec& traffic, double R_bits, int N, int threshold) {
    QueueResult r;
    double rho_r = completion_probability(traffic.p_geo, R_bits, N);
    QueueBlocks blocks = build_blocks(success, channel_transition, traffic, rho_r, N);
    r.drift = stability_drift(blocks);
    if (r.drift >= 0.0) return r;
    Matrix G = solve_g_matrix(blocks);
    StationaryLevels levels = stationary_levels(blocks, G);
    r.stable = true;
    r.residual = levels.residual;
    r.tail = tail_probability(levels, threshold);
    return r;
}

}  // namespace fsc
