#include "fsc/occupation.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "fsc/error.hpp"
#include "fsc/numeric.hpp"
#include "fsc/special.hpp"

namespace fsc {

Matrix DiscreteOccupancyLaw::final_state_matrix() const {
    Matrix P = Matrix::Zero(2, 2);
    for (const auto& row : table)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) P(i, j) += row[i][j];
    return P;
}

DiscreteOccupancyLaw discrete_occupancy_law(double alpha, double beta, int N) {
    require(N >= 1, "block length must be at least 1");
    require(alpha >= 0.0 && alpha < 1.0 && beta >= 0.0 && beta < 1.0, "alpha and beta must lie in [0, 1)");
    DiscreteOccupancyLaw law;
    law.N = N;
    law.table.assign(N + 1, {{{0.0, 0.0}, {0.0, 0.0}}});
    const double la = std::log1p(-alpha);
    const double lb = std::log1p(-beta);
    const double lambda = alpha * beta / ((1.0 - alpha) * (1.0 - beta));
    for (int m = 1; m <= N - 1; ++m) {
        double base = std::exp(m * la + (N - m) * lb);
        // 2F1(a, b; 1; z) - 2F1(a + 1, b; 1; z) = -b z 2F1(a + 1, b + 1; 2; z)
        double diff11 = m * lambda * gauss_2f1_terminating(-N + m + 1, -m + 1, 2, lambda);
        double diff22 = (N - m) * lambda * gauss_2f1_terminating(-N + m + 1, -m + 1, 2, lambda);
        law.table[m][0][0] = base * diff11;
        law.table[m][0][1] = std::exp((m - 1) * la + (N - m) * lb) * alpha *
                             gauss_2f1_terminating(-N + m, -m + 1, 1, lambda);
        law.table[m][1][0] = std::exp(m * la + (N - m - 1) * lb) * beta *
                             gauss_2f1_terminating(-N + m + 1, -m, 1, lambda);
        law.table[m][1][1] = base * diff22;
    }
    law.table[N][0][0] = std::exp(N * la);
    law.table[N][0][1] = std::exp((N - 1) * la) * alpha;
    law.table[0][1][1] = std::exp(N * lb);
    law.table[0][1][0] = std::exp((N - 1) * lb) * beta;
    return law;
}

ContinuousOccupancyLaw continuous_occupancy_law(double mu, double xi) {
    require(mu > 0.0 && xi > 0.0, "rates must be positive");
    return {mu, xi};
}

double ContinuousOccupancyLaw::density(double r, int i, int j) const {
    if (!(r > 0.0 && r < 1.0)) return 0.0;
    double pre = std::exp(-mu * r - xi * (1.0 - r));
    double x = 2.0 * std::sqrt(mu * xi * r * (1.0 - r));
    if (i == 0 && j == 0) return pre * mu * xi * r * bessel_i1_ratio(x);
    if (i == 0 && j == 1) return pre * mu * bessel_i(0, x);
    if (i == 1 && j == 0) return pre * xi * bessel_i(0, x);
    return pre * mu * xi * (1.0 - r) * bessel_i1_ratio(x);
}

Atom ContinuousOccupancyLaw::atom(int i, int j) const {
    if (i == 0 && j == 0) return {1.0, std::exp(-mu)};
    if (i == 1 && j == 1) return {0.0, std::exp(-xi)};
    return {0.0, 0.0};
}

double ContinuousOccupancyLaw::cdf(double r, int i, int j) const {
    if (r < 0.0) return 0.0;
    Atom a = atom(i, j);
    double mass = a.location <= r ? a.weight : 0.0;
    double upper = std::min(r, 1.0);
    return mass + integrate([&](double t) { return density(t, i, j); }, 0.0, upper);
}

Matrix ContinuousOccupancyLaw::final_state_matrix() const {
    return matrix_exponential(two_state_generator(mu, xi));
}

WeightedOccupancyCdf::WeightedOccupancyCdf(const Matrix& Q, std::vector<double> b, double tol)
    : b_(std::move(b)) {
    validate_generator(Q);
    S_ = static_cast<int>(Q.rows());
    require(static_cast<int>(b_.size()) == S_, "weight count must match the number of states");
    for (int k = 1; k < S_; ++k) require(b_[k] < b_[k - 1], "weights must be strictly decreasing");
    require(tol > 0.0, "tolerance must be positive");
    full_ = matrix_exponential(Q);
    UniformizedChain u = uniformize(Q);
    if (u.degenerate) {
        degenerate_ = true;
        return;
    }
    poisson_ = poisson_pmf_truncated(u.sigma, tol);
    const Matrix& A = u.A;
    const int nmax = static_cast<int>(poisson_.size()) - 1;
    const int S = S_;
    auto bk = [&](int k) { return b_[k - 1]; };

    coef_.resize(nmax + 1);
    Matrix Apow = Matrix::Identity(S, S);
    for (int n = 0; n <= nmax; ++n) {
        if (n > 0) Apow = Apow * A;
        auto& level = coef_[n];
        level.assign(S + 1, std::vector<Matrix>(S, Matrix::Zero(n + 1, S)));
        for (int c = 0; c < S; ++c)
            for (int l = 0; l <= n; ++l) level[1][c].row(l) = Apow.row(c);
        if (n == 0) {
            for (int k = 2; k <= S; ++k)
                for (int c = k - 1; c < S; ++c) level[k][c](0, c) = 1.0;
            continue;
        }
        const auto& prev = coef_[n - 1];
        auto mixed = [&](int k, int c, int l) {
            Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(S);
            for (int e = 0; e < S; ++e)
                if (A(c, e) != 0.0) v += A(c, e) * prev[k][e].row(l);
            return v;
        };
        // Low-reward states: b_c <= b_k.
        for (int k = 2; k <= S; ++k) {
            for (int c = k - 1; c < S; ++c) {
                double bc = b_[c];
                double p = (bk(k) - bc) / (bk(k - 1) - bc);
                double q = (bk(k - 1) - bk(k)) / (bk(k - 1) - bc);
                Matrix& C = level[k][c];
                C.row(n) = level[k - 1][c].row(0);
                for (int l = n - 1; l >= 0; --l) C.row(l) = p * C.row(l + 1) + q * mixed(k, c, l);
            }
        }
        // High-reward states: b_c >= b_{k-1}.
        for (int k = S; k >= 2; --k) {
            for (int c = 0; c <= k - 2; ++c) {
                double bc = b_[c];
                double p = (bc - bk(k - 1)) / (bc - bk(k));
                double q = (bk(k - 1) - bk(k)) / (bc - bk(k));
                Matrix& C = level[k][c];
                if (k == S)
                    C.row(0).setZero();
                else
                    C.row(0) = level[k + 1][c].row(n);
                for (int l = 1; l <= n; ++l) C.row(l) = p * C.row(l - 1) + q * mixed(k, c, l - 1);
            }
        }
    }
}

Matrix WeightedOccupancyCdf::operator()(double w) const {
    const int S = S_;
    if (w >= b_[0]) return full_;
    if (w < b_[S - 1]) return Matrix::Zero(S, S);
    if (degenerate_) {
        Matrix G = Matrix::Zero(S, S);
        for (int c = 0; c < S; ++c)
            if (b_[c] <= w) G(c, c) = 1.0;
        return G;
    }
    int k = 2;
    while (!(b_[k - 1] <= w && w < b_[k - 2])) ++k;
    double x = (w - b_[k - 1]) / (b_[k - 2] - b_[k - 1]);
    Matrix G = Matrix::Zero(S, S);
    for (int n = 0; n < static_cast<int>(poisson_.size()); ++n) {
        const auto& level = coef_[n][k];
        for (int l = 0; l <= n; ++l) {
            double weight = poisson_[n] * std::exp(log_binomial_pmf(n, l, x));
            if (weight == 0.0) continue;
            for (int c = 0; c < S; ++c) G.row(c) += weight * level[c].row(l);
        }
    }
    return G;
}

Matrix weighted_cdf_matrix(const Matrix& Q, const std::vector<double>& b, double w, double tol) {
    return WeightedOccupancyCdf(Q, b, tol)(w);
}

double kolmogorov_distance(const DiscreteOccupancyLaw& disc, const ContinuousOccupancyLaw& cont) {
    const int N = disc.N;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Atom atom = cont.atom(i, j);
            double fd = 0.0;
            double fc_density = 0.0;
            for (int m = 0; m <= N; ++m) {
                double r = static_cast<double>(m) / N;
                double lo = static_cast<double>(std::max(m - 1, 0)) / N;
                fc_density += integrate([&](double t) { return cont.density(t, i, j); }, lo, r);
                double atom_left = atom.location < r ? atom.weight : 0.0;
                double atom_at = atom.location <= r ? atom.weight : 0.0;
                double fc_left = fc_density + atom_left;
                double fc = fc_density + atom_at;
                worst = std::max(worst, std::abs(fd - fc_left));
                fd += disc(m, i, j);
                worst = std::max(worst, std::abs(fd - fc));
            }
        }
    }
    return worst;
}

void write_csv(std::ostream& os, const DiscreteOccupancyLaw& law) {
    os << "m,initial,final,probability\n" << std::setprecision(12);
    for (int m = 0; m <= law.N; ++m)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) os << m << ',' << i + 1 << ',' << j + 1 << ',' << law(m, i, j) << '\n';
}

void write_csv(std::ostream& os, const ContinuousOccupancyLaw& law, int points) {
    os << "r,initial,final,density\n" << std::setprecision(12);
    for (int p = 1; p < points; ++p) {
        double r = static_cast<double>(p) / points;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) os << r << ',' << i + 1 << ',' << j + 1 << ',' << law.density(r, i, j) << '\n';
    }
}

void write_atoms_csv(std::ostream& os, const ContinuousOccupancyLaw& law) {
    os << "r,initial,final,probability\n" << std::setprecision(12);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Atom a = law.atom(i, j);
            if (a.weight > 0.0) os << a.location << ',' << i + 1 << ',' << j + 1 << ',' << a.weight << '\n';
        }
}

}  // namespace fsc
