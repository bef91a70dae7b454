#include "fsc/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include <boost/math/quadrature/gauss.hpp>

#include "fsc/error.hpp"
#include "fsc/numeric.hpp"

namespace fsc {

namespace {

double capped_exp(double log_value) { return log_value >= 0.0 ? 1.0 : std::exp(log_value); }

void require_two_state(const FscSpec& spec) { require(spec.num_states == 2, "bound requires a two-state channel"); }

FailureBoundMatrix fixed_rho_matrix(BoundKind kind, const ShiftedBound& f, int S, double rho) {
    FailureBoundMatrix out;
    out.kind = kind;
    out.values = Matrix::Zero(S, S);
    out.rho_star = Matrix::Constant(S, S, rho);
    out.v_star = Matrix::Zero(S, S);
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j) out.values(i, j) = f(rho, 0.0, i, j);
    return out;
}

// log of [A^N] for A with nonnegative entries, scaled to avoid underflow.
Matrix log_matrix_power(const Matrix& A, int N) {
    const int S = static_cast<int>(A.rows());
    double scale = A.maxCoeff();
    Matrix base = A / scale;
    Matrix acc = Matrix::Identity(S, S);
    double log_acc = 0.0;
    double log_base = std::log(scale);
    for (int e = N; e > 0; e >>= 1) {
        if (e & 1) {
            acc = acc * base;
            double m = acc.maxCoeff();
            acc /= m;
            log_acc += std::log(m) + log_base;
        }
        base = base * base;
        double m = base.maxCoeff();
        base /= m;
        log_base = 2.0 * log_base + std::log(m);
    }
    return (acc.array().log() + log_acc).matrix();
}

}  // namespace

bool integral_payload(int N, double R_bits) {
    double k = N * R_bits;
    return std::abs(k - std::round(k)) < 1e-9;
}

CodeParams make_code(int N, double R_bits, bool allow_fractional) {
    require(N >= 1, "block length must be at least 1");
    require(R_bits > 0.0 && R_bits < 1.0, "rate must lie in (0, 1) bits per code bit");
    bool integral = integral_payload(N, R_bits);
    require(integral || allow_fractional, "N * R_bits must be an integer");
    CodeParams code;
    code.N = N;
    code.R_bits = R_bits;
    code.R = R_bits * std::log(2.0);
    code.log_M = N * code.R;
    code.integral_payload = integral;
    return code;
}

std::string to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::gallager_matrix: return "gallager_matrix";
        case BoundKind::type_sum: return "type_sum";
        case BoundKind::rare_transition: return "rare_transition";
        case BoundKind::undetected_bound: return "undetected_bound";
        case BoundKind::error_bound_with_margin: return "error_bound_with_margin";
    }
    return "unknown";
}

double state_exponent_b(double eps, double rho) {
    require(eps >= 0.0 && eps <= 0.5, "crossover outside [0, 1/2]");
    require(rho >= 0.0 && rho <= 1.0, "rho outside [0, 1]");
    double s = 1.0 / (1.0 + rho);
    double inner = std::pow(eps, s) + std::pow(1.0 - eps, s);
    return rho * std::log(2.0) - (1.0 + rho) * std::log(inner);
}

std::vector<double> state_exponents(const FscSpec& spec, double rho) {
    std::vector<double> b(spec.num_states);
    for (int i = 0; i < spec.num_states; ++i) b[i] = state_exponent_b(spec.crossover[i], rho);
    return b;
}

double gallager_e0n(const FscSpec& spec, const std::vector<double>& input_dist, double rho,
                    const std::vector<int>& type_counts) {
    require(static_cast<int>(type_counts.size()) == spec.num_states, "type count size mismatch");
    require(input_dist.size() == 2, "binary input distribution expected");
    require(input_dist[0] >= 0.0 && input_dist[1] >= 0.0 && std::abs(input_dist[0] + input_dist[1] - 1.0) < 1e-12,
            "malformed input distribution");
    int N = 0;
    for (int n : type_counts) {
        require(n >= 0, "negative visit count");
        N += n;
    }
    require(N > 0, "empty type");
    double s = 1.0 / (1.0 + rho);
    double e0 = 0.0;
    for (int i = 0; i < spec.num_states; ++i) {
        if (type_counts[i] == 0) continue;
        double eps = spec.crossover[i];
        double total = 0.0;
        for (int y = 0; y < 2; ++y) {
            double inner = 0.0;
            for (int x = 0; x < 2; ++x) {
                double p = (x == y) ? 1.0 - eps : eps;
                if (input_dist[x] > 0.0 && p > 0.0) inner += input_dist[x] * std::pow(p, s);
            }
            total += std::pow(inner, 1.0 + rho);
        }
        e0 += static_cast<double>(type_counts[i]) / N * (-std::log(total));
    }
    return e0;
}

ShiftedBound gallager_form(const FscSpec& spec, const CodeParams& code) {
    Matrix P = spec.is_discrete() ? spec.P() : transition_matrix_from_generator(spec.Q(), code.N);
    return [spec, code, P](double rho, double shift, int i, int j) {
        std::vector<double> b = state_exponents(spec, rho);
        Matrix A = P;
        for (int r = 0; r < A.rows(); ++r) A.row(r) *= std::exp(-b[r]);
        Matrix logA = log_matrix_power(A, code.N);
        return capped_exp(logA(i, j) + code.N * (rho * code.R - shift));
    };
}

FailureBoundMatrix gallager_matrix_bound(const FscSpec& spec, const CodeParams& code, double rho) {
    return fixed_rho_matrix(BoundKind::gallager_matrix, gallager_form(spec, code), spec.num_states, rho);
}

ShiftedBound discrete_form(const DiscreteOccupancyLaw& law, const FscSpec& spec, const CodeParams& code) {
    require_two_state(spec);
    require(law.N == code.N, "occupancy law block length differs from the code");
    return [law, spec, code](double rho, double shift, int i, int j) {
        double b1 = state_exponent_b(spec.crossover[0], rho);
        double b2 = state_exponent_b(spec.crossover[1], rho);
        const int N = code.N;
        CompensatedSum sum;
        for (int m = 0; m <= N; ++m) {
            double p = law(m, i, j);
            if (p == 0.0) continue;
            double w = (static_cast<double>(m) / N) * b1 + (1.0 - static_cast<double>(m) / N) * b2;
            sum += p * capped_exp(-N * (w - rho * code.R + shift));
        }
        return sum.value();
    };
}

FailureBoundMatrix type_sum_bound(const DiscreteOccupancyLaw& law, const FscSpec& spec, const CodeParams& code,
                                  double rho) {
    return fixed_rho_matrix(BoundKind::type_sum, discrete_form(law, spec, code), 2, rho);
}

Matrix type_sum_bound_inner_min(const DiscreteOccupancyLaw& law, const FscSpec& spec, const CodeParams& code) {
    require_two_state(spec);
    const int N = code.N;
    std::vector<double> term(N + 1);
    for (int m = 0; m <= N; ++m) {
        double frac = static_cast<double>(m) / N;
        auto f = [&](double rho) {
            double w = frac * state_exponent_b(spec.crossover[0], rho) +
                       (1.0 - frac) * state_exponent_b(spec.crossover[1], rho);
            return capped_exp(-N * (w - rho * code.R));
        };
        term[m] = optimize_rho(f).value;
    }
    Matrix out = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CompensatedSum sum;
            for (int m = 0; m <= N; ++m) sum += law(m, i, j) * term[m];
            out(i, j) = sum.value();
        }
    return out;
}

namespace {

// Occupation densities cached at composite Gauss-Legendre nodes on [0, 1].
class DensityTable {
public:
    using Rule = boost::math::quadrature::gauss<double, 20>;
    static constexpr int kPanels = 64;

    explicit DensityTable(const ContinuousOccupancyLaw& law) : law_(law) {
        for (int p = 0; p < kPanels; ++p) {
            double a = static_cast<double>(p) / kPanels, b = static_cast<double>(p + 1) / kPanels;
            visit_nodes(a, b, [&](double r, double w) {
                nodes_.push_back(r);
                weights_.push_back(w);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) dens_[2 * i + j].push_back(law_.density(r, i, j));
            });
        }
        for (int e = 0; e < 4; ++e) {
            prefix_[e].assign(kPanels + 1, 0.0);
            for (int p = 0; p < kPanels; ++p) {
                CompensatedSum acc;
                for (int k = p * per_panel(); k < (p + 1) * per_panel(); ++k) acc += weights_[k] * dens_[e][k];
                prefix_[e][p + 1] = prefix_[e][p] + acc.value();
            }
        }
    }

    // Integral over [0, 1] of min(1, g(r)) times the density, with g(r) >= 1 exactly on [0, kink].
    template <class G>
    double integrate_capped(int i, int j, double kink, const G& g) const {
        const int e = 2 * i + j;
        int split = std::clamp(static_cast<int>(std::floor(kink * kPanels)), 0, kPanels);
        double total = prefix_[e][split];
        if (split == kPanels) return total;
        double a = static_cast<double>(split) / kPanels, b = static_cast<double>(split + 1) / kPanels;
        if (kink > a) {
            visit_nodes(a, kink, [&](double r, double w) { total += w * law_.density(r, i, j); });
            visit_nodes(kink, b, [&](double r, double w) { total += w * g(r) * law_.density(r, i, j); });
        } else {
            for (int k = split * per_panel(); k < (split + 1) * per_panel(); ++k)
                total += weights_[k] * g(nodes_[k]) * dens_[e][k];
        }
        for (int k = (split + 1) * per_panel(); k < static_cast<int>(nodes_.size()); ++k)
            total += weights_[k] * g(nodes_[k]) * dens_[e][k];
        return total;
    }

private:
    static int per_panel() { return static_cast<int>(2 * Rule::abscissa().size() - (Rule::abscissa()[0] == 0.0)); }

    template <class F>
    static void visit_nodes(double a, double b, F&& f) {
        const auto& x = Rule::abscissa();
        const auto& w = Rule::weights();
        double half = 0.5 * (b - a), mid = 0.5 * (b + a);
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k] == 0.0) {
                f(mid, half * w[k]);
                continue;
            }
            f(mid - half * x[k], half * w[k]);
            f(mid + half * x[k], half * w[k]);
        }
    }

    ContinuousOccupancyLaw law_;
    std::vector<double> nodes_, weights_;
    std::array<std::vector<double>, 4> dens_;
    std::array<std::vector<double>, 4> prefix_;
};

}  // namespace

ShiftedBound integral_form(const ContinuousOccupancyLaw& law, const FscSpec& spec, const CodeParams& code) {
    require_two_state(spec);
    auto table = std::make_shared<const DensityTable>(law);
    return [law, table, spec, code](double rho, double shift, int i, int j) {
        double b1 = state_exponent_b(spec.crossover[0], rho);
        double b2 = state_exponent_b(spec.crossover[1], rho);
        const double N = code.N;
        double t = rho * code.R - shift;
        auto g = [&](double r) { return capped_exp(-N * ((b1 - b2) * r + b2 - t)); };
        Atom atom = law.atom(i, j);
        double total = atom.weight * g(atom.location);
        double kink = (b1 > b2) ? (t - b2) / (b1 - b2) : (t >= b2 ? 1.0 : 0.0);
        kink = std::clamp(kink, 0.0, 1.0);
        total += table->integrate_capped(i, j, kink, g);
        return std::min(total, 1.0);
    };
}

FailureBoundMatrix rare_transition_bound(const ContinuousOccupancyLaw& law, const FscSpec& spec,
                                         const CodeParams& code, double rho) {
    return fixed_rho_matrix(BoundKind::rare_transition, integral_form(law, spec, code), 2, rho);
}

FailureBoundMatrix rare_transition_bound_general(const Matrix& Q, const FscSpec& spec, const CodeParams& code,
                                                 double rho, double tol) {
    const int S = spec.num_states;
    require(Q.rows() == S, "generator size mismatch");
    std::vector<double> b = state_exponents(spec, rho);
    WeightedOccupancyCdf G(Q, b, tol);
    const double N = code.N;
    const double t = rho * code.R;
    Matrix out = matrix_exponential(Q) * capped_exp(-N * (b[0] - t));
    // Breakpoints of G and of the exponent, restricted to w > t.
    std::vector<double> cuts = {std::max(b[S - 1], t)};
    for (int k = S - 2; k >= 0; --k)
        if (b[k] > cuts.back()) cuts.push_back(b[k]);
    if (cuts.back() < b[0]) cuts.push_back(b[0]);
    const int pieces = 16;
    using Rule = boost::math::quadrature::gauss<double, 30>;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double lo = cuts[c], hi = cuts[c + 1];
        if (!(hi > lo)) continue;
        for (int p = 0; p < pieces; ++p) {
            double a = lo + (hi - lo) * p / pieces;
            double z = lo + (hi - lo) * (p + 1) / pieces;
            double half = 0.5 * (z - a), mid = 0.5 * (z + a);
            const auto& x = Rule::abscissa();
            const auto& w = Rule::weights();
            auto add = [&](double node, double weight) {
                double wv = mid + half * node;
                out += (half * weight * N * std::exp(-N * (wv - t))) * G(wv);
            };
            for (std::size_t k = 0; k < x.size(); ++k) {
                if (x[k] == 0.0) {
                    add(0.0, w[k]);
                } else {
                    add(x[k], w[k]);
                    add(-x[k], w[k]);
                }
            }
        }
    }
    FailureBoundMatrix res;
    res.kind = BoundKind::rare_transition;
    res.values = out.cwiseMin(1.0).cwiseMax(0.0);
    res.rho_star = Matrix::Constant(S, S, rho);
    res.v_star = Matrix::Zero(S, S);
    return res;
}

RhoOptimum optimize_rho(const std::function<double(double)>& bound_fn, double grid_step) {
    Minimum m = minimize_scalar(bound_fn, 0.0, 1.0, grid_step);
    return {m.x, m.value};
}

RhoVOptimum optimize_rho_v(const std::function<double(double, double)>& bound_fn, double grid_step) {
    RhoVOptimum best{0.0, 0.0, bound_fn(0.0, 0.0)};
    auto inner = [&](double rho) {
        Minimum m = minimize_scalar([&](double v) { return bound_fn(rho, v); }, 0.0, rho,
                                    std::max(grid_step, rho / 100.0));
        if (rho == 0.0) m = {0.0, bound_fn(0.0, 0.0)};
        if (m.value < best.value) best = {rho, m.x, m.value};
        return m.value;
    };
    minimize_scalar(inner, 0.0, 1.0, grid_step);
    return best;
}

FailureBoundMatrix optimize_entries(BoundKind kind, const ShiftedBound& bound, int S, double grid_step) {
    FailureBoundMatrix out;
    out.kind = kind;
    out.values = Matrix::Zero(S, S);
    out.rho_star = Matrix::Zero(S, S);
    out.v_star = Matrix::Zero(S, S);
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j) {
            RhoOptimum r = optimize_rho([&](double rho) { return bound(rho, 0.0, i, j); }, grid_step);
            out.values(i, j) = r.value;
            out.rho_star(i, j) = r.rho;
        }
    return out;
}

MarginBounds undetected_and_error_bounds(const ShiftedBound& bound, int S, double tau, TiltPolicy policy,
                                         double target, double grid_step) {
    require(tau >= 0.0, "margin must be nonnegative");
    MarginBounds out;
    out.undetected.kind = BoundKind::undetected_bound;
    out.failure.kind = BoundKind::error_bound_with_margin;
    for (auto* m : {&out.undetected, &out.failure}) {
        m->values = Matrix::Zero(S, S);
        m->rho_star = Matrix::Zero(S, S);
        m->v_star = Matrix::Zero(S, S);
        m->tau = tau;
    }
    for (int i = 0; i < S; ++i) {
        for (int j = 0; j < S; ++j) {
            if (policy == TiltPolicy::forney) {
                auto tilt = [](double rho) { return rho / (1.0 + rho); };
                RhoOptimum u = optimize_rho(
                    [&](double rho) { return bound(rho, (1.0 - tilt(rho)) * tau, i, j); }, grid_step);
                RhoOptimum f =
                    optimize_rho([&](double rho) { return bound(rho, -tilt(rho) * tau, i, j); }, grid_step);
                out.undetected.values(i, j) = u.value;
                out.undetected.rho_star(i, j) = u.rho;
                out.undetected.v_star(i, j) = tilt(u.rho);
                out.failure.values(i, j) = f.value;
                out.failure.rho_star(i, j) = f.rho;
                out.failure.v_star(i, j) = tilt(f.rho);
                continue;
            }
            require(target > 0.0, "joint tilt policy needs a positive undetected target");
            double best_f = 2.0, best_u = 2.0, best_rho = 0.0, best_v = 0.0;
            bool feasible = false;
            const int steps = std::max(1, static_cast<int>(std::round(1.0 / std::max(grid_step, 0.02))));
            for (int a = 0; a <= steps; ++a) {
                double rho = static_cast<double>(a) / steps;
                for (int c = 0; c <= a; ++c) {
                    double v = static_cast<double>(c) / steps;
                    double u = bound(rho, (1.0 - v) * tau, i, j);
                    bool ok = u <= target;
                    if (!ok && feasible) continue;
                    double f = ok ? bound(rho, -v * tau, i, j) : 2.0;
                    bool better = ok ? (!feasible || f < best_f) : (u < best_u);
                    if (better) {
                        best_f = f;
                        best_u = u;
                        best_rho = rho;
                        best_v = v;
                    }
                    feasible = feasible || ok;
                }
            }
            if (!feasible) best_f = bound(best_rho, -best_v * tau, i, j);
            out.undetected.values(i, j) = best_u;
            out.failure.values(i, j) = best_f;
            out.undetected.rho_star(i, j) = out.failure.rho_star(i, j) = best_rho;
            out.undetected.v_star(i, j) = out.failure.v_star(i, j) = best_v;
        }
    }
    return out;
}

double state_average(const Matrix& values, const Vector& initial) {
    require(values.rows() == initial.size(), "initial distribution size mismatch");
    double total = 0.0;
    for (int i = 0; i < values.rows(); ++i) total += initial(i) * values.row(i).sum();
    return total;
}

}  // namespace fsc
