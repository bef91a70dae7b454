#include "fsc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fsc/error.hpp"
#include "fsc/numeric.hpp"

namespace fsc {

namespace {

constexpr double kBoundaryEps = 1e-12;

double radius_with_slack(double d) { return d + kBoundaryEps * std::max(1.0, std::abs(d)); }

// 1 - (1 - q)^(M - 1) for the given log M.
double failure_from_fraction(double q, double log_M) {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return log_M > 0.0 ? 1.0 : 0.0;
    double competitors = std::expm1(log_M);
    if (competitors <= 0.0) return 0.0;
    return -std::expm1(competitors * std::log1p(-q));
}

// Sorted radii gamma*t1 + t2 with cumulative fractions of the 2^N words.
class VolumeTable {
public:
    VolumeTable(int n1, int n2, double gamma) {
        const int N = n1 + n2;
        std::vector<std::pair<double, double>> items;
        items.reserve(static_cast<std::size_t>(n1 + 1) * (n2 + 1));
        const double log_total = N * std::log(2.0);
        for (int t1 = 0; t1 <= n1; ++t1) {
            double l1 = log_binomial(n1, t1);
            for (int t2 = 0; t2 <= n2; ++t2)
                items.emplace_back(gamma * t1 + t2, std::exp(l1 + log_binomial(n2, t2) - log_total));
        }
        std::sort(items.begin(), items.end());
        keys_.resize(items.size());
        cumulative_.resize(items.size());
        CompensatedSum sum;
        for (std::size_t k = 0; k < items.size(); ++k) {
            sum += items[k].second;
            keys_[k] = items[k].first;
            cumulative_[k] = sum.value();
        }
    }

    double fraction(double d) const {
        if (d < 0.0 && radius_with_slack(d) < 0.0) return 0.0;
        auto it = std::upper_bound(keys_.begin(), keys_.end(), radius_with_slack(d));
        if (it == keys_.begin()) return 0.0;
        return std::min(1.0, cumulative_[static_cast<std::size_t>(it - keys_.begin()) - 1]);
    }

private:
    std::vector<double> keys_;
    std::vector<double> cumulative_;
};

}  // namespace

double ml_gamma(double eps1, double eps2) {
    require(eps1 > 0.0, "ML weight is infinite for a noiseless state");
    require(eps1 <= eps2 && eps2 <= 0.5, "ML weight requires 0 < eps1 <= eps2 <= 1/2");
    double num = std::log(eps1) - std::log1p(-eps1);
    double den = std::log(eps2) - std::log1p(-eps2);
    if (eps1 == eps2) return 1.0;
    require(den != 0.0, "ML weight undefined for eps2 = 1/2");
    return num / den;
}

DecoderRule ml_rule(const FscSpec& spec, double nu) {
    require(spec.num_states == 2, "exact decoding needs two states");
    return {ml_gamma(spec.crossover[0], spec.crossover[1]), nu};
}

DecoderRule md_rule(double nu) { return {1.0, nu}; }

double log_volume_count(int n1, int n2, double d, double gamma) {
    require(n1 >= 0 && n2 >= 0, "negative block partition");
    double acc = -std::numeric_limits<double>::infinity();
    double limit = radius_with_slack(d);
    for (int t1 = 0; t1 <= n1; ++t1) {
        if (gamma * t1 > limit) break;
        double l1 = log_binomial(n1, t1);
        for (int t2 = 0; t2 <= n2; ++t2) {
            if (gamma * t1 + t2 > limit) break;
            acc = log_add_exp(acc, l1 + log_binomial(n2, t2));
        }
    }
    return acc;
}

double volume_count(int n1, int n2, double d, double gamma) {
    double l = log_volume_count(n1, n2, d, gamma);
    return std::isinf(l) ? 0.0 : std::round(std::exp(l));
}

double conditional_failure(int n1, int n2, int e1, int e2, const CodeParams& code, const DecoderRule& rule) {
    require(e1 >= 0 && e1 <= n1 && e2 >= 0 && e2 <= n2, "error counts exceed block partition");
    require(n1 + n2 == code.N, "block partition does not match the code length");
    double lv = log_volume_count(n1, n2, rule.gamma * e1 + e2 + rule.nu, rule.gamma);
    double q = std::isinf(lv) ? 0.0 : std::exp(lv - code.N * std::log(2.0));
    require(q <= 1.0 + 1e-12, "volume exceeds the word space");
    return failure_from_fraction(std::min(q, 1.0), code.log_M);
}

TypeConditionalFailure failure_given_type(double eps1, double eps2, const CodeParams& code, const DecoderRule& rule) {
    require(rule.gamma > 0.0 && rule.nu >= 0.0, "invalid decoder rule");
    const int N = code.N;
    TypeConditionalFailure out;
    out.failure.resize(N + 1);
    out.undetected.resize(N + 1);
    for (int n1 = 0; n1 <= N; ++n1) {
        const int n2 = N - n1;
        VolumeTable table(n1, n2, rule.gamma);
        std::vector<double> w1(n1 + 1), w2(n2 + 1);
        for (int e = 0; e <= n1; ++e) w1[e] = std::exp(log_binomial_pmf(n1, e, eps1));
        for (int e = 0; e <= n2; ++e) w2[e] = std::exp(log_binomial_pmf(n2, e, eps2));
        CompensatedSum fail, ue;
        for (int e1 = 0; e1 <= n1; ++e1) {
            if (w1[e1] < 1e-300) continue;
            for (int e2 = 0; e2 <= n2; ++e2) {
                double w = w1[e1] * w2[e2];
                if (w < 1e-300) continue;
                double d = rule.gamma * e1 + e2;
                fail += w * failure_from_fraction(table.fraction(d + rule.nu), code.log_M);
                ue += w * failure_from_fraction(table.fraction(d - rule.nu), code.log_M);
            }
        }
        out.failure[n1] = fail.value();
        out.undetected[n1] = ue.value();
    }
    return out;
}

ExactFailureMatrix exact_failure(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule) {
    require(spec.num_states == 2 && spec.is_discrete(), "exact failure needs a two-state discrete channel");
    const int N = code.N;
    const Matrix& P = spec.P();
    DiscreteOccupancyLaw law = discrete_occupancy_law(P(0, 1), P(1, 0), N);
    TypeConditionalFailure given = failure_given_type(spec.crossover[0], spec.crossover[1], code, rule);
    ExactFailureMatrix out;
    out.code = code;
    out.rule = rule;
    out.failure = Matrix::Zero(2, 2);
    out.undetected = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CompensatedSum f, u;
            for (int n1 = 0; n1 <= N; ++n1) {
                f += law(n1, i, j) * given.failure[n1];
                u += law(n1, i, j) * given.undetected[n1];
            }
            out.failure(i, j) = f.value();
            out.undetected(i, j) = u.value();
        }
    return out;
}

Matrix failure_matrix_exact(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule) {
    return exact_failure(spec, code, rule).failure;
}

Matrix undetected_matrix_exact(const FscSpec& spec, const CodeParams& code, const DecoderRule& rule) {
    return exact_failure(spec, code, rule).undetected;
}

}  // namespace fsc
