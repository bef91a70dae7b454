#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace fsc {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double log_binomial(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log P(X = k) for X ~ Binomial(n, p).
inline double log_binomial_pmf(int n, int k, double p) {
    if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    return log_binomial(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
}

// Poisson(mean) probabilities for k = 0..kmax where the upper tail drops below tol.
std::vector<double> poisson_pmf_truncated(double mean, double tol);

// Adaptive Gauss-Kronrod quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12);

struct Minimum {
    double x = 0.0;
    double value = 0.0;
};

// Coarse grid search on [lo, hi] followed by golden-section refinement.
Minimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double grid_step,
                        double x_tol = 1e-5);

}  // namespace fsc
