#include "fsc/special.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fsc/error.hpp"
#include "fsc/numeric.hpp"

namespace fsc {

double gauss_2f1_terminating(int a, int b, int c, double z) {
    require(a <= 0 || b <= 0, "2F1 series does not terminate");
    require(c > 0, "2F1 requires a positive integer c");
    int terms = (a <= 0 && b <= 0) ? std::min(-a, -b) : (a <= 0 ? -a : -b);
    bool alternating = false;
    for (int k = 0; k < terms; ++k)
        if (static_cast<double>(a + k) * static_cast<double>(b + k) * z < 0.0) alternating = true;
    if (alternating) {
        // Cancellation between terms; evaluate with 100 decimal digits.
        using Wide = boost::multiprecision::cpp_bin_float_100;
        Wide term = 1, sum = 1, zw = z;
        for (int k = 0; k < terms; ++k) {
            term *= Wide(a + k) * Wide(b + k) / (Wide(c + k) * Wide(k + 1)) * zw;
            sum += term;
        }
        return static_cast<double>(sum);
    }
    CompensatedSum sum;
    double term = 1.0;
    sum += term;
    for (int k = 0; k < terms; ++k) {
        term *= static_cast<double>(a + k) * static_cast<double>(b + k) /
                (static_cast<double>(c + k) * static_cast<double>(k + 1)) * z;
        sum += term;
    }
    return sum.value();
}

double bessel_i(int order, double x) {
    require(order == 0 || order == 1, "bessel_i supports orders 0 and 1");
    require(x >= 0.0, "bessel_i requires a nonnegative argument");
    double half = 0.5 * x;
    double q = half * half;
    double term = order == 0 ? 1.0 : half;
    CompensatedSum sum;
    sum += term;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
        sum += term;
        if (term < 1e-17 * sum.value()) break;
    }
    return sum.value();
}

double bessel_i1_ratio(double x) {
    require(x >= 0.0, "bessel_i1_ratio requires a nonnegative argument");
    double q = 0.25 * x * x;
    double term = 1.0;
    CompensatedSum sum;
    sum += term;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + 1));
        sum += term;
        if (term < 1e-17 * sum.value()) break;
    }
    return sum.value();
}

std::vector<double> poisson_pmf_truncated(double mean, double tol) {
    std::vector<double> p;
    if (mean <= 0.0) return {1.0};
    double cum = 0.0;
    for (int k = 0;; ++k) {
        double v = std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
        p.push_back(v);
        cum += v;
        if (k > mean && 1.0 - cum < tol) break;
        if (k > mean + 40.0 * std::sqrt(mean) + 200.0) break;
    }
    return p;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, rel_tol, &err);
}

Minimum minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double grid_step,
                        double x_tol) {
    int n = std::max(1, static_cast<int>(std::round((hi - lo) / grid_step)));
    Minimum best{lo, f(lo)};
    int best_k = 0;
    for (int k = 1; k <= n; ++k) {
        double x = lo + (hi - lo) * k / n;
        double v = f(x);
        if (v < best.value) {
            best = {x, v};
            best_k = k;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best_k - 1) / n;
    double b = lo + (hi - lo) * std::min(n, best_k + 1) / n;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > x_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if (f1 < best.value) best = {x1, f1};
    if (f2 < best.value) best = {x2, f2};
    return best;
}

}  // namespace fsc
