#pragma once

namespace fsc {

// Terminating 2F1(a, b; c; z) with a or b a nonpositive integer.
double gauss_2f1_terminating(int a, int b, int c, double z);

// Modified Bessel function of the first kind, order 0 or 1.
double bessel_i(int order, double x);

// 2 * I_1(x) / x, equal to 1 at x = 0.
double bessel_i1_ratio(double x);

}  // namespace fsc
