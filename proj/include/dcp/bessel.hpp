#pragma once

namespace dcp {

// Bessel functions of the first kind, orders 0 and 1, real argument.
// Absolute accuracy is better than 1e-13 over the whole real line.
double bessel_j0(double x);
double bessel_j1(double x);

// J1'(x) = J0(x) - J1(x)/x, with the x -> 0 limit 1/2.
double bessel_j1_prime(double x);

// First positive zero of J1 (equivalently of J0'), x'_11 = 3.8317059702...
double bessel_j1_zero1();

// First positive zero of J1', 1.8411837813... (TE11 cutoff).
double bessel_j1_prime_zero1();

// First positive zero of J0, 2.4048255576...
double bessel_j0_zero1();

}  // namespace dcp
