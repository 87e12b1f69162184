#include "dcp/bessel.hpp"

#include <cmath>
#include <vector>

#include "dcp/constants.hpp"

namespace dcp {
namespace {

// Ascending series; used for |x| < 8 where the largest term is ~1e2.
double series(int nu, double x) {
  const double h = 0.5 * x;
  const double q = -h * h;
  double term = (nu == 0) ? 1.0 : h;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (double(k) * double(k + nu));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

// Miller backward recurrence normalized with J0 + 2*sum J_{2k} = 1.
void miller(double x, double& j0, double& j1) {
  int n_start = 2 * static_cast<int>((x + 40.0) / 2.0);
  double jp1 = 0.0, jn = 1e-30;
  double norm = 0.0;
  double v0 = 0.0, v1 = 0.0;
  for (int n = n_start; n >= 1; --n) {
    double jm1 = 2.0 * n / x * jn - jp1;
    jp1 = jn;
    jn = jm1;  // now holds J_{n-1}
    int idx = n - 1;
    if (idx > 0 && idx % 2 == 0) norm += 2.0 * jn;
    if (idx == 1) v1 = jn;
    if (idx == 0) v0 = jn;
    if (std::abs(jn) > 1e250) {
      jn *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      v1 *= 1e-250;
    }
  }
  norm += v0;
  j0 = v0 / norm;
  j1 = v1 / norm;
}

// Hankel asymptotic expansion, |x| >= 40.
double asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0;
  double a = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    a *= (mu - double(2 * k - 1) * double(2 * k - 1)) / (8.0 * k * x);
    if (std::abs(a) > last) break;
    last = std::abs(a);
    switch (k % 4) {
      case 1: q += a; break;
      case 2: p -= a; break;
      case 3: q -= a; break;
      case 0: p += a; break;
    }
    if (last < 1e-18) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * pi;
  return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

double j_eval(int nu, double x) {
  const double ax = std::abs(x);
  double v;
  if (ax < 8.0) {
    v = series(nu, ax);
  } else if (ax < 40.0) {
    double j0, j1;
    miller(ax, j0, j1);
    v = nu == 0 ? j0 : j1;
  } else {
    v = asymptotic(nu, ax);
  }
  if (nu == 1 && x < 0) v = -v;
  return v;
}

double newton_zero(double (*f)(double), double (*df)(double), double x) {
  for (int i = 0; i < 50; ++i) {
    double dx = f(x) / df(x);
    x -= dx;
    if (std::abs(dx) < 1e-16 * x) break;
  }
  return x;
}

double minus_j1(double x) { return -bessel_j1(x); }

}  // namespace

double bessel_j0(double x) { return j_eval(0, x); }
double bessel_j1(double x) { return j_eval(1, x); }

double bessel_j1_prime(double x) {
  if (std::abs(x) < 1e-8) return 0.5 - 3.0 * x * x / 16.0;
  return bessel_j0(x) - bessel_j1(x) / x;
}

double bessel_j1_zero1() {
  static const double z = newton_zero(&bessel_j1, &bessel_j1_prime, 3.83);
  return z;
}

namespace {
double j1_second(double x) { return -bessel_j1_prime(x) / x - (1.0 - 1.0 / (x * x)) * bessel_j1(x); }
}  // namespace

double bessel_j1_prime_zero1() {
  static const double z = newton_zero(&bessel_j1_prime, &j1_second, 1.84);
  return z;
}

double bessel_j0_zero1() {
  static const double z = newton_zero(&bessel_j0, &minus_j1, 2.40);
  return z;
}

}  // namespace dcp
