#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "rydex/doppler.hpp"

namespace rydex {

namespace {

constexpr int weideman_n = 64;

// Polynomial coefficients of the Weideman rational expansion of w(z),
// computed once by a direct DFT of the Gaussian mapped onto the unit circle.
// Stored highest power of Z first.
const std::array<double, weideman_n>& weideman_coeffs() {
  static const std::array<double, weideman_n> coeffs = [] {
    const int n = weideman_n;
    const int m = 2 * n;
    const int m2 = 4 * n;
    const double ell = std::sqrt(n / std::sqrt(2.0));
    std::vector<double> x(m2, 0.0);  // sample at theta = -pi stays zero
    for (int j = 1; j < m2; ++j) {
      const double theta = (j - m) * M_PI / m;
      const double t = ell * std::tan(0.5 * theta);
      x[j] = std::exp(-t * t) * (ell * ell + t * t);
    }
    std::array<double, weideman_n> a{};
    for (int mm = 1; mm <= n; ++mm) {
      double acc = 0.0;
      for (int j = 1; j < m2; ++j) acc += x[j] * std::cos(M_PI * j * mm / m);
      const double sign = (mm % 2 == 0) ? 1.0 : -1.0;
      a[n - mm] = sign * acc / m2;
    }
    return a;
  }();
  return coeffs;
}

cplx faddeeva_weideman(cplx z) {
  const double ell = std::sqrt(weideman_n / std::sqrt(2.0));
  const cplx d = ell - im * z;
  const cplx big_z = (ell + im * z) / d;
  const auto& a = weideman_coeffs();
  cplx p = 0.0;
  for (double c : a) p = p * big_z + c;
  return 2.0 * p / (d * d) + (1.0 / std::sqrt(M_PI)) / d;
}

// Laplace continued fraction, accurate in the far field.
cplx faddeeva_cf(cplx z, int depth = 12) {
  cplx f = 0.0;
  for (int k = depth; k >= 1; --k) f = (0.5 * k) / (z - f);
  return im / std::sqrt(M_PI) / (z - f);
}

}  // namespace

cplx faddeeva_w(cplx z) {
  if (std::norm(z) >= 256.0) return faddeeva_cf(z);
  return faddeeva_weideman(z);
}

cplx special_j(cplx z) {
  static const double scale = std::sqrt(M_PI / 2.0);
  if (z.imag() > 0.0) return -im * scale * faddeeva_w(z / std::sqrt(2.0));
  if (z.imag() == 0.0) {
    // Principal value on the real axis: the jump term drops (sgn 0 = 0).
    const cplx w = faddeeva_w(cplx(z.real() / std::sqrt(2.0), 0.0));
    return cplx(scale * w.imag(), 0.0);
  }
  return std::conj(special_j(std::conj(z)));
}

namespace {

// E[1/(1 - lam X)] = J(1/lam)/lam, stable for any nonzero lam.
cplx single_pole_expectation(cplx lam) { return special_j(1.0 / lam) / lam; }

// E[1/(1 - lam X)^2]. Uses the closed form (J(1/lam)/lam - 1)/lam^2; for
// small |lam| that difference cancels, so switch to the moment series
// sum (2j+1)!! lam^(2j), truncated where the tail is below 1e-12.
cplx confluent_expectation(cplx lam) {
  if (std::abs(lam) < 0.05) {
    const cplx l2 = lam * lam;
    cplx term = 1.0, sum = 1.0;
    double dfact = 1.0;  // (2j+1)!! running value
    for (int j = 1; j <= 6; ++j) {
      dfact *= (2 * j + 1);
      term *= l2;
      sum += dfact * term;
    }
    return sum;
  }
  return (single_pole_expectation(lam) - 1.0) / (lam * lam);
}

}  // namespace

cplx gaussian_pole_expectation(cplx a, cplx b) {
  constexpr double tiny = 1e-14;
  const bool za = std::abs(a) < tiny;
  const bool zb = std::abs(b) < tiny;
  if (za && zb) return 1.0;
  if (za) return single_pole_expectation(b);
  if (zb) return single_pole_expectation(a);
  if (std::abs(a - b) < 1e-6 * std::max(std::abs(a), std::abs(b)))
    return confluent_expectation(0.5 * (a + b));
  return (special_j(1.0 / a) - special_j(1.0 / b)) / (a - b);
}

}  // namespace rydex
