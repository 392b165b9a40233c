#pragma once

#include <vector>

#include "rydex/atomic_core.hpp"

namespace rydex {

/// Scaled complementary error function w(z) = exp(-z^2) erfc(-iz) for
/// Im z >= 0. Rational series (Weideman) in the core region, Laplace
/// continued fraction in the far field.
cplx faddeeva_w(cplx z);

/// Gaussian-pole convolution J(z) = integral of N(xi|0,1)/(z - xi) d xi.
/// On the real axis this is the Cauchy principal value; across the axis the
/// function jumps by -i pi sgn(Im z) times the Gaussian envelope.
cplx special_j(cplx z);

/// E[ 1 / ((1 - a X)(1 - b X)) ] for X ~ N(0,1), with the confluent a = b
/// and zero-argument limits handled analytically.
cplx gaussian_pole_expectation(cplx a, cplx b);

/// Thermal velocity ensemble: Gauss-Hermite nodes in units of sigma_v,
/// weights normalized to sum to one.
struct VelocityEnsemble {
  double sigma_v = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
};
VelocityEnsemble velocity_ensemble(const AtomicParams& p, int n);

/// Doppler-averaged static density matrix: Gaussian-weighted average of
/// steady states over velocity classes with the probe shifted by -k_p v and
/// the counter-propagating control by +k_c v. The shift signs are exposed
/// for propagation-geometry studies.
Mat4c doppler_static_rho(const AtomicParams& p, int nodes = 2001,
                         double probe_shift_sign = -1.0,
                         double control_shift_sign = +1.0);

/// Full 16x16 velocity superoperator A_v (per unit v/sigma_v).
Mat16c velocity_superoperator(const AtomicParams& p);

/// Doppler-averaged transfer function by Gauss-Hermite quadrature over
/// velocity classes; each class gets its own steady state and resolvent.
/// Throws PoleHit if a class resolvent is singular and NonConvergent if
/// doubling the node count moves the result by more than 1e-4 relative.
cplx doppler_transfer_numeric(const LiouvillianSystem& sys, int k, int l,
                              cplx s, int nodes = 8001);

/// Eigen-decomposition with biorthogonal left/right eigenvectors,
/// t_m^T s_n = delta_mn. Throws IllConditioned when the eigenvector basis
/// has condition number above 1e8.
struct EigenPack {
  Vec15c lambda;
  Mat15c right;   // columns s_m
  Mat15c left_t;  // rows t_m^T
  double cond = 0.0;
};
EigenPack eigen_pack(const Mat15c& m);

/// Doppler-averaged transfer function in closed form: the double eigenvalue
/// sum with Gaussian-pole expectations. Agrees with the numeric path; relies
/// on the eigendecompositions of (sI - C0)^{-1} C_v at s and at 0.
cplx doppler_transfer_analytic(const LiouvillianSystem& sys,
                               const SteadyState& ss, int k, int l, cplx s);

}  // namespace rydex
