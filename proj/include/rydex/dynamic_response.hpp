#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rydex/atomic_core.hpp"

namespace rydex {

/// Small-signal transfer function from a unit perturbation of Hamiltonian
/// entry (k,l) to the rho_21 response, evaluated at Laplace frequency s.
/// Level indices are 1-based. Throws PoleHit when s coincides with an
/// eigenvalue of c0 (relative distance < 1e-9).
cplx transfer_T(const LiouvillianSystem& sys, const SteadyState& ss, int k,
                int l, cplx s);

/// In-phase/quadrature gains and their real/imaginary-part filters at s.
/// The split is the Hermitian/anti-Hermitian decomposition over conjugate
/// frequencies, which coincides with splitting the numerator polynomial
/// coefficients because the denominator has real coefficients.
struct IqGains {
  cplx g_i;
  cplx g_q;
  cplx g_i1, g_i2;
  cplx g_q1, g_q2;
};
IqGains gains_iq(const LiouvillianSystem& sys, const SteadyState& ss, cplx s);

/// Real-coefficient minimal state-space realization of the small-signal
/// response, built in the Hermitian (Bloch) coordinates of the density
/// matrix. Inputs are the in-phase/quadrature components of the signal Rabi
/// frequency; outputs are Re/Im of the rho_21 deviation. Its poles equal
/// eig(c0) and its transfer functions are the four real/imag-part filters.
struct RealRealization {
  Mat15d a;
  Vec15d b_i, b_q;
  RowVec15d c_re, c_im;
};
RealRealization real_realization(const LiouvillianSystem& sys,
                                 const Mat4c& rho_bar);

/// Transfer function value c (sI - a)^{-1} b of a real realization channel.
cplx realization_tf(const Mat15d& a, const Vec15d& b, const RowVec15d& c,
                    cplx s);

/// Frozen atomic operating point with everything the frequency-domain and
/// link-level operations need: per-slice reduced systems, steady states,
/// real realizations, transmitted power and DC photocurrent.
class OperatingPoint {
 public:
  struct Slice {
    LiouvillianSystem sys;
    SteadyState ss;
    RealRealization rr;
    double omega_p_local = 0.0;
    double alpha = 0.0;
  };

  static OperatingPoint make(const AtomicParams& params, int slices = 1);

  const AtomicParams& params() const { return params_; }
  int slices() const { return static_cast<int>(slices_.size()); }
  const Slice& slice(int j) const { return slices_.at(j); }
  double dx() const { return params_.cell_length / slices(); }
  double p_bar() const { return p_bar_; }
  double i_ph_bar() const { return i_ph_bar_; }

  /// Quantum transconductance of slice j at s [S].
  cplx gq_slice(int j, cplx s) const;
  /// Cell-integrated transconductance, integral of gq over x [S m].
  cplx gq_total(cplx s) const;
  /// Uniform-cell per-length transconductance gq_total / L [S].
  cplx gq(cplx s) const;
  /// Frequency-dependent intrinsic gain [W/Hz] from probe power to signal
  /// Rabi frequency; satisfies the photocurrent bridge identity
  /// kappa = (hbar w_p / q eta)(hbar / mu_rf) * gq_total.
  cplx kappa(cplx s) const;

  const std::vector<cplx>& poles() const { return poles_; }

 private:
  AtomicParams params_;
  std::vector<Slice> slices_;
  double p_bar_ = 0.0;
  double i_ph_bar_ = 0.0;
  std::vector<cplx> poles_;  // eig(c0) of slice 0
};

/// Pole-zero-gain form of the per-length transconductance.
struct PoleZero {
  std::vector<cplx> poles;  // [rad/s]
  std::vector<cplx> zeros;  // [rad/s]
  double dc_gain = 0.0;     // [S]
};

/// Extracts poles (eig of the realization matrix) and zeros (generalized
/// eigenvalues of the realization pencil) of gq. No polynomial coefficient
/// arithmetic is involved. Throws DegenerateRealization if the zero count
/// reaches the pole count.
PoleZero pole_zero(const OperatingPoint& op);

/// Evaluates dc * prod(1 - s/z) / prod(1 - s/p).
cplx eval_rational(const PoleZero& pz, cplx s);

/// Impulse and step response of gq on a uniform time grid, via exact
/// matrix-exponential sampling of the real realization.
struct TimeResponse {
  std::vector<double> t;        // [s]
  std::vector<double> impulse;  // [S/s]
  std::vector<double> step;     // [S]
  double rise_time = 0.0;       // 10%-90% of step settle [s]
  double bw3db_hz = 0.0;        // 0.35 / rise_time
};
TimeResponse impulse_step_response(const OperatingPoint& op, double dt, int n);

/// Fixed-step RK4 integrator for the vectorized master equation with a
/// time-varying signal term. The state stays trace-1 and Hermitian up to
/// roundoff because every stage derivative lies in the trace-free Hermitian
/// subspace.
class MasterEquationIntegrator {
 public:
  MasterEquationIntegrator(const AtomicParams& p, double dt);

  void set_state(const Mat4c& rho) { x_ = vec4(rho); }
  void set_state_vec(const Vec16c& x) { x_ = x; }
  const Vec16c& state_vec() const { return x_; }
  Mat4c state() const { return unvec4(x_); }
  cplx rho21() const { return x_(1); }
  double trace_drift() const;
  double dt() const { return dt_; }
  /// Stability bound 2 / max|eig(a0)|.
  double max_stable_dt() const { return max_stable_dt_; }

  /// Advances one step; omega_sig sampled at t, t+dt/2, t+dt.
  void step(cplx w_begin, cplx w_mid, cplx w_end);

 private:
  Vec16c apply(const Vec16c& x, cplx w) const;

  Mat16c a0_;
  Mat16c bx_, by_;  // signal action for Re/Im of omega_sig
  Vec16c x_;
  double dt_ = 0.0;
  double max_stable_dt_ = 0.0;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Mat4c> rho;
  std::vector<double> p;  // probe power [W]
};

/// Integrates the master equation from rho_init (default: the steady state)
/// and emits the decimated trajectory with probe power. Throws UnstableStep
/// if the trace drifts beyond 1e-6, and Error if dt violates the stability
/// bound.
Trajectory rk4_master_solver(const AtomicParams& p,
                             const std::function<cplx(double)>& omega_sig,
                             double t_end, double dt, int decimate = 1,
                             const Mat4c* rho_init = nullptr);

/// Photocurrent spectrum response: for each +omega on the symmetric grid the
/// image at -omega also contributes. Throws GridMismatch if the grid is not
/// symmetric. Returns the spectrum of the real photocurrent signal.
std::vector<cplx> photocurrent_response(const OperatingPoint& op,
                                        std::span<const double> omega_grid,
                                        std::span<const cplx> e_spectrum);

}  // namespace rydex
