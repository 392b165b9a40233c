#pragma once

#include <span>
#include <vector>

#include "rydex/linalg.hpp"
#include "rydex/params.hpp"

namespace rydex {

/// hbar-normalized four-level Hamiltonian of the ladder system driven by
/// probe, control, LO and signal fields. omega_sig is the complex signal Rabi
/// frequency; the (3,4)/(4,3) entries carry (Omega_LO + Omega_sig^*)/2 and
/// (Omega_LO + Omega_sig)/2 respectively (0-based (2,3)/(3,2)).
Mat4c build_hamiltonian(const AtomicParams& p, cplx omega_sig);

/// Vectorized evolution of the master equation, reduced to the stable
/// 15-dimensional state space.
///
/// a0 is the full 16x16 generator in the column-stacking convention; q the
/// deterministic orthonormal basis whose first column is vec(I4)/2; c0/w0 the
/// reduced blocks of q^T a0 q; cv the velocity coupling block; f34/f43 the
/// reduced signal-action matrices for a unit perturbation of the (3,4)/(4,3)
/// Hamiltonian entry.
struct LiouvillianSystem {
  Mat16c a0;
  Mat16d q;
  Mat15c c0;
  Vec15c w0;
  Mat15c cv;
  Mat15c f34;
  Mat15c f43;

  /// Selector row mapping a reduced state to the rho_21 component.
  Eigen::RowVector<cplx, 15> rho21_row;

  /// Reduced signal-action matrix for an arbitrary Hamiltonian entry (k,l),
  /// 1-based level indices, k != l. Covers the laser-noise channels
  /// (1,2),(2,1),(2,3),(3,2) as well as the signal channels (3,4),(4,3).
  Mat15c signal_action(int k, int l) const;
};

/// Dephasing matrix diag([0, g2, g3, g4] + g).
Mat4c decay_matrix(const AtomicParams& p);

/// Assembles the full generator a0 for a given unperturbed Hamiltonian.
Mat16c assemble_generator(const AtomicParams& p, const Mat4c& h0);

/// Builds the reduced system at the params' operating point (no signal).
/// Throws ReductionError if the trace row of q^T a0 q is not numerically zero.
LiouvillianSystem build_liouvillian(const AtomicParams& p);

struct SteadyState {
  Vec15c z0;    // reduced steady state
  Mat4c rho;    // density matrix
};

/// Solves c0 z = -w0/2 and lifts back to a density matrix.
/// Throws SingularSystem if the solve fails.
SteadyState steady_state(const LiouvillianSystem& sys);

/// Density-matrix sanity diagnostics.
struct DensityDiagnostics {
  double hermiticity_error;  // max |rho - rho^H| relative to max element
  double trace_error;        // |tr(rho) - 1|
  double min_eigenvalue;     // most negative eigenvalue
  bool ok(double herm_tol = 1e-12, double trace_tol = 1e-10,
          double psd_tol = -1e-9) const {
    return hermiticity_error < herm_tol && trace_error < trace_tol &&
           min_eigenvalue > psd_tol;
  }
};
DensityDiagnostics check_density(const Mat4c& rho);

/// Amplitude attenuation exponent per unit length from Im(rho_21).
double attenuation_alpha(const AtomicParams& p, cplx rho21, double omega_p_local);

struct Transmission {
  double p_bar = 0.0;               // transmitted probe power [W]
  std::vector<double> alpha;        // per-slice attenuation [1/m]
  std::vector<double> omega_p_x;    // local probe Rabi per slice [rad/s]
  std::vector<cplx> rho21;          // per-slice steady-state coherence
};

/// Uniform thin-cell transmission from a precomputed steady state.
Transmission probe_transmission(const Mat4c& rho_bar, const AtomicParams& p);

/// Self-consistent N-slice transmission: the probe Rabi frequency of each
/// slice decays with the attenuation accumulated upstream, and every slice
/// uses its own local steady state. slices == 1 reduces to the uniform cell.
Transmission probe_transmission_sliced(const AtomicParams& p, int slices);

/// DC photocurrent for a given transmitted power.
double photocurrent_dc(const AtomicParams& p, double p_bar);

struct DcSweepPoint {
  double e_lo;          // [V/m]
  double transmission;  // P_bar / P0
  double slope;         // d(P_bar/P0) / dE_LO [m/V]
};

/// Transmission vs LO field strength with finite-difference slopes (central
/// inside, one-sided at the ends). gamma_scale scales gamma3 and gamma4
/// together. Throws GridTooCoarse for fewer than 3 points.
std::vector<DcSweepPoint> dc_sweep(const AtomicParams& p,
                                   std::span<const double> e_lo_grid,
                                   double gamma_scale = 1.0);

/// Slope-based DC intrinsic gain (hbar/mu_rf) dP_bar/dE_LO [W s] evaluated by
/// a central difference with relative step 1e-4 at the params' own E_LO.
double kappa_dc_fd(const AtomicParams& p);

}  // namespace rydex
