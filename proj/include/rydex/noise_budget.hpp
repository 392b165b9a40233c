#pragma once

#include "rydex/params.hpp"

namespace rydex {

/// Planck spectral radiance B_nu(T) [W Hz^-1 m^-2 sr^-1]. T = 0 returns 0.
double spectral_radiance(double nu, double temperature);

/// Rayleigh-Jeans approximation 2 nu^2 kB T / c^2, for comparison.
double spectral_radiance_rj(double nu, double temperature);

/// Closed forms of f_n(beta) = integral of x^n e^{i beta x} over [-1,1]
/// (real by symmetry), with series near beta = 0.
double f0_closed(double beta);
double f2_closed(double beta);

/// Blackbody field correlation along the cell axis: the (3,3) entry of the
/// dyadic correlation with the separation direction as the 3-axis,
/// pi eta0 B_nu [ (f0+f2) + (f0-3 f2) ] at beta = k_lo * u.
/// Units V^2 m^-2 Hz^-1.
double bbr_correlation(double u, double nu, double temperature, double k_lo);

/// Correlation normalized to its u = 0 value (depends only on beta).
double bbr_correlation_normalized(double beta);

/// BBR coherence factor zeta(ell), ell = L / lambda_lo. Triangular-window
/// integral of the normalized correlation, evaluated panel-wise with
/// adaptive Gauss-Kronrod between the half-period zeros of the kernel.
/// Always in (0,1), -> 1 as ell -> 0.
double coherence_factor(double ell, double abs_tol = 1e-10);

/// BBR-induced photocurrent PSD (4pi/3) eta0 B_nu zeta L^2 |gq|^2 [A^2/Hz],
/// with gq the uniform-cell per-length transconductance at the IF [S].
double bbr_current_psd(double gq_abs, const AtomicParams& p);

struct SnrSensitivity {
  double snr;      // best achievable SNR (dimensionless)
  double e_i_min;  // minimum detectable in-phase field [V m^-1 Hz^-1/2]
};

/// BBR-limited SNR bound for a USB-only signal of PSD p_sig
/// [V^2 m^-2 Hz^-1], and the 0 dB sensitivity.
SnrSensitivity snr_bound_and_sensitivity(double p_sig_psd, double nu,
                                         double temperature, double zeta);

/// Photocurrent-referred noise PSDs [A^2/Hz], double-sided convention.
struct CurrentPsds {
  double bbr = 0.0;
  double shot = 0.0;
  double rs_thermal = 0.0;
  double rin = 0.0;
  double total() const { return bbr + shot + rs_thermal + rin; }
};

/// Shot, bias-resistor thermal and laser RIN photocurrent PSDs. The BBR
/// term is filled by the caller from bbr_current_psd.
CurrentPsds internal_noise_psds(const ReceiverChain& chain, double i_ph_bar,
                                double temperature, double bbr = 0.0);

/// TIA output PSD [W/Hz] for an injected photocurrent PSD [A^2/Hz].
double tia_output_psd(double current_psd, const ReceiverChain& chain);

/// Combined circuit thermal PSD at the TIA output [W/Hz]: amplifier
/// voltage/current noise plus the bias resistor Johnson term.
double circuit_thermal_psd(const ReceiverChain& chain, double temperature);

struct NoiseFactors {
  double f_q = 0.0;
  double g_q = 0.0;
  double f_tia = 0.0;
  double g_tia = 0.0;
  double f_total = 0.0;
  double g_total = 0.0;
};

/// Friis noise factors of the quantum front end and the TIA. gq_total_abs
/// is L |gq| at the IF [S m]; current_psd_total must contain BBR + shot +
/// bias thermal + RIN. The reference field e_sig cancels (homogeneity).
/// lambda_carrier is the RF carrier wavelength. Throws DivisionByZero if
/// the front-end gain vanishes.
NoiseFactors noise_factors(const ReceiverChain& chain, double gq_total_abs,
                           double current_psd_total, double lambda_carrier,
                           double temperature, double e_sig = 1.0);

}  // namespace rydex
