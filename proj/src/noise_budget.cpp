#include "rydex/noise_budget.hpp"

#include <cmath>
#include <limits>

#include "rydex/errors.hpp"
#include "rydex/linalg.hpp"

namespace rydex {

namespace k = constants;

double spectral_radiance(double nu, double temperature) {
  if (temperature <= 0.0) return 0.0;
  const double x = k::h_planck * nu / (k::k_boltzmann * temperature);
  return 2.0 * nu * nu / (k::c0 * k::c0) * k::h_planck * nu /
         std::expm1(x);
}

double spectral_radiance_rj(double nu, double temperature) {
  return 2.0 * nu * nu * k::k_boltzmann * temperature / (k::c0 * k::c0);
}

double f0_closed(double beta) {
  const double b = std::abs(beta);
  if (b < 1e-2) {
    const double b2 = beta * beta;
    return 2.0 * (1.0 - b2 / 6.0 + b2 * b2 / 120.0 - b2 * b2 * b2 / 5040.0);
  }
  return 2.0 * std::sin(beta) / beta;
}

double f2_closed(double beta) {
  const double b = std::abs(beta);
  if (b < 1e-2) {
    const double b2 = beta * beta;
    return 2.0 * (1.0 / 3.0 - b2 / 10.0 + b2 * b2 / 168.0 -
                  b2 * b2 * b2 / 6480.0);
  }
  const double b3 = beta * beta * beta;
  return 2.0 * ((beta * beta - 2.0) * std::sin(beta) +
                2.0 * beta * std::cos(beta)) /
         b3;
}

double bbr_correlation(double u, double nu, double temperature, double k_lo) {
  const double beta = k_lo * u;
  // (f0+f2) I + (f0-3 f2) rr^T, (3,3) entry with r along the separation axis.
  const double angular = 2.0 * f0_closed(beta) - 2.0 * f2_closed(beta);
  return M_PI * k::eta0 * spectral_radiance(nu, temperature) * angular;
}

double bbr_correlation_normalized(double beta) {
  return (2.0 * f0_closed(beta) - 2.0 * f2_closed(beta)) / (8.0 / 3.0);
}

double coherence_factor(double ell, double abs_tol) {
  if (!(ell > 0.0)) throw Error("coherence_factor: ell must be positive");
  // zeta = (2/ell^2) * int_0^ell (ell - u) r(2 pi u) du with r the
  // normalized correlation. Split the range at the kernel half-periods so
  // the oscillatory tail integrates cleanly.
  const auto integrand = [ell](double u) {
    return (ell - u) * bbr_correlation_normalized(k::two_pi * u);
  };
  const double panel = 0.25;
  double total = 0.0;
  double lo = 0.0;
  int n_panels = static_cast<int>(std::ceil(ell / panel));
  const double tol_per_panel = abs_tol / std::max(1, n_panels);
  while (lo < ell) {
    const double hi = std::min(lo + panel, ell);
    total += adaptive_gk(integrand, lo, hi, tol_per_panel);
    lo = hi;
  }
  return 2.0 * total / (ell * ell);
}

double bbr_current_psd(double gq_abs, const AtomicParams& p) {
  const double zeta = coherence_factor(p.cell_length / p.lambda_lo);
  const double b = spectral_radiance(p.f_lo(), p.temperature);
  const double lg = p.cell_length * gq_abs;
  return 4.0 * M_PI / 3.0 * k::eta0 * b * zeta * lg * lg;
}

SnrSensitivity snr_bound_and_sensitivity(double p_sig_psd, double nu,
                                         double temperature, double zeta) {
  const double denom =
      4.0 * M_PI / 3.0 * k::eta0 * spectral_radiance(nu, temperature) * zeta;
  SnrSensitivity out;
  out.snr = denom > 0.0 ? 0.25 * p_sig_psd / denom
                        : std::numeric_limits<double>::infinity();
  out.e_i_min = std::sqrt(denom);
  return out;
}

CurrentPsds internal_noise_psds(const ReceiverChain& chain, double i_ph_bar,
                                double temperature, double bbr) {
  if (i_ph_bar < 0.0)
    throw Error("internal_noise_psds: photocurrent must be nonnegative");
  CurrentPsds out;
  out.bbr = bbr;
  out.shot = k::q_e * i_ph_bar;
  out.rs_thermal = 2.0 * k::k_boltzmann * temperature / chain.r_s;
  out.rin = i_ph_bar * i_ph_bar * std::pow(10.0, chain.rin_dbc_hz / 10.0);
  return out;
}

double tia_output_psd(double current_psd, const ReceiverChain& chain) {
  const double rtkc = chain.r_t * chain.k_c();
  return current_psd * rtkc * rtkc / chain.r_l;
}

double circuit_thermal_psd(const ReceiverChain& chain, double temperature) {
  const double kc = chain.k_c();
  const double denom = chain.r_s + chain.z_in;
  const double term_i = chain.i_n_tia * chain.i_n_tia * kc * kc;
  const double term_v = chain.v_n_tia * chain.v_n_tia / (denom * denom);
  const double term_rs = 4.0 * k::k_boltzmann * temperature / chain.r_s;
  return chain.r_t * chain.r_t / (2.0 * chain.r_l) *
         (term_i + term_v + term_rs);
}

NoiseFactors noise_factors(const ReceiverChain& chain, double gq_total_abs,
                           double current_psd_total, double lambda_carrier,
                           double temperature, double e_sig) {
  const double a_eq = 3.0 * lambda_carrier * lambda_carrier / (8.0 * M_PI);
  const double kc = chain.k_c();
  const double lg_e = gq_total_abs * e_sig;

  const double snr_in = a_eq * e_sig * e_sig /
                        (2.0 * k::eta0 * k::k_boltzmann * temperature);
  const double snr_out = lg_e * lg_e / 4.0 / current_psd_total;

  NoiseFactors nf;
  nf.g_q = (lg_e * kc) * (lg_e * kc) * chain.z_in / 2.0 /
           (e_sig * e_sig * a_eq / (2.0 * k::eta0));
  if (nf.g_q == 0.0) throw DivisionByZero("noise_factors: zero front-end gain");
  nf.f_q = snr_in / snr_out;

  const double denom = chain.r_s + chain.z_in;
  nf.f_tia = 1.0 + (0.5 * chain.i_n_tia * chain.i_n_tia * kc * kc +
                    0.5 * chain.v_n_tia * chain.v_n_tia / (denom * denom)) /
                       current_psd_total;
  nf.g_tia = chain.r_t * chain.r_t / (chain.z_in * chain.r_l);
  nf.f_total = nf.f_q + (nf.f_tia - 1.0) / nf.g_q;
  nf.g_total = nf.g_q * nf.g_tia;
  return nf;
}

}  // namespace rydex
