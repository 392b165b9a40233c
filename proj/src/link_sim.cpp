#include "rydex/link_sim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rydex/errors.hpp"
#include "rydex/parallel.hpp"

namespace rydex {

namespace k = constants;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

double db2lin(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t sm = seed ^ (stream * 0xD2B74407B1CE6E93ULL + 0x9E3779B97F4A7C15ULL);
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = k::two_pi * u2;
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

cplx Rng::cgaussian() {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  return cplx(gaussian() * inv_sqrt2, gaussian() * inv_sqrt2);
}

double los_field_strength(const LinkConfig& cfg) {
  const double flux = cfg.eirp_w() / (4.0 * M_PI * cfg.distance * cfg.distance);
  return std::sqrt(2.0 * k::eta0 * flux);
}

double qref_power(const LinkConfig& cfg, const ReceiverChain& chain,
                  double gq_abs_at_if, const AtomicParams& p) {
  const double inv_sqrt = 1.0 / (2.0 * cfg.v_ref) * chain.r_t * chain.k_c() *
                          p.cell_length * gq_abs_at_if *
                          std::sqrt(8.0 * M_PI * k::eta0 /
                                    (p.lambda_lo * p.lambda_lo));
  return 1.0 / (inv_sqrt * inv_sqrt);
}

BasebandNoise baseband_noise_psd(const LinkConfig& cfg,
                                 const ReceiverChain& chain,
                                 const AtomicParams& p, double gq_at_if,
                                 double zeta, double e_n_bb, double i_ph_bar) {
  const double rtkc = chain.r_t * chain.k_c();
  const double vref = cfg.v_ref;
  const double lg = p.cell_length * gq_at_if;

  BasebandNoise n;
  {
    const double inner = (1.0 / (std::sqrt(2.0) * vref)) * rtkc * lg *
                         std::sqrt(zeta) * std::sqrt(2.0) * e_n_bb;
    n.bbr = 0.5 * inner * inner;
  }
  {
    const double inner = (1.0 / vref) * rtkc * std::sqrt(2.0 * k::q_e * i_ph_bar);
    n.shot = 0.5 * inner * inner;
  }
  {
    const double t1 = chain.v_n_tia * chain.r_t / (vref * (chain.z_in + chain.r_s));
    const double t2 = chain.i_n_tia * chain.k_c() * chain.r_t / vref;
    n.tia = 0.5 * t1 * t1 + 0.5 * t2 * t2;
  }
  {
    const double inner = rtkc / vref *
                         std::sqrt(4.0 * k::k_boltzmann * p.temperature / chain.r_s);
    n.thermal = 0.5 * inner * inner;
  }
  return n;
}

std::vector<cplx> qam_constellation(int order) {
  const int side = static_cast<int>(std::lround(std::sqrt(order)));
  if (side * side != order)
    throw Error("qam_constellation: order must be a perfect square");
  std::vector<cplx> pts;
  pts.reserve(order);
  double energy = 0.0;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      const double re = 2.0 * i - side + 1;
      const double im_ = 2.0 * j - side + 1;
      pts.emplace_back(re, im_);
      energy += re * re + im_ * im_;
    }
  const double scale = std::sqrt(order / energy);
  for (auto& p : pts) p *= scale;
  return pts;
}

namespace {

constexpr int pulse_span = 16;  // symbols each side

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

// Windowed sinc: keeps the Nyquist zero crossings, tapers the truncation.
double pulse_sinc(double tau_over_t) {
  const double a = tau_over_t / pulse_span;
  if (std::abs(a) >= 1.0) return 0.0;
  const double win = 0.5 * (1.0 + std::cos(M_PI * a));
  return sinc(tau_over_t) * win;
}

double pulse_rrc(double tau_over_t, double beta = 0.35) {
  const double t = tau_over_t;
  if (std::abs(t) >= pulse_span) return 0.0;
  if (std::abs(t) < 1e-9) return 1.0 + beta * (4.0 / M_PI - 1.0);
  if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
    const double c = beta / std::sqrt(2.0);
    return c * ((1.0 + 2.0 / M_PI) * std::sin(M_PI / (4.0 * beta)) +
                (1.0 - 2.0 / M_PI) * std::cos(M_PI / (4.0 * beta)));
  }
  const double bt = 4.0 * beta * t;
  const double num = std::sin(M_PI * t * (1.0 - beta)) +
                     bt * std::cos(M_PI * t * (1.0 + beta));
  return num / (M_PI * t * (1.0 - bt * bt));
}

double pulse_value(const std::string& shape, double tau_over_t) {
  return shape == "rrc" ? pulse_rrc(tau_over_t) : pulse_sinc(tau_over_t);
}

}  // namespace

double waterfill_capacity(const std::vector<double>& gains) {
  std::vector<double> g = gains;
  std::sort(g.begin(), g.end(), std::greater<double>());
  while (!g.empty() && g.back() <= 0.0) g.pop_back();
  if (g.empty()) return 0.0;
  // Water level over the k strongest channels, largest feasible k.
  double best = 0.0;
  for (int kk = static_cast<int>(g.size()); kk >= 1; --kk) {
    double inv_sum = 0.0;
    for (int i = 0; i < kk; ++i) inv_sum += 1.0 / g[i];
    const double mu = (1.0 + inv_sum) / kk;
    if (mu - 1.0 / g[kk - 1] < 0.0) continue;  // infeasible allocation
    double cap = 0.0;
    for (int i = 0; i < kk; ++i) cap += std::log2(mu * g[i]);
    best = cap;
    break;
  }
  return best;
}

double equal_allocation_capacity(const std::vector<double>& gains) {
  const double p = 1.0 / static_cast<double>(gains.size());
  double cap = 0.0;
  for (double g : gains) cap += std::log2(1.0 + g * p);
  return cap;
}

namespace {

double sin_integral(double x) {
  return adaptive_gk([](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; },
                     0.0, x, 1e-12);
}

double cos_integral(double x) {
  constexpr double euler_gamma = 0.5772156649015329;
  const double tail = adaptive_gk(
      [](double t) { return t == 0.0 ? 0.0 : (std::cos(t) - 1.0) / t; }, 0.0,
      x, 1e-12);
  return euler_gamma + std::log(x) + tail;
}

cplx mutual_impedance_half_wave(double d_wavelengths) {
  const double u0 = k::two_pi * d_wavelengths;
  const double root = std::sqrt(d_wavelengths * d_wavelengths + 0.25);
  const double u1 = k::two_pi * (root + 0.5);
  const double u2 = k::two_pi * (root - 0.5);
  const double r = 30.0 * (2.0 * cos_integral(u0) - cos_integral(u1) -
                           cos_integral(u2));
  const double x = -30.0 * (2.0 * sin_integral(u0) - sin_integral(u1) -
                            sin_integral(u2));
  return {r, x};
}

cplx self_impedance_half_wave() {
  constexpr double euler_gamma = 0.5772156649015329;
  const double cin =
      euler_gamma + std::log(k::two_pi) - cos_integral(k::two_pi);
  return {30.0 * cin, 30.0 * sin_integral(k::two_pi)};
}

}  // namespace

Eigen::MatrixXcd mutual_coupling_matrix(int n, double spacing_wavelengths,
                                        double z_load) {
  // Loaded receiving network: voltages across the loads relative to an
  // isolated element, C = (Z11 + Z_L)(Z + Z_L I)^{-1}. Unit self-term in
  // the no-coupling limit; carries both correlation and mismatch loss.
  const cplx z11 = self_impedance_half_wave();
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) z(i, i) = z11 + z_load;
  for (int d = 1; d < n; ++d) {
    const cplx zm = mutual_impedance_half_wave(d * spacing_wavelengths);
    for (int i = 0; i + d < n; ++i) {
      z(i, i + d) = zm;
      z(i + d, i) = zm;
    }
  }
  return (z11 + z_load) * z.inverse();
}

MimoResult mimo_capacity(const LinkConfig& cfg, const AtomicParams& p,
                         const ReceiverChain& chain, double gq_abs_at_if,
                         double zeta, double e_n_bb, double i_ph_bar, int n,
                         int trials, std::uint64_t seed, double f_c_db) {
  if (trials < 1) throw Error("mimo_capacity: trials must be >= 1");

  const double pqref = qref_power(cfg, chain, gq_abs_at_if, p);
  const double psd_w =
      baseband_noise_psd(cfg, chain, p, gq_abs_at_if, zeta, e_n_bb, i_ph_bar)
          .total();
  const double sigma_w2 = cfg.bandwidth * psd_w;
  const double h_iso = p.lambda_lo / (4.0 * M_PI * cfg.distance);
  const double h_bs = std::sqrt(db2lin(cfg.bs_gain_db)) * h_iso;

  const double snr_q = cfg.tx_power_w() / pqref * h_bs * h_bs / sigma_w2;

  const double p_r_classical = cfg.tx_power_w() * db2lin(cfg.bs_gain_db) *
                               db2lin(cfg.ue_gain_classical_db) * h_iso * h_iso;
  const double n_classical = k::k_boltzmann * p.temperature * db2lin(f_c_db) *
                             cfg.bandwidth;
  const double snr_c = p_r_classical / n_classical;

  const Eigen::MatrixXcd c_mc = mutual_coupling_matrix(n, 0.5);

  MimoResult res;
  res.quantum.resize(trials);
  res.classical_mc.resize(trials);
  res.snr_quantum_db = 10.0 * std::log10(snr_q);
  res.snr_classical_db = 10.0 * std::log10(snr_c);

  parallel_for(trials, [&](int t) {
    Rng rng(seed, static_cast<std::uint64_t>(t));
    Eigen::MatrixXcd h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = rng.cgaussian();

    auto caps = [n](const Eigen::MatrixXcd& ch, double snr) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ch);
      std::vector<double> gains(n);
      for (int i = 0; i < n; ++i) {
        const double s = svd.singularValues()(i);
        gains[i] = snr * s * s;
      }
      MimoTrialResult r;
      r.cap_waterfill = waterfill_capacity(gains);
      r.cap_equal = equal_allocation_capacity(gains);
      return r;
    };
    res.quantum[t] = caps(h, snr_q);
    res.classical_mc[t] = caps(c_mc * h, snr_c);
  });

  auto mean = [&](auto get) {
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) acc += get(t);
    return acc / trials;
  };
  res.mean_quantum_wf = mean([&](int t) { return res.quantum[t].cap_waterfill; });
  res.mean_quantum_eq = mean([&](int t) { return res.quantum[t].cap_equal; });
  res.mean_classical_wf =
      mean([&](int t) { return res.classical_mc[t].cap_waterfill; });
  res.mean_classical_eq =
      mean([&](int t) { return res.classical_mc[t].cap_equal; });
  return res;
}

Eigen::VectorXcd discrete_channel_step(const Eigen::VectorXcd& x,
                                       const Eigen::MatrixXcd& h, double scale,
                                       double sigma_w, Rng& rng) {
  if (sigma_w < 0.0) throw Error("discrete_channel_step: sigma_w must be >= 0");
  Eigen::VectorXcd y = scale * (h * x);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y(i) += sigma_w * rng.cgaussian();
  return y;
}

std::vector<Eigen::VectorXcd> discrete_channel_multipath(
    const std::vector<Eigen::VectorXcd>& x,
    const std::vector<Eigen::MatrixXcd>& taps, double scale, double sigma_w,
    Rng& rng) {
  std::vector<Eigen::VectorXcd> y(x.size());
  for (size_t nn = 0; nn < x.size(); ++nn) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(x[nn].size());
    for (size_t m = 0; m < taps.size(); ++m) {
      if (nn < m) break;
      acc += taps[m] * x[nn - m];
    }
    acc *= scale;
    for (Eigen::Index i = 0; i < acc.size(); ++i)
      acc(i) += sigma_w * rng.cgaussian();
    y[nn] = acc;
  }
  return y;
}

ScResult simulate_single_carrier(const LinkConfig& cfg, const AtomicParams& p,
                                 const ReceiverChain& chain,
                                 AtomicStageMode mode, bool noise_on,
                                 double e_sig_override) {
  const double t_sym = cfg.symbol_period;
  const double dt = cfg.rk_step;
  const int sps = static_cast<int>(std::llround(t_sym / dt));
  if (sps < 8) throw Error("simulate_single_carrier: rk_step too coarse");
  const int n_data = cfg.n_symbols;
  const int n_total = n_data + 2 * pulse_span;
  const long n_steps = static_cast<long>(n_total) * sps;
  const double w_if = k::two_pi * cfg.f_if;

  // Frame of unit average power.
  const auto constellation = qam_constellation(cfg.modulation_order);
  Rng sym_rng(cfg.seed, 1);
  std::vector<cplx> syms(n_total);
  double frame_power = 0.0;
  for (auto& s : syms) {
    const auto idx = static_cast<size_t>(sym_rng.uniform() * constellation.size());
    s = constellation[std::min(idx, constellation.size() - 1)];
    frame_power += std::norm(s);
  }
  const double frame_scale = std::sqrt(n_total / frame_power);
  for (auto& s : syms) s *= frame_scale;

  // Baseband envelope at half-step resolution.
  const auto x_bb_at = [&](double t) {
    const double tn = t / t_sym;
    const int lo = std::max(0, static_cast<int>(std::ceil(tn - pulse_span)));
    const int hi = std::min(n_total - 1,
                            static_cast<int>(std::floor(tn + pulse_span)));
    cplx acc = 0.0;
    for (int nn = lo; nn <= hi; ++nn)
      acc += syms[nn] * pulse_value(cfg.pulse_shape, tn - nn);
    return acc;
  };

  const double e0 = e_sig_override > 0.0 ? e_sig_override : los_field_strength(cfg);
  const double omega0 = p.mu_rf * e0 / k::hbar;
  const auto omega_sig_at = [&](double t) {
    return omega0 * x_bb_at(t) * std::polar(1.0, w_if * t);
  };

  // Atomic stage shared quantities (uniform cell).
  const OperatingPoint op = OperatingPoint::make(p, 1);
  const double alpha_pref =
      p.k_p() * p.n0 * p.mu12 * p.mu12 / (k::eps0 * k::hbar * p.omega_p);
  const double pd_gain = k::q_e * p.pd_quantum_efficiency /
                         (k::hbar * p.omega_p_optical());

  std::vector<double> i_ph(n_steps);
  if (mode == AtomicStageMode::rk4) {
    MasterEquationIntegrator integ(p, dt);
    if (dt > integ.max_stable_dt())
      throw Error("simulate_single_carrier: rk_step exceeds stability bound");
    integ.set_state(op.slice(0).ss.rho);
    for (long i = 0; i < n_steps; ++i) {
      const double t = i * dt;
      integ.step(omega_sig_at(t), omega_sig_at(t + 0.5 * dt),
                 omega_sig_at(t + dt));
      if ((i & 4095) == 0 && integ.trace_drift() > 1e-6)
        throw UnstableStep("simulate_single_carrier: master equation drift");
      const double pw = p.probe_power_in *
                        std::exp(2.0 * alpha_pref * p.cell_length *
                                 integ.rho21().imag());
      i_ph[i] = pd_gain * pw;
    }
  } else {
    // Exact ZOH discretization of the real small-signal realization, input
    // sampled mid-step.
    const auto& rr = op.slice(0).rr;
    const Mat15d ad = (rr.a * dt).exp();
    const Eigen::PartialPivLU<Mat15d> alu(rr.a);
    const Mat15d prop = ad - Mat15d::Identity();
    const Vec15d bdi = alu.solve(prop * rr.b_i);
    const Vec15d bdq = alu.solve(prop * rr.b_q);
    Vec15d z = Vec15d::Zero();
    const double dp_gain = 2.0 * alpha_pref * p.cell_length * op.p_bar();
    for (long i = 0; i < n_steps; ++i) {
      const cplx w = omega_sig_at(i * dt + 0.5 * dt);
      z = ad * z + bdi * w.real() + bdq * w.imag();
      // State now sits at t = (i+1) dt, matching the RK4 branch alignment.
      const double d_im_rho21 = rr.c_im * z;
      i_ph[i] = pd_gain * (op.p_bar() + dp_gain * d_im_rho21);
    }
  }

  // TIA and IQ downconversion, decimated to 16 samples per symbol.
  const double i_mean =
      std::accumulate(i_ph.begin(), i_ph.end(), 0.0) / i_ph.size();
  const int dec = sps / 16;
  const long n_bb = n_steps / dec;
  const double f_bb = 1.0 / (dec * dt);
  const double rtkc = chain.r_t * chain.k_c();

  double v_peak = 0.0;
  std::vector<cplx> y_bb(n_bb);
  for (long j = 0; j < n_bb; ++j) {
    cplx acc = 0.0;
    for (int m = 0; m < dec; ++m) {
      const long i = j * dec + m;
      const double v = rtkc * (i_ph[i] - i_mean);
      v_peak = std::max(v_peak, std::abs(v));
      acc += v * std::polar(1.0, -w_if * (i * dt));
    }
    y_bb[j] = acc / (static_cast<double>(dec) * cfg.v_ref);
  }
  if (v_peak > cfg.v_ref)
    throw ClippedADC("simulate_single_carrier: baseband exceeds V_ref");

  const double zeta = coherence_factor(p.cell_length / p.lambda_lo);
  const double e_n_bb =
      std::sqrt(8.0 * M_PI / 3.0 * k::eta0 *
                spectral_radiance(p.f_lo(), p.temperature));
  const double gq_if = std::abs(op.gq(cplx(0.0, w_if)));
  const BasebandNoise nbb =
      baseband_noise_psd(cfg, chain, p, gq_if, zeta, e_n_bb, op.i_ph_bar());
  if (noise_on) {
    Rng noise_rng(cfg.seed, 2);
    const double sigma = std::sqrt(nbb.total() * f_bb);
    for (auto& y : y_bb) y += sigma * noise_rng.cgaussian();
  }

  // Matched filter evaluated at symbol instants shifted by a trial timing
  // offset. Baseband sample j sits at t = (j dec + (dec-1)/2) dt from the
  // boxcar centroid.
  const double t_off = 0.5 * (dec - 1) * dt;
  std::vector<cplx> tx(n_data);
  for (int nn = 0; nn < n_data; ++nn) tx[nn] = syms[nn + pulse_span];

  const auto demod_at = [&](double tau_timing, std::vector<cplx>& rx) {
    for (int nn = 0; nn < n_data; ++nn) {
      const double t_n = (nn + pulse_span) * t_sym + tau_timing;
      const long j_center = std::lround((t_n - t_off) / (dec * dt));
      cplx acc = 0.0;
      for (long j = j_center - 16L * pulse_span;
           j <= j_center + 16L * pulse_span; ++j) {
        if (j < 0 || j >= n_bb) continue;
        const double tau = (j * dec * dt + t_off) - t_n;
        acc += y_bb[j] * pulse_value(cfg.pulse_shape, tau / t_sym);
      }
      rx[nn] = acc / 16.0;
    }
  };

  // Data-aided EVM with a single complex gain fit.
  const auto evm2_of = [&](const std::vector<cplx>& rx, cplx* gain_out) {
    cplx num = 0.0;
    double den = 0.0;
    for (int nn = 0; nn < n_data; ++nn) {
      num += std::conj(tx[nn]) * rx[nn];
      den += std::norm(tx[nn]);
    }
    const cplx gain = num / den;
    if (gain_out) *gain_out = gain;
    double err = 0.0;
    for (int nn = 0; nn < n_data; ++nn)
      err += std::norm(rx[nn] - gain * tx[nn]);
    return err / (std::norm(gain) * den);
  };

  // Timing sync: the atomic stage delays the envelope by its group delay,
  // so search the data-aided EVM over symbol timing, quantized to the
  // receiver's baseband sample grid (T/16). The residual sub-sample error
  // stays in the budget as a sync systematic.
  std::vector<cplx> rx(n_data);
  double best_tau = 0.0, best_e = 1e300;
  const double step = dec * dt;
  for (int kk = -8; kk <= 16; ++kk) {
    const double tau_try = kk * step;
    demod_at(tau_try, rx);
    const double e = evm2_of(rx, nullptr);
    if (e < best_e) {
      best_e = e;
      best_tau = tau_try;
    }
  }
  demod_at(best_tau, rx);
  cplx gain;
  const double evm2 = evm2_of(rx, &gain);

  ScResult res;
  res.tx_syms = tx;
  res.rx_syms.resize(n_data);
  for (int nn = 0; nn < n_data; ++nn) res.rx_syms[nn] = rx[nn] / gain;
  res.evm_rms = std::sqrt(evm2);
  res.snr_db = -10.0 * std::log10(evm2);
  res.noise = nbb;
  res.noise_psd_total = noise_on ? nbb.total() : 0.0;
  const double h_iso = p.lambda_lo / (4.0 * M_PI * cfg.distance);
  const double p_iso = cfg.tx_power_w() * h_iso * h_iso;
  res.n_eq_dbm_hz =
      10.0 * std::log10(p_iso * evm2 / cfg.bandwidth / 1.0e-3);
  res.e_sig_over_e_lo = e0 / p.e_lo;

  res.trace.t.resize(n_bb);
  res.trace.tx_bb.resize(n_bb);
  res.trace.rx_bb = y_bb;
  for (long j = 0; j < n_bb; ++j) {
    const double t = j * dec * dt + t_off;
    res.trace.t[j] = t;
    res.trace.tx_bb[j] = x_bb_at(t);
  }
  return res;
}

}  // namespace rydex
