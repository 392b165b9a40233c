#pragma once

#include <cstdint>
#include <vector>

#include "rydex/dynamic_response.hpp"
#include "rydex/noise_budget.hpp"
#include "rydex/params.hpp"

namespace rydex {

/// Deterministic counter-based random stream: xoshiro256++ seeded through
/// splitmix64 from (seed, stream). Identical (seed, stream) pairs give
/// bit-identical sequences on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
  std::uint64_t next_u64();
  double uniform();   // [0, 1)
  double gaussian();  // N(0, 1)
  cplx cgaussian();   // CN(0, 1): variance 1/2 per quadrature

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Line-of-sight field strength sqrt(2 eta0 EIRP / (4 pi d^2)) [V/m].
double los_field_strength(const LinkConfig& cfg);

/// Quantum reference power level of the equivalent baseband model [W].
/// gq_abs is the uniform-cell per-length transconductance magnitude at the
/// IF [S]; lambda of the RF carrier enters through params.
double qref_power(const LinkConfig& cfg, const ReceiverChain& chain,
                  double gq_abs_at_if, const AtomicParams& p);

/// Equivalent-baseband noise PSD components, in normalized (V_ref-relative)
/// units per Hz.
struct BasebandNoise {
  double bbr = 0.0;
  double shot = 0.0;
  double tia = 0.0;
  double thermal = 0.0;
  double total() const { return bbr + shot + tia + thermal; }
};

/// The four equivalent-baseband noise terms. e_n_bb is the BBR field density
/// sqrt(R_n(0)) [V m^-1 Hz^-1/2]; gq_at_if the per-length transconductance
/// magnitude [S]; zeta the coherence factor.
BasebandNoise baseband_noise_psd(const LinkConfig& cfg,
                                 const ReceiverChain& chain,
                                 const AtomicParams& p, double gq_at_if,
                                 double zeta, double e_n_bb, double i_ph_bar);

enum class AtomicStageMode { lti, rk4 };

struct WaveformTrace {
  std::vector<double> t;
  std::vector<cplx> tx_bb;  // transmitted complex baseband
  std::vector<cplx> rx_bb;  // received complex baseband (decimated rate)
};

struct ScResult {
  std::vector<cplx> tx_syms;
  std::vector<cplx> rx_syms;  // after gain normalization
  double evm_rms = 0.0;
  double snr_db = 0.0;
  BasebandNoise noise;            // equivalent-baseband components [1/Hz]
  double noise_psd_total = 0.0;   // injected total (0 when noise is off)
  double n_eq_dbm_hz = 0.0;       // EVM-inferred equivalent input noise PSD
  double e_sig_over_e_lo = 0.0;   // small-signal ratio of the run
  WaveformTrace trace;
};

/// Full single-carrier downlink run: QAM frame, pulse shaping, IF upmix,
/// atomic stage (state-space LTI or RK4 master equation), photodiode, TIA,
/// IQ downconversion, matched filter, symbol decisions, data-aided EVM/SNR.
/// Throws ClippedADC if the baseband magnitude exceeds V_ref.
ScResult simulate_single_carrier(const LinkConfig& cfg, const AtomicParams& p,
                                 const ReceiverChain& chain,
                                 AtomicStageMode mode, bool noise_on,
                                 double e_sig_override = 0.0);

/// Water-filling power allocation: capacity [bit/s/Hz] of parallel channels
/// with per-stream gains g_i (SNR when allocated the full unit power),
/// total power 1.
double waterfill_capacity(const std::vector<double>& gains);
double equal_allocation_capacity(const std::vector<double>& gains);

/// Mutual-coupling matrix of a uniform linear array of parallel half-wave
/// dipoles: induced-EMF mutual impedances in a loaded receiving network,
/// normalized so an isolated element has unit response.
Eigen::MatrixXcd mutual_coupling_matrix(int n, double spacing_wavelengths,
                                        double z_load = 50.0);

struct MimoTrialResult {
  double cap_waterfill = 0.0;
  double cap_equal = 0.0;
};

struct MimoResult {
  std::vector<MimoTrialResult> quantum;
  std::vector<MimoTrialResult> classical_mc;
  double mean_quantum_wf = 0.0;
  double mean_quantum_eq = 0.0;
  double mean_classical_wf = 0.0;
  double mean_classical_eq = 0.0;
  double snr_quantum_db = 0.0;    // per-branch reference SNR
  double snr_classical_db = 0.0;
};

/// Monte-Carlo MIMO capacity over i.i.d. Rayleigh draws for the quantum
/// receiver (noise budget, no mutual coupling) and the classical receiver
/// (thermal floor with noise factor f_c_db, mutual coupling applied).
MimoResult mimo_capacity(const LinkConfig& cfg, const AtomicParams& p,
                         const ReceiverChain& chain, double gq_abs_at_if,
                         double zeta, double e_n_bb, double i_ph_bar, int n,
                         int trials, std::uint64_t seed, double f_c_db = 2.0);

/// One use of the discrete-time channel y = scale H x + w with i.i.d.
/// CN(0, sigma_w^2) noise.
Eigen::VectorXcd discrete_channel_step(const Eigen::VectorXcd& x,
                                       const Eigen::MatrixXcd& h, double scale,
                                       double sigma_w, Rng& rng);

/// Multipath extension: y(n) = scale sum_m H_m x(n-m) + w(n), frame-wise.
std::vector<Eigen::VectorXcd> discrete_channel_multipath(
    const std::vector<Eigen::VectorXcd>& x,
    const std::vector<Eigen::MatrixXcd>& taps, double scale, double sigma_w,
    Rng& rng);

/// Gray-coded square QAM constellation of the given order, unit average
/// power.
std::vector<cplx> qam_constellation(int order);

}  // namespace rydex
