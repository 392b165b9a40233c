#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "rydex/constants.hpp"

namespace rydex {

/// Physical constants of the atomic stage and its operating point.
/// All frequencies are angular [rad/s]; config files accept Hz and convert
/// at load time.
struct AtomicParams {
  double omega_p = 0.0;  // probe Rabi frequency [rad/s]
  double omega_c = 0.0;  // control Rabi frequency [rad/s]
  double e_lo = 0.0;     // LO field strength [V/m]

  double delta_p = 0.0;   // probe detuning [rad/s]
  double delta_c = 0.0;   // control detuning [rad/s]
  double delta_lo = 0.0;  // LO detuning [rad/s]

  double gamma = 0.0;   // transit dephasing rate [rad/s]
  double gamma2 = 0.0;  // level-2 spontaneous decay [rad/s]
  double gamma3 = 0.0;  // level-3 spontaneous decay [rad/s]
  double gamma4 = 0.0;  // level-4 spontaneous decay [rad/s]

  double mu12 = 0.0;   // probe transition dipole [C m]
  double mu_rf = 0.0;  // RF transition dipole [C m]

  double n0 = 0.0;           // atomic density [m^-3]
  double cell_length = 0.0;  // interaction length L [m]

  double lambda_p = 0.0;   // probe wavelength [m]
  double lambda_c = 0.0;   // control wavelength [m]
  double lambda_lo = 0.0;  // LO (carrier) wavelength [m]

  double temperature = 0.0;  // vapor temperature [K]
  double atom_mass = 0.0;    // [kg]

  double probe_power_in = 0.0;         // incident probe power P0 [W]
  double pd_quantum_efficiency = 0.0;  // photodiode eta, in (0,1]

  // Derived quantities.
  double omega_lo() const { return mu_rf * e_lo / constants::hbar; }
  double k_p() const { return constants::two_pi / lambda_p; }
  double k_c() const { return constants::two_pi / lambda_c; }
  double k_lo() const { return constants::two_pi / lambda_lo; }
  double f_lo() const { return constants::c0 / lambda_lo; }
  double omega_p_optical() const { return constants::two_pi * constants::c0 / lambda_p; }
  double sigma_v() const {
    return std::sqrt(constants::k_boltzmann * temperature / atom_mass);
  }

  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Photodiode bias network and transimpedance amplifier parameters.
struct ReceiverChain {
  double r_t = 1.0e4;       // transimpedance [Ohm]
  double i_n_tia = 1.8e-12; // input-referred current noise [A/sqrt(Hz)]
  double v_n_tia = 2.8e-9;  // input-referred voltage noise [V/sqrt(Hz)]
  double z_in = 60.0;       // TIA input impedance [Ohm]
  double r_s = 1.0e3;       // photodiode bias resistor [Ohm]
  double r_l = 50.0;        // matched load [Ohm]
  double rin_dbc_hz = -140.0;  // probe laser relative intensity noise [dBc/Hz]

  /// Current divider ratio at the TIA input.
  double k_c() const { return r_s / (r_s + z_in); }

  void validate() const;
};

/// Parameters of the waveform-level and discrete-time link simulations.
struct LinkConfig {
  double f_if = 150.0e3;         // intermediate frequency [Hz]
  double tx_power_dbm = 10.0;    // BS transmit power [dBm]
  double bs_gain_db = 5.0;       // BS antenna gain [dB]
  double ue_gain_classical_db = 1.76;  // classical UE antenna gain [dB]
  double distance = 200.0;       // BS-UE distance [m]
  double symbol_period = 1.0e-5; // [s]
  double rk_step = 1.0e-9;       // master-equation integrator step [s]
  double v_ref = 1.0;            // ADC reference voltage [V]
  double bandwidth = 1.0e5;      // communication bandwidth W [Hz]
  int modulation_order = 16;     // QAM order
  int n_symbols = 240;           // frame length for the single-carrier run
  std::string pulse_shape = "sinc";  // "sinc" (windowed) or "rrc"
  std::uint64_t seed = 1;

  double tx_power_w() const { return 1.0e-3 * std::pow(10.0, tx_power_dbm / 10.0); }
  double eirp_w() const {
    return 1.0e-3 * std::pow(10.0, (tx_power_dbm + bs_gain_db) / 10.0);
  }

  void validate() const;
};

/// Everything a run needs, as loaded from one JSON config file.
struct Config {
  AtomicParams atomic;
  ReceiverChain chain;
  LinkConfig link;
};

/// Parses a JSON config. Unknown keys are rejected so unit mistakes cannot
/// slip through silently. Throws ConfigError naming the offending key.
Config load_config(const std::string& path);
Config parse_config(const std::string& json_text);

/// Serializes back to the same schema (round-trips through parse_config).
std::string config_to_json(const Config& cfg);

}  // namespace rydex
