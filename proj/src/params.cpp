#include "rydex/params.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rydex/errors.hpp"

namespace rydex {

using nlohmann::json;
namespace k = constants;

void AtomicParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("atomic.") + name + " must be strictly positive");
  };
  positive(omega_p, "omega_p_hz");
  positive(omega_c, "omega_c_hz");
  positive(e_lo, "e_lo_v_per_m");
  positive(gamma, "gamma_hz");
  positive(gamma2, "gamma2_hz");
  positive(gamma3, "gamma3_hz");
  positive(gamma4, "gamma4_hz");
  positive(mu12, "mu12_cm");
  positive(mu_rf, "mu_rf_cm");
  positive(n0, "n0_per_m3");
  positive(cell_length, "cell_length_m");
  positive(lambda_p, "lambda_p_m");
  positive(lambda_c, "lambda_c_m");
  positive(lambda_lo, "f_lo_hz");
  positive(atom_mass, "atom_mass_kg");
  positive(probe_power_in, "probe_power_in_w");
  if (temperature < 0.0)
    throw ConfigError("atomic.temperature_k must be nonnegative");
  if (!(pd_quantum_efficiency > 0.0 && pd_quantum_efficiency <= 1.0))
    throw ConfigError("atomic.pd_quantum_efficiency must be in (0, 1]");
  for (double d : {delta_p, delta_c, delta_lo})
    if (!std::isfinite(d)) throw ConfigError("atomic detunings must be finite");
}

void ReceiverChain::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("receiver_chain.") + name + " must be strictly positive");
  };
  positive(r_t, "r_t_ohm");
  positive(z_in, "z_in_ohm");
  positive(r_s, "r_s_ohm");
  positive(r_l, "r_l_ohm");
  if (i_n_tia < 0.0 || v_n_tia < 0.0)
    throw ConfigError("receiver_chain noise densities must be nonnegative");
}

void LinkConfig::validate() const {
  if (!(f_if > 0.0)) throw ConfigError("link.f_if_hz must be strictly positive");
  if (!(distance > 0.0)) throw ConfigError("link.distance_m must be strictly positive");
  if (!(symbol_period > 0.0)) throw ConfigError("link.symbol_period_s must be strictly positive");
  if (!(rk_step > 0.0)) throw ConfigError("link.rk_step_s must be strictly positive");
  if (!(v_ref > 0.0)) throw ConfigError("link.v_ref_v must be strictly positive");
  if (!(bandwidth > 0.0)) throw ConfigError("link.bandwidth_hz must be strictly positive");
  if (modulation_order != 4 && modulation_order != 16 && modulation_order != 64)
    throw ConfigError("link.modulation_order must be 4, 16 or 64");
  if (n_symbols < 1) throw ConfigError("link.n_symbols must be >= 1");
  if (pulse_shape != "sinc" && pulse_shape != "rrc")
    throw ConfigError("link.pulse_shape must be \"sinc\" or \"rrc\"");
}

namespace {

class SectionReader {
 public:
  SectionReader(const json& j, std::string section)
      : obj_(j.at(section)), section_(std::move(section)) {
    if (!obj_.is_object())
      throw ConfigError("section '" + section_ + "' must be a JSON object");
  }

  double num(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end())
      throw ConfigError("missing key '" + section_ + "." + key + "'");
    if (!it->is_number())
      throw ConfigError("key '" + section_ + "." + key + "' must be a number");
    return it->get<double>();
  }

  double num_or(const char* key, double fallback) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return fallback;
    if (!it->is_number())
      throw ConfigError("key '" + section_ + "." + key + "' must be a number");
    return it->get<double>();
  }

  std::string str_or(const char* key, std::string fallback) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return fallback;
    if (!it->is_string())
      throw ConfigError("key '" + section_ + "." + key + "' must be a string");
    return it->get<std::string>();
  }

  /// Fail-closed: any key we did not consume is an error.
  void reject_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError("unknown key '" + section_ + "." + it.key() +
                          "' (check spelling and units suffix)");
  }

 private:
  const json& obj_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace

Config parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "atomic" && key != "receiver_chain" && key != "link")
      throw ConfigError("unknown top-level section '" + key + "'");
  }

  Config cfg;

  SectionReader a(j, "atomic");
  cfg.atomic.omega_p = k::two_pi * a.num("omega_p_hz");
  cfg.atomic.omega_c = k::two_pi * a.num("omega_c_hz");
  cfg.atomic.e_lo = a.num("e_lo_v_per_m");
  cfg.atomic.delta_p = k::two_pi * a.num_or("delta_p_hz", 0.0);
  cfg.atomic.delta_c = k::two_pi * a.num_or("delta_c_hz", 0.0);
  cfg.atomic.delta_lo = k::two_pi * a.num_or("delta_lo_hz", 0.0);
  cfg.atomic.gamma = k::two_pi * a.num("gamma_hz");
  cfg.atomic.gamma2 = k::two_pi * a.num("gamma2_hz");
  cfg.atomic.gamma3 = k::two_pi * a.num("gamma3_hz");
  cfg.atomic.gamma4 = k::two_pi * a.num("gamma4_hz");
  cfg.atomic.mu12 = a.num("mu12_cm");
  cfg.atomic.mu_rf = a.num("mu_rf_cm");
  cfg.atomic.n0 = a.num("n0_per_m3");
  cfg.atomic.cell_length = a.num("cell_length_m");
  cfg.atomic.lambda_p = a.num("lambda_p_m");
  cfg.atomic.lambda_c = a.num("lambda_c_m");
  cfg.atomic.lambda_lo = k::c0 / a.num("f_lo_hz");
  cfg.atomic.temperature = a.num("temperature_k");
  cfg.atomic.atom_mass = a.num("atom_mass_kg");
  cfg.atomic.probe_power_in = a.num("probe_power_in_w");
  cfg.atomic.pd_quantum_efficiency = a.num("pd_quantum_efficiency");
  a.reject_unknown();

  SectionReader c(j, "receiver_chain");
  cfg.chain.r_t = c.num("r_t_ohm");
  cfg.chain.i_n_tia = c.num("i_n_tia_a_per_sqrt_hz");
  cfg.chain.v_n_tia = c.num("v_n_tia_v_per_sqrt_hz");
  cfg.chain.z_in = c.num("z_in_ohm");
  cfg.chain.r_s = c.num("r_s_ohm");
  cfg.chain.r_l = c.num("r_l_ohm");
  cfg.chain.rin_dbc_hz = c.num("rin_dbc_per_hz");
  c.reject_unknown();

  SectionReader l(j, "link");
  cfg.link.f_if = l.num("f_if_hz");
  cfg.link.tx_power_dbm = l.num("tx_power_dbm");
  cfg.link.bs_gain_db = l.num("bs_gain_db");
  cfg.link.ue_gain_classical_db = l.num_or("ue_gain_classical_db", 1.76);
  cfg.link.distance = l.num("distance_m");
  cfg.link.symbol_period = l.num("symbol_period_s");
  cfg.link.rk_step = l.num_or("rk_step_s", 1.0e-9);
  cfg.link.v_ref = l.num_or("v_ref_v", 1.0);
  cfg.link.bandwidth = l.num("bandwidth_hz");
  cfg.link.modulation_order = static_cast<int>(l.num_or("modulation_order", 16));
  cfg.link.n_symbols = static_cast<int>(l.num_or("n_symbols", 240));
  cfg.link.pulse_shape = l.str_or("pulse_shape", "sinc");
  cfg.link.seed = static_cast<std::uint64_t>(l.num_or("seed", 1));
  l.reject_unknown();

  cfg.atomic.validate();
  cfg.chain.validate();
  cfg.link.validate();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const Config& cfg) {
  const auto& a = cfg.atomic;
  const auto& c = cfg.chain;
  const auto& l = cfg.link;
  json j;
  j["atomic"] = {
      {"omega_p_hz", a.omega_p / k::two_pi},
      {"omega_c_hz", a.omega_c / k::two_pi},
      {"e_lo_v_per_m", a.e_lo},
      {"delta_p_hz", a.delta_p / k::two_pi},
      {"delta_c_hz", a.delta_c / k::two_pi},
      {"delta_lo_hz", a.delta_lo / k::two_pi},
      {"gamma_hz", a.gamma / k::two_pi},
      {"gamma2_hz", a.gamma2 / k::two_pi},
      {"gamma3_hz", a.gamma3 / k::two_pi},
      {"gamma4_hz", a.gamma4 / k::two_pi},
      {"mu12_cm", a.mu12},
      {"mu_rf_cm", a.mu_rf},
      {"n0_per_m3", a.n0},
      {"cell_length_m", a.cell_length},
      {"lambda_p_m", a.lambda_p},
      {"lambda_c_m", a.lambda_c},
      {"f_lo_hz", k::c0 / a.lambda_lo},
      {"temperature_k", a.temperature},
      {"atom_mass_kg", a.atom_mass},
      {"probe_power_in_w", a.probe_power_in},
      {"pd_quantum_efficiency", a.pd_quantum_efficiency},
  };
  j["receiver_chain"] = {
      {"r_t_ohm", c.r_t},
      {"i_n_tia_a_per_sqrt_hz", c.i_n_tia},
      {"v_n_tia_v_per_sqrt_hz", c.v_n_tia},
      {"z_in_ohm", c.z_in},
      {"r_s_ohm", c.r_s},
      {"r_l_ohm", c.r_l},
      {"rin_dbc_per_hz", c.rin_dbc_hz},
  };
  j["link"] = {
      {"f_if_hz", l.f_if},
      {"tx_power_dbm", l.tx_power_dbm},
      {"bs_gain_db", l.bs_gain_db},
      {"ue_gain_classical_db", l.ue_gain_classical_db},
      {"distance_m", l.distance},
      {"symbol_period_s", l.symbol_period},
      {"rk_step_s", l.rk_step},
      {"v_ref_v", l.v_ref},
      {"bandwidth_hz", l.bandwidth},
      {"modulation_order", l.modulation_order},
      {"n_symbols", l.n_symbols},
      {"pulse_shape", l.pulse_shape},
      {"seed", l.seed},
  };
  return j.dump(2);
}

}  // namespace rydex
