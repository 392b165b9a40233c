// Command-line front end: loads a JSON config, runs one computation and
// writes CSV/JSON artifacts plus a reproducibility manifest.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rydex/atomic_core.hpp"
#include "rydex/doppler.hpp"
#include "rydex/dynamic_response.hpp"
#include "rydex/errors.hpp"
#include "rydex/io.hpp"
#include "rydex/link_sim.hpp"
#include "rydex/noise_budget.hpp"
#include "rydex/parallel.hpp"
#include "rydex/params.hpp"

namespace fs = std::filesystem;
using namespace rydex;
namespace kc = rydex::constants;

namespace {

constexpr const char* tool_version = "rydex 1.0.0";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "both";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double temp = -1.0;  // override, Kelvin
  double fmin = 1e2;
  double fmax = 1e7;
  int points = 512;
  int nodes = 8001;
  int slices = 1;
};

struct RunContext {
  Config cfg;
  CommonOpts opts;
  RunManifest manifest;
  std::chrono::steady_clock::time_point t0;

  std::string out_path(const std::string& name) {
    fs::create_directories(opts.out_dir);
    std::string p = (fs::path(opts.out_dir) / name).string();
    manifest.outputs.push_back(p);
    return p;
  }

  bool want_csv() const { return opts.format != "json"; }

  void finish() {
    const auto t1 = std::chrono::steady_clock::now();
    manifest.duration_s = std::chrono::duration<double>(t1 - t0).count();
    fs::create_directories(opts.out_dir);
    manifest.write((fs::path(opts.out_dir) / "manifest.json").string());
  }
};

RunContext make_context(const CommonOpts& opts, const std::string& command) {
  RunContext ctx;
  ctx.opts = opts;
  ctx.cfg = load_config(opts.config_path);
  if (opts.seed_set) ctx.cfg.link.seed = opts.seed;
  if (opts.temp >= 0.0) ctx.cfg.atomic.temperature = opts.temp;
  ctx.manifest.command = command;
  ctx.manifest.config_path = opts.config_path;
  ctx.manifest.snapshot_json = config_to_json(ctx.cfg);
  ctx.manifest.seed = ctx.cfg.link.seed;
  ctx.manifest.tool_version = tool_version;
  ctx.t0 = std::chrono::steady_clock::now();
  return ctx;
}

std::vector<double> log_grid(double fmin, double fmax, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = fmin * std::pow(fmax / fmin, n > 1 ? i / double(n - 1) : 0.0);
  return g;
}

void write_json(RunContext& ctx, const std::string& name,
                const nlohmann::json& payload) {
  if (ctx.opts.format == "csv") return;
  nlohmann::json j = payload;
  j["manifest_hash"] = ctx.manifest.hash();
  j["parameters"] = nlohmann::json::parse(ctx.manifest.snapshot_json);
  std::ofstream out(ctx.out_path(name), std::ios::binary);
  out << j.dump(2) << "\n";
}

double db10(double x) { return 10.0 * std::log10(x); }

int cmd_steady(RunContext& ctx, bool dump_matrices) {
  const auto sys = build_liouvillian(ctx.cfg.atomic);
  const auto ss = steady_state(sys);
  const auto tx = probe_transmission(ss.rho, ctx.cfg.atomic);
  if (dump_matrices) {
    auto to_rows = [](const auto& m) {
      std::vector<std::vector<std::complex<double>>> rows(m.rows());
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        rows[r].resize(m.cols());
        for (Eigen::Index c = 0; c < m.cols(); ++c)
          rows[r][c] = std::complex<double>(m(r, c));
      }
      return rows;
    };
    write_matrix_csv(ctx.out_path("a0.csv"), to_rows(sys.a0));
    write_matrix_csv(ctx.out_path("c0.csv"), to_rows(sys.c0));
    write_matrix_csv(ctx.out_path("q.csv"), to_rows(sys.q.cast<cplx>()));
  }
  nlohmann::json j;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      j["rho"][r][c] = {ss.rho(r, c).real(), ss.rho(r, c).imag()};
  j["transmission"] = tx.p_bar / ctx.cfg.atomic.probe_power_in;
  j["p_bar_w"] = tx.p_bar;
  j["i_ph_bar_a"] = photocurrent_dc(ctx.cfg.atomic, tx.p_bar);
  j["alpha_per_m"] = tx.alpha[0];
  write_json(ctx, "steady.json", j);
  return 0;
}

int cmd_dcsweep(RunContext& ctx, double e_min, double e_max, int n,
                double gamma_scale) {
  std::vector<double> grid = log_grid(e_min, e_max, n);
  const auto curve = dc_sweep(ctx.cfg.atomic, grid, gamma_scale);
  CsvWriter csv({"e_lo_v_per_m", "transmission", "slope_m_per_v"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  for (const auto& pt : curve) csv.row({pt.e_lo, pt.transmission, pt.slope});
  if (ctx.want_csv()) csv.write(ctx.out_path("dcsweep.csv"));
  return 0;
}

int cmd_tf(RunContext& ctx, int k, int l) {
  const auto sys = build_liouvillian(ctx.cfg.atomic);
  const auto ss = steady_state(sys);
  const auto grid = log_grid(ctx.opts.fmin, ctx.opts.fmax, ctx.opts.points);
  CsvWriter csv({"freq_hz", "re", "im", "mag_db", "phase_deg"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  csv.comment("transfer T_" + std::to_string(k) + std::to_string(l) +
              " [1/Hz], s = i 2 pi f");
  for (double f : grid) {
    const cplx v = transfer_T(sys, ss, k, l, cplx(0.0, kc::two_pi * f));
    csv.row({f, v.real(), v.imag(), 20.0 * std::log10(std::abs(v)),
             std::arg(v) * 180.0 / M_PI});
  }
  if (ctx.want_csv()) csv.write(ctx.out_path("tf.csv"));
  return 0;
}

int cmd_gq(RunContext& ctx) {
  const auto op = OperatingPoint::make(ctx.cfg.atomic, ctx.opts.slices);
  const auto grid = log_grid(ctx.opts.fmin, ctx.opts.fmax, ctx.opts.points);
  CsvWriter csv({"freq_hz", "re_s", "im_s", "mag_db", "phase_deg"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  csv.comment("uniform-cell transconductance gq(i 2 pi f) [S]");
  for (double f : grid) {
    const cplx v = op.gq(cplx(0.0, kc::two_pi * f));
    csv.row({f, v.real(), v.imag(), 20.0 * std::log10(std::abs(v)),
             std::arg(v) * 180.0 / M_PI});
  }
  if (ctx.want_csv()) csv.write(ctx.out_path("gq.csv"));
  nlohmann::json j;
  j["gq_dc_s"] = op.gq(cplx(0.0, 0.0)).real();
  j["kappa_dc_w_per_hz"] = op.kappa(cplx(0.0, 0.0)).real();
  j["p_bar_w"] = op.p_bar();
  j["i_ph_bar_a"] = op.i_ph_bar();
  write_json(ctx, "gq.json", j);
  return 0;
}

int cmd_impulse(RunContext& ctx, double dt, int n) {
  const auto op = OperatingPoint::make(ctx.cfg.atomic, 1);
  const auto tr = impulse_step_response(op, dt, n);
  CsvWriter csv({"t_s", "impulse_s_per_s", "step_s"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  for (size_t i = 0; i < tr.t.size(); ++i)
    csv.row({tr.t[i], tr.impulse[i], tr.step[i]});
  if (ctx.want_csv()) csv.write(ctx.out_path("impulse.csv"));
  nlohmann::json j;
  j["rise_time_s"] = tr.rise_time;
  j["bw3db_hz"] = tr.bw3db_hz;
  write_json(ctx, "impulse.json", j);
  return 0;
}

int cmd_pz(RunContext& ctx) {
  const auto op = OperatingPoint::make(ctx.cfg.atomic, 1);
  const auto pz = pole_zero(op);
  CsvWriter csv({"kind", "re_hz", "im_hz"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  csv.comment("poles/zeros normalized by 2 pi");
  for (const auto& p : pz.poles)
    csv.row_mixed({"pole", format_double(p.real() / kc::two_pi),
                   format_double(p.imag() / kc::two_pi)});
  for (const auto& z : pz.zeros)
    csv.row_mixed({"zero", format_double(z.real() / kc::two_pi),
                   format_double(z.imag() / kc::two_pi)});
  if (ctx.want_csv()) csv.write(ctx.out_path("pz.csv"));
  nlohmann::json j;
  j["n_poles"] = pz.poles.size();
  j["n_zeros"] = pz.zeros.size();
  j["dc_gain_s"] = pz.dc_gain;
  write_json(ctx, "pz.json", j);
  return 0;
}

int cmd_doppler_tf(RunContext& ctx, int k, int l) {
  const auto sys = build_liouvillian(ctx.cfg.atomic);
  const auto ss = steady_state(sys);
  const auto grid = log_grid(ctx.opts.fmin, ctx.opts.fmax, ctx.opts.points);
  CsvWriter csv({"freq_hz", "method", "re", "im", "mag_db", "phase_deg"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  std::vector<cplx> numeric(grid.size()), analytic(grid.size());
  std::vector<char> analytic_ok(grid.size(), 1);
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    const cplx s(0.0, kc::two_pi * grid[i]);
    numeric[i] = doppler_transfer_numeric(sys, k, l, s, ctx.opts.nodes);
    try {
      analytic[i] = doppler_transfer_analytic(sys, ss, k, l, s);
    } catch (const IllConditioned&) {
      analytic_ok[i] = 0;  // keep the numeric value for this point
    }
  });
  for (size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::pair<const char*, cplx>> rows = {{"numeric", numeric[i]}};
    if (analytic_ok[i]) rows.emplace_back("analytic", analytic[i]);
    for (const auto& [m, v] : rows)
      csv.row_mixed({format_double(grid[i]), m, format_double(v.real()),
                     format_double(v.imag()),
                     format_double(20.0 * std::log10(std::abs(v))),
                     format_double(std::arg(v) * 180.0 / M_PI)});
  }
  if (ctx.want_csv()) csv.write(ctx.out_path("doppler_tf.csv"));
  return 0;
}

int cmd_noise(RunContext& ctx) {
  const auto& p = ctx.cfg.atomic;
  const auto op = OperatingPoint::make(p, 1);
  const double gq_if =
      std::abs(op.gq(cplx(0.0, kc::two_pi * ctx.cfg.link.f_if)));
  const double bbr = bbr_current_psd(gq_if, p);
  const auto psds =
      internal_noise_psds(ctx.cfg.chain, op.i_ph_bar(), p.temperature, bbr);
  const auto nf = noise_factors(ctx.cfg.chain, p.cell_length * gq_if,
                                psds.total(), p.lambda_lo, p.temperature);
  nlohmann::json j;
  j["photocurrent_psd_a2_per_hz"] = {
      {"bbr", psds.bbr},
      {"shot", psds.shot},
      {"rs_thermal", psds.rs_thermal},
      {"rin", psds.rin},
      {"total", psds.total()},
  };
  j["tia_output_psd_w_per_hz"] = {
      {"bbr", tia_output_psd(psds.bbr, ctx.cfg.chain)},
      {"shot", tia_output_psd(psds.shot, ctx.cfg.chain)},
      {"rs_thermal", tia_output_psd(psds.rs_thermal, ctx.cfg.chain)},
      {"rin", tia_output_psd(psds.rin, ctx.cfg.chain)},
      {"circuit_thermal", circuit_thermal_psd(ctx.cfg.chain, p.temperature)},
  };
  j["tia_output_psd_dbm_per_hz_double_sided"] = {
      {"total_injected",
       db10(tia_output_psd(psds.total(), ctx.cfg.chain) / 1e-3)},
      {"circuit_thermal",
       db10(circuit_thermal_psd(ctx.cfg.chain, p.temperature) / 1e-3)},
  };
  j["noise_factors"] = {
      {"f_q", nf.f_q},         {"f_q_db", db10(nf.f_q)},
      {"g_q", nf.g_q},         {"g_q_db", db10(nf.g_q)},
      {"f_tia", nf.f_tia},     {"f_tia_db", db10(nf.f_tia)},
      {"g_tia", nf.g_tia},     {"g_tia_db", db10(nf.g_tia)},
      {"f_total", nf.f_total}, {"f_total_db", db10(nf.f_total)},
      {"g_total", nf.g_total},
  };
  j["gq_at_if_s"] = gq_if;
  j["i_ph_bar_a"] = op.i_ph_bar();
  write_json(ctx, "noise.json", j);
  return 0;
}

int cmd_nf_sweep(RunContext& ctx, double rs_min, double rs_max, int n) {
  const auto& p = ctx.cfg.atomic;
  const auto op = OperatingPoint::make(p, 1);
  const double gq_if =
      std::abs(op.gq(cplx(0.0, kc::two_pi * ctx.cfg.link.f_if)));
  const double bbr = bbr_current_psd(gq_if, p);
  CsvWriter csv(
      {"r_s_ohm", "f_q_db", "f_tia_db", "f_total_db", "g_q_db", "g_tia_db"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  for (double rs : log_grid(rs_min, rs_max, n)) {
    ReceiverChain chain = ctx.cfg.chain;
    chain.r_s = rs;
    const auto psds =
        internal_noise_psds(chain, op.i_ph_bar(), p.temperature, bbr);
    const auto nf = noise_factors(chain, p.cell_length * gq_if, psds.total(),
                                  p.lambda_lo, p.temperature);
    csv.row({rs, db10(nf.f_q), db10(nf.f_tia), db10(nf.f_total), db10(nf.g_q),
             db10(nf.g_tia)});
  }
  if (ctx.want_csv()) csv.write(ctx.out_path("nf_sweep.csv"));
  return 0;
}

int cmd_sensitivity(RunContext& ctx, double zeta_override, bool geometric) {
  const auto& p = ctx.cfg.atomic;
  const double zeta = geometric
                          ? coherence_factor(p.cell_length / p.lambda_lo)
                          : zeta_override;
  const auto s = snr_bound_and_sensitivity(1.0, p.f_lo(), p.temperature, zeta);
  nlohmann::json j;
  j["e_i_min_v_per_m_sqrt_hz"] = s.e_i_min;
  j["e_i_min_pv_per_cm_sqrt_hz"] = s.e_i_min * 1e10;
  j["zeta"] = zeta;
  j["temperature_k"] = p.temperature;
  j["f_lo_hz"] = p.f_lo();
  write_json(ctx, "sensitivity.json", j);
  std::cout << format_double(s.e_i_min) << " V m^-1 Hz^-1/2\n";
  return 0;
}

int cmd_zeta(RunContext& ctx, double ell) {
  const double z = coherence_factor(ell);
  nlohmann::json j;
  j["ell"] = ell;
  j["zeta"] = z;
  write_json(ctx, "zeta.json", j);
  std::cout << format_double(z) << "\n";
  return 0;
}

int cmd_simulate_sc(RunContext& ctx, const std::string& mode_str,
                    bool noise_off) {
  const AtomicStageMode mode =
      mode_str == "rk4" ? AtomicStageMode::rk4 : AtomicStageMode::lti;
  const auto r = simulate_single_carrier(ctx.cfg.link, ctx.cfg.atomic,
                                         ctx.cfg.chain, mode, !noise_off);
  CsvWriter wf({"t_s", "tx_i", "tx_q", "rx_i", "rx_q"});
  wf.comment("manifest_hash=" + ctx.manifest.hash());
  for (size_t i = 0; i < r.trace.t.size(); ++i)
    wf.row({r.trace.t[i], r.trace.tx_bb[i].real(), r.trace.tx_bb[i].imag(),
            r.trace.rx_bb[i].real(), r.trace.rx_bb[i].imag()});
  if (ctx.want_csv()) wf.write(ctx.out_path("waveform.csv"));

  CsvWriter cons({"sym_index", "tx_re", "tx_im", "rx_re", "rx_im"});
  cons.comment("manifest_hash=" + ctx.manifest.hash());
  for (size_t i = 0; i < r.tx_syms.size(); ++i)
    cons.row({static_cast<double>(i), r.tx_syms[i].real(), r.tx_syms[i].imag(),
              r.rx_syms[i].real(), r.rx_syms[i].imag()});
  if (ctx.want_csv()) cons.write(ctx.out_path("constellation.csv"));

  nlohmann::json j;
  j["mode"] = mode_str;
  j["noise_on"] = !noise_off;
  j["evm_rms"] = r.evm_rms;
  j["snr_db"] = r.snr_db;
  j["noise_psd_total_per_hz"] = r.noise_psd_total;
  j["noise_psd_per_hz"] = {{"bbr", r.noise.bbr},
                           {"shot", r.noise.shot},
                           {"tia", r.noise.tia},
                           {"thermal", r.noise.thermal}};
  j["equiv_input_noise_dbm_per_hz"] = r.n_eq_dbm_hz;
  j["e_sig_over_e_lo"] = r.e_sig_over_e_lo;
  write_json(ctx, "simulate_sc.json", j);
  std::cout << "snr_db " << format_double(r.snr_db) << "\n";
  return 0;
}

int cmd_mimo(RunContext& ctx, int n, int trials) {
  const auto& p = ctx.cfg.atomic;
  const auto op = OperatingPoint::make(p, 1);
  const double gq_if =
      std::abs(op.gq(cplx(0.0, kc::two_pi * ctx.cfg.link.f_if)));
  const double zeta = coherence_factor(p.cell_length / p.lambda_lo);
  const double e_n_bb = std::sqrt(8.0 * M_PI / 3.0 * kc::eta0 *
                                  spectral_radiance(p.f_lo(), p.temperature));
  const auto res = mimo_capacity(ctx.cfg.link, p, ctx.cfg.chain, gq_if, zeta,
                                 e_n_bb, op.i_ph_bar(), n, trials,
                                 ctx.cfg.link.seed);

  auto percentile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    return v[static_cast<size_t>(q * (v.size() - 1))];
  };
  CsvWriter csv({"p_t_dbm", "scheme", "receiver", "mean_capacity", "p5", "p95"});
  csv.comment("manifest_hash=" + ctx.manifest.hash());
  csv.comment("capacity in bit/s/Hz over " + std::to_string(trials) +
              " Rayleigh draws");
  auto emit = [&](const char* scheme, const char* rx,
                  const std::vector<MimoTrialResult>& tr, bool wf) {
    std::vector<double> v(tr.size());
    for (size_t i = 0; i < tr.size(); ++i)
      v[i] = wf ? tr[i].cap_waterfill : tr[i].cap_equal;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    csv.row_mixed({format_double(ctx.cfg.link.tx_power_dbm), scheme, rx,
                   format_double(mean), format_double(percentile(v, 0.05)),
                   format_double(percentile(v, 0.95))});
  };
  emit("svd_waterfill", "quantum", res.quantum, true);
  emit("equal", "quantum", res.quantum, false);
  emit("svd_waterfill", "classical_mc", res.classical_mc, true);
  emit("equal", "classical_mc", res.classical_mc, false);
  if (ctx.want_csv()) csv.write(ctx.out_path("mimo_capacity.csv"));

  nlohmann::json j;
  j["mean_quantum_waterfill"] = res.mean_quantum_wf;
  j["mean_quantum_equal"] = res.mean_quantum_eq;
  j["mean_classical_mc_waterfill"] = res.mean_classical_wf;
  j["mean_classical_mc_equal"] = res.mean_classical_eq;
  j["snr_quantum_db"] = res.snr_quantum_db;
  j["snr_classical_db"] = res.snr_classical_db;
  write_json(ctx, "mimo_capacity.json", j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg atomic RF receiver simulation toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  app.add_option("--config", opts.config_path, "JSON config file")->required();
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--format", opts.format, "csv|json|both");
  auto* seed_opt = app.add_option("--seed", opts.seed, "RNG seed override");
  app.add_option("--temp", opts.temp, "temperature override [K]");
  app.add_option("--fmin", opts.fmin, "sweep start [Hz]");
  app.add_option("--fmax", opts.fmax, "sweep end [Hz]");
  app.add_option("--points", opts.points, "sweep point count");
  app.add_option("--nodes", opts.nodes, "velocity quadrature nodes");
  app.add_option("--slices", opts.slices, "probe attenuation slices");

  auto* c_steady =
      app.add_subcommand("steady", "steady state and transmission");
  bool dump_matrices = false;
  c_steady->add_flag("--dump-matrices", dump_matrices,
                     "export evolution matrices as re,im CSV");

  auto* c_dc = app.add_subcommand("dcsweep", "transmission vs LO field");
  double e_min = 2e-3, e_max = 0.4, gamma_scale = 1.0;
  int dc_points = 60;
  c_dc->add_option("--emin", e_min, "grid start [V/m]");
  c_dc->add_option("--emax", e_max, "grid end [V/m]");
  c_dc->add_option("--epoints", dc_points, "grid size");
  c_dc->add_option("--gamma-scale", gamma_scale, "scales gamma3 and gamma4");

  auto* c_tf = app.add_subcommand("tf", "small-signal transfer function");
  int tf_k = 3, tf_l = 4;
  c_tf->add_option("--k", tf_k, "row level index (1-4)");
  c_tf->add_option("--l", tf_l, "column level index (1-4)");

  auto* c_gq = app.add_subcommand("gq", "quantum transconductance spectrum");

  auto* c_imp = app.add_subcommand("impulse", "impulse and step response");
  double imp_dt = 5e-9;
  int imp_n = 8000;
  c_imp->add_option("--dt", imp_dt, "time step [s]");
  c_imp->add_option("--n", imp_n, "sample count");

  auto* c_pz = app.add_subcommand("pz", "pole-zero map of gq");

  auto* c_dtf =
      app.add_subcommand("doppler-tf", "Doppler-averaged transfer function");
  int dtf_k = 3, dtf_l = 4;
  c_dtf->add_option("--k", dtf_k, "row level index");
  c_dtf->add_option("--l", dtf_l, "column level index");

  auto* c_noise = app.add_subcommand("noise", "noise budget at the IF");

  auto* c_nf =
      app.add_subcommand("nf-sweep", "noise factors vs bias resistor");
  double rs_min = 100.0, rs_max = 1e5;
  int rs_points = 50;
  c_nf->add_option("--rsmin", rs_min, "sweep start [Ohm]");
  c_nf->add_option("--rsmax", rs_max, "sweep end [Ohm]");
  c_nf->add_option("--rspoints", rs_points, "sweep size");

  auto* c_sens = app.add_subcommand("sensitivity", "BBR sensitivity bound");
  double zeta_override = 1.0;
  bool sens_geometric = false;
  c_sens->add_option("--zeta", zeta_override, "coherence factor (default 1)");
  c_sens->add_flag("--geometric", sens_geometric,
                   "use the cell geometry's coherence factor");

  auto* c_zeta = app.add_subcommand("zeta", "BBR coherence factor");
  double ell = 1.0;
  c_zeta->add_option("--ell", ell, "cell length / LO wavelength")->required();

  auto* c_sc =
      app.add_subcommand("simulate-sc", "single-carrier waveform run");
  std::string sc_mode = "rk4";
  bool sc_noise_off = false;
  c_sc->add_option("--mode", sc_mode, "lti|rk4");
  c_sc->add_flag("--noise-off", sc_noise_off, "disable noise injection");

  auto* c_mimo =
      app.add_subcommand("mimo-capacity", "MIMO capacity Monte Carlo");
  int mimo_n = 8, mimo_trials = 200;
  c_mimo->add_option("--antennas", mimo_n, "array size");
  c_mimo->add_option("--trials", mimo_trials, "Monte Carlo trials");

  // Global options may appear after the subcommand name.
  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  opts.seed_set = seed_opt->count() > 0;

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    RunContext ctx = make_context(opts, name);
    int rc = 1;
    if (c_steady->parsed()) rc = cmd_steady(ctx, dump_matrices);
    else if (c_dc->parsed()) rc = cmd_dcsweep(ctx, e_min, e_max, dc_points, gamma_scale);
    else if (c_tf->parsed()) rc = cmd_tf(ctx, tf_k, tf_l);
    else if (c_gq->parsed()) rc = cmd_gq(ctx);
    else if (c_imp->parsed()) rc = cmd_impulse(ctx, imp_dt, imp_n);
    else if (c_pz->parsed()) rc = cmd_pz(ctx);
    else if (c_dtf->parsed()) rc = cmd_doppler_tf(ctx, dtf_k, dtf_l);
    else if (c_noise->parsed()) rc = cmd_noise(ctx);
    else if (c_nf->parsed()) rc = cmd_nf_sweep(ctx, rs_min, rs_max, rs_points);
    else if (c_sens->parsed()) rc = cmd_sensitivity(ctx, zeta_override, sens_geometric);
    else if (c_zeta->parsed()) rc = cmd_zeta(ctx, ell);
    else if (c_sc->parsed()) rc = cmd_simulate_sc(ctx, sc_mode, sc_noise_off);
    else if (c_mimo->parsed()) rc = cmd_mimo(ctx, mimo_n, mimo_trials);
    ctx.finish();
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
