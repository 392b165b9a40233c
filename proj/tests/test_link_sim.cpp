#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rydex/dynamic_response.hpp"
#include "rydex/errors.hpp"
#include "rydex/link_sim.hpp"
#include "rydex/noise_budget.hpp"
#include "test_support.hpp"

using namespace rydex;
using testsup::committed_config;
using testsup::rel_err;
namespace kc = rydex::constants;

TEST_CASE("line-of-sight field follows spherical spreading") {
  LinkConfig cfg = committed_config().link;
  const double e1 = los_field_strength(cfg);
  cfg.distance *= 2.0;
  CHECK(rel_err(los_field_strength(cfg), 0.5 * e1) < 1e-14);
  cfg.tx_power_dbm = -300.0;
  CHECK(los_field_strength(cfg) < 1e-16);
  // Committed link budget: 10 dBm + 5 dB gain at 200 m.
  LinkConfig base = committed_config().link;
  const double want = std::sqrt(2.0 * kc::eta0 * 1e-3 *
                                std::pow(10.0, 1.5) /
                                (4.0 * M_PI * 200.0 * 200.0));
  CHECK(rel_err(los_field_strength(base), want) < 1e-14);
}

TEST_CASE("reference power scalings") {
  const auto& cfg = committed_config();
  const double g = 1.35e-3;
  const double p1 = qref_power(cfg.link, cfg.chain, g, cfg.atomic);
  CHECK(rel_err(qref_power(cfg.link, cfg.chain, 2.0 * g, cfg.atomic),
                0.25 * p1) < 1e-12);
  LinkConfig vr = cfg.link;
  vr.v_ref *= 2.0;
  CHECK(rel_err(qref_power(vr, cfg.chain, g, cfg.atomic), 4.0 * p1) < 1e-12);
  // Direct formula evaluation.
  const double inv = 1.0 / (2.0 * cfg.link.v_ref) * cfg.chain.r_t *
                     cfg.chain.k_c() * cfg.atomic.cell_length * g *
                     std::sqrt(8.0 * M_PI * kc::eta0 /
                               (cfg.atomic.lambda_lo * cfg.atomic.lambda_lo));
  CHECK(rel_err(p1, 1.0 / (inv * inv)) < 1e-14);
}

TEST_CASE("baseband noise components and switch-offs") {
  const auto& cfg = committed_config();
  const double g = 1.35e-3, zeta = 0.87, i_ph = 1.3e-5;
  const double e_n_bb =
      std::sqrt(8.0 * M_PI / 3.0 * kc::eta0 *
                spectral_radiance(cfg.atomic.f_lo(), 300.0));
  const auto n = baseband_noise_psd(cfg.link, cfg.chain, cfg.atomic, g, zeta,
                                    e_n_bb, i_ph);
  CHECK(n.bbr > 0.0);
  CHECK(n.shot > 0.0);
  CHECK(n.tia > 0.0);
  CHECK(n.thermal > 0.0);

  // T = 0 and dark photodiode leave only the TIA term.
  AtomicParams cold = cfg.atomic;
  cold.temperature = 0.0;
  const auto off =
      baseband_noise_psd(cfg.link, cfg.chain, cold, g, zeta, 0.0, 0.0);
  CHECK(off.bbr == 0.0);
  CHECK(off.shot == 0.0);
  CHECK(off.thermal == 0.0);
  CHECK(off.tia > 0.0);
}

TEST_CASE("baseband thermal term tracks the TIA-output route") {
  // The equivalent-baseband thermal term equals the bias-resistor part of
  // the TIA-output thermal PSD mapped to normalized baseband units with the
  // current-divider factor applied.
  const auto& cfg = committed_config();
  const auto n = baseband_noise_psd(cfg.link, cfg.chain, cfg.atomic, 1.35e-3,
                                    0.87, 1e-9, 1.3e-5);
  const double rs_part_out =
      cfg.chain.r_t * cfg.chain.r_t / (2.0 * cfg.chain.r_l) * 4.0 *
      kc::k_boltzmann * cfg.atomic.temperature / cfg.chain.r_s;
  const double mapped = rs_part_out * cfg.chain.r_l /
                        (cfg.link.v_ref * cfg.link.v_ref) * cfg.chain.k_c() *
                        cfg.chain.k_c();
  CHECK(rel_err(n.thermal, mapped) < 1e-12);
}

TEST_CASE("bbr baseband term is consistent with the photocurrent PSD") {
  const auto& cfg = committed_config();
  const double g = 1.35e-3;
  const double zeta =
      coherence_factor(cfg.atomic.cell_length / cfg.atomic.lambda_lo);
  const double e_n_bb = std::sqrt(
      8.0 * M_PI / 3.0 * kc::eta0 *
      spectral_radiance(cfg.atomic.f_lo(), cfg.atomic.temperature));
  const auto n = baseband_noise_psd(cfg.link, cfg.chain, cfg.atomic, g, zeta,
                                    e_n_bb, 0.0);
  const double current_psd = bbr_current_psd(g, cfg.atomic);
  const double rtkc = cfg.chain.r_t * cfg.chain.k_c();
  CHECK(rel_err(n.bbr,
                current_psd * rtkc * rtkc /
                    (cfg.link.v_ref * cfg.link.v_ref)) < 1e-12);
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42, 7), b(42, 7), c(42, 8);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal &= (x == y);
    any_diff |= (x != z);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("complex gaussian noise has the requested variance") {
  Rng rng(5, 0);
  const double sigma = 3.7e-4;
  double acc = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) acc += std::norm(sigma * rng.cgaussian());
  CHECK(std::abs(acc / n - sigma * sigma) < 0.01 * sigma * sigma);
}

TEST_CASE("discrete channel step is exact without noise") {
  Rng rng(1, 0);
  Eigen::MatrixXcd h(2, 2);
  h << cplx(1, 0.3), cplx(-0.2, 0.1), cplx(0.5, -0.7), cplx(0.1, 0.9);
  Eigen::VectorXcd x(2);
  x << cplx(1, -1), cplx(0.2, 0.4);
  const auto y = discrete_channel_step(x, h, 2.5, 0.0, rng);
  CHECK((y - 2.5 * h * x).norm() == 0.0);
}

TEST_CASE("single-tap multipath equals the flat channel") {
  Rng r1(9, 0), r2(9, 0);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Random(3, 3);
  std::vector<Eigen::VectorXcd> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(Eigen::VectorXcd::Random(3));
  const auto y_mp = discrete_channel_multipath(xs, {h}, 1.7, 2e-3, r1);
  for (size_t i = 0; i < xs.size(); ++i) {
    const auto y = discrete_channel_step(xs[i], h, 1.7, 2e-3, r2);
    CHECK((y_mp[i] - y).norm() < 1e-14);
  }
}

TEST_CASE("water-filling dominates equal allocation") {
  Rng rng(123, 0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> gains(6);
    for (auto& g : gains) g = 1e-2 + 1e3 * rng.uniform() * rng.uniform();
    CHECK(waterfill_capacity(gains) >=
          equal_allocation_capacity(gains) - 1e-12);
  }
  // Vanishing SNR drives capacity to zero.
  CHECK(waterfill_capacity({1e-12, 1e-13}) < 1e-9);
  CHECK(equal_allocation_capacity({1e-12, 1e-13}) < 1e-9);
}

TEST_CASE("mutual coupling matrix becomes diagonal for wide spacing") {
  const auto far = mutual_coupling_matrix(4, 50.0);
  CHECK((far - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 2e-2);
  const auto near = mutual_coupling_matrix(4, 0.5);
  CHECK(std::abs(near(0, 1)) > 0.05);
  CHECK((near - near.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mimo capacity is seed-reproducible and ordered across schemes") {
  const auto& cfg = committed_config();
  const double gq_if = 1.35e-3, zeta = 0.87, e_n_bb = 1.2e-7, i_ph = 1.3e-5;
  const auto a = mimo_capacity(cfg.link, cfg.atomic, cfg.chain, gq_if, zeta,
                               e_n_bb, i_ph, 4, 40, 11);
  const auto b = mimo_capacity(cfg.link, cfg.atomic, cfg.chain, gq_if, zeta,
                               e_n_bb, i_ph, 4, 40, 11);
  CHECK(a.mean_quantum_wf == b.mean_quantum_wf);
  CHECK(a.mean_classical_wf == b.mean_classical_wf);
  for (int t = 0; t < 40; ++t) {
    CHECK(a.quantum[t].cap_waterfill >= a.quantum[t].cap_equal - 1e-12);
    CHECK(a.classical_mc[t].cap_waterfill >=
          a.classical_mc[t].cap_equal - 1e-12);
  }
}

TEST_CASE("mimo capacity grows with transmit power") {
  const auto& cfg = committed_config();
  LinkConfig hot = cfg.link;
  hot.tx_power_dbm += 10.0;
  const auto lo = mimo_capacity(cfg.link, cfg.atomic, cfg.chain, 1.35e-3,
                                0.87, 1.2e-7, 1.3e-5, 4, 30, 5);
  const auto hi = mimo_capacity(hot, cfg.atomic, cfg.chain, 1.35e-3, 0.87,
                                1.2e-7, 1.3e-5, 4, 30, 5);
  CHECK(hi.mean_quantum_wf > lo.mean_quantum_wf);
  CHECK(hi.mean_classical_wf > lo.mean_classical_wf);
}

TEST_CASE("transmit frames carry unit average power") {
  auto cfg = committed_config();
  cfg.link.n_symbols = 40;
  const auto r = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                         AtomicStageMode::lti, false);
  // The measured section is drawn from a frame normalized as a whole.
  double power = 0.0;
  for (const auto& s : r.tx_syms) power += std::norm(s);
  power /= r.tx_syms.size();
  CHECK(std::abs(power - 1.0) < 0.15);
}

TEST_CASE("noise injection can only lower the estimated SNR") {
  // Back the signal off so the injected noise is not buried under the
  // deterministic error floor; the ordering is then seed-robust.
  auto cfg = committed_config();
  cfg.link.n_symbols = 60;
  const double e_sig = los_field_strength(cfg.link) / 5.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    cfg.link.seed = seed;
    const auto clean =
        simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                AtomicStageMode::lti, false, e_sig);
    const auto noisy =
        simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                AtomicStageMode::lti, true, e_sig);
    CHECK(noisy.snr_db < clean.snr_db);
  }
}

TEST_CASE("waveform run is bit-reproducible for a fixed seed") {
  auto cfg = committed_config();
  cfg.link.n_symbols = 24;
  const auto a = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                         AtomicStageMode::lti, true);
  const auto b = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                         AtomicStageMode::lti, true);
  REQUIRE(a.rx_syms.size() == b.rx_syms.size());
  for (size_t i = 0; i < a.rx_syms.size(); ++i)
    CHECK(a.rx_syms[i] == b.rx_syms[i]);
  CHECK(a.snr_db == b.snr_db);
}

TEST_CASE("lti and rk4 stages agree in the small-signal regime") {
  auto cfg = committed_config();
  cfg.link.n_symbols = 16;
  const double e_small = cfg.atomic.e_lo * 1e-3;
  const auto a = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                         AtomicStageMode::lti, false, e_small);
  const auto b = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                         AtomicStageMode::rk4, false, e_small);
  CHECK(std::abs(a.snr_db - b.snr_db) < 0.5);
}

TEST_CASE("rk4 response doubles within a percent in the small-signal regime") {
  auto cfg = committed_config();
  cfg.link.n_symbols = 10;
  const double e1 = cfg.atomic.e_lo * 1e-3;
  const auto r1 = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                          AtomicStageMode::rk4, false, e1);
  const auto r2 = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                          AtomicStageMode::rk4, false,
                                          2.0 * e1);
  // EVM is scale-invariant, so identical EVM means the response doubled.
  CHECK(std::abs(r1.evm_rms - r2.evm_rms) / r1.evm_rms < 0.01);
}

TEST_CASE("ADC clipping guard trips when the reference voltage is tiny") {
  auto cfg = committed_config();
  cfg.link.n_symbols = 8;
  cfg.link.v_ref = 1e-9;
  CHECK_THROWS_AS(simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                          AtomicStageMode::lti, false),
                  ClippedADC);
}

TEST_CASE("QAM constellations have unit average power") {
  for (int order : {4, 16, 64}) {
    const auto pts = qam_constellation(order);
    REQUIRE(static_cast<int>(pts.size()) == order);
    double e = 0.0;
    for (const auto& p : pts) e += std::norm(p);
    CHECK(e / order == doctest::Approx(1.0).epsilon(1e-12));
  }
}
