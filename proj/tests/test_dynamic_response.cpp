#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rydex/atomic_core.hpp"
#include "rydex/dynamic_response.hpp"
#include "rydex/errors.hpp"
#include "rydex/link_sim.hpp"
#include "test_support.hpp"

using namespace rydex;
using testsup::committed_config;
using testsup::rel_err;
namespace kc = rydex::constants;

namespace {

struct Fixture {
  LiouvillianSystem sys;
  SteadyState ss;
  OperatingPoint op;
  Fixture()
      : sys(build_liouvillian(committed_config().atomic)),
        ss(steady_state(sys)),
        op(OperatingPoint::make(committed_config().atomic, 1)) {}
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_CASE("transfer function at s = 0 equals the explicit inverse formula") {
  const auto& f = fx();
  const cplx got = transfer_T(f.sys, f.ss, 3, 4, cplx{0.0, 0.0});
  const Vec15c sol = f.sys.c0.partialPivLu().solve(f.sys.f34 * f.ss.z0);
  const cplx want = -(f.sys.rho21_row * sol).value();
  CHECK(rel_err(got, want) < 1e-12);
}

TEST_CASE("transfer function refuses to evaluate on a pole") {
  const auto& f = fx();
  Eigen::ComplexEigenSolver<Mat15c> es(f.sys.c0, false);
  CHECK_THROWS_AS(transfer_T(f.sys, f.ss, 3, 4, es.eigenvalues()(3)), PoleHit);
}

TEST_CASE("laser-noise channels evaluate for all off-diagonal index pairs") {
  const auto& f = fx();
  const cplx s(0.0, kc::two_pi * 1.0e5);
  for (auto [k, l] : {std::pair{1, 2}, {2, 1}, {2, 3}, {3, 2}}) {
    const cplx v = transfer_T(f.sys, f.ss, k, l, s);
    CHECK(std::isfinite(v.real()));
    CHECK(std::abs(v) > 0.0);
  }
}

TEST_CASE("DC in-phase gain matches a static LO-field finite difference") {
  const AtomicParams& p = committed_config().atomic;
  const auto& f = fx();
  const cplx gi0 = 0.5 * (transfer_T(f.sys, f.ss, 3, 4, cplx{0.0, 0.0}) +
                          transfer_T(f.sys, f.ss, 4, 3, cplx{0.0, 0.0}));
  // A real static signal Rabi frequency is indistinguishable from an LO
  // shift, so G_I(0) must equal d(rho21)/d(Omega_LO).
  const double d_omega = 1e-4 * p.omega_lo();
  auto rho21_at = [&p](double e_lo) {
    AtomicParams q = p;
    q.e_lo = e_lo;
    return steady_state(build_liouvillian(q)).rho(1, 0);
  };
  const double de = d_omega * kc::hbar / p.mu_rf;
  const cplx fd =
      (rho21_at(p.e_lo + de) - rho21_at(p.e_lo - de)) / (2.0 * d_omega);
  CHECK(rel_err(gi0, fd) < 1e-4);
}

TEST_CASE("poles come in conjugate pairs") {
  const auto& poles = fx().op.poles();
  for (const cplx& p : poles) {
    if (std::abs(p.imag()) < 1e-3 * std::abs(p.real())) continue;
    double best = 1e300;
    for (const cplx& q : poles)
      best = std::min(best, std::abs(q - std::conj(p)));
    CHECK(best < 1e-8 * std::abs(p));
  }
}

TEST_CASE("gain split reassembles exactly and vanishing asymmetry kills G_Q") {
  const auto& f = fx();
  for (double fr : {1e3, 5e4, 1.5e5, 2e6}) {
    const auto g = gains_iq(f.sys, f.ss, cplx(0.0, kc::two_pi * fr));
    CHECK(std::abs(g.g_i1 + im * g.g_i2 - g.g_i) < 1e-12 * std::abs(g.g_i));
    CHECK(std::abs(g.g_q1 + im * g.g_q2 - g.g_q) < 1e-12 * std::abs(g.g_i));
    // G_Q = i/2 (T43 - T34) by construction.
    const cplx t34 = transfer_T(f.sys, f.ss, 3, 4, cplx(0.0, kc::two_pi * fr));
    const cplx t43 = transfer_T(f.sys, f.ss, 4, 3, cplx(0.0, kc::two_pi * fr));
    CHECK(std::abs(g.g_q - 0.5 * im * (t43 - t34)) <
          1e-12 * std::abs(g.g_i));
  }
}

TEST_CASE("imaginary in-phase filter dominates near resonance") {
  const auto& f = fx();
  const auto g = gains_iq(f.sys, f.ss, cplx(0.0, kc::two_pi * 1.5e5));
  const double others = std::max(
      {std::abs(g.g_i1), std::abs(g.g_q1), std::abs(g.g_q2)});
  CHECK(std::abs(g.g_i2) > 10.0 * others);
}

TEST_CASE("real realization reproduces the complex-path filters") {
  const auto& f = fx();
  const auto& rr = f.op.slice(0).rr;
  for (double fr : {1e3, 1.5e5, 8e5, 3e6}) {
    const cplx s(0.0, kc::two_pi * fr);
    const auto g = gains_iq(f.sys, f.ss, s);
    const cplx gi2_real = realization_tf(rr.a, rr.b_i, rr.c_im, s);
    const cplx gi1_real = realization_tf(rr.a, rr.b_i, rr.c_re, s);
    const cplx gq2_real = realization_tf(rr.a, rr.b_q, rr.c_im, s);
    CHECK(rel_err(gi2_real, g.g_i2) < 1e-9);
    CHECK(std::abs(gi1_real - g.g_i1) < 1e-9 * std::abs(g.g_i2));
    CHECK(std::abs(gq2_real - g.g_q2) < 1e-9 * std::abs(g.g_i2));
  }
}

TEST_CASE("real realization has the same poles as the complex reduction") {
  const auto& f = fx();
  Eigen::EigenSolver<Mat15d> es(f.op.slice(0).rr.a);
  for (int i = 0; i < 15; ++i) {
    const cplx lam = es.eigenvalues()(i);
    double best = 1e300;
    for (const cplx& p : f.op.poles()) best = std::min(best, std::abs(lam - p));
    CHECK(best < 1e-6 * std::abs(lam));
  }
}

TEST_CASE("transconductance scales linearly with quantum efficiency") {
  AtomicParams p = committed_config().atomic;
  const auto base = OperatingPoint::make(p, 1);
  p.pd_quantum_efficiency = p.pd_quantum_efficiency / 8.0;
  const auto low = OperatingPoint::make(p, 1);
  const cplx s(0.0, kc::two_pi * 1.5e5);
  CHECK(rel_err(low.gq(s) * 8.0, base.gq(s)) < 1e-12);
}

TEST_CASE("transconductance is linear in atomic density at fixed photocurrent") {
  AtomicParams p = committed_config().atomic;
  const auto base = OperatingPoint::make(p, 1);
  AtomicParams q = p;
  q.n0 = 2.0 * p.n0;
  const auto dbl = OperatingPoint::make(q, 1);
  const cplx s(0.0, kc::two_pi * 1.5e5);
  // The explicit density factor is exactly linear; the photocurrent factor
  // tracks the transmission change.
  const cplx normalized_base = base.gq(s) / base.i_ph_bar();
  const cplx normalized_dbl = dbl.gq(s) / dbl.i_ph_bar();
  CHECK(rel_err(normalized_dbl, 2.0 * normalized_base) < 1e-10);
}

TEST_CASE("DC transconductance lands near the reference value") {
  const double gq0 = fx().op.gq(cplx{0.0, 0.0}).real();
  CHECK(gq0 < 0.0);
  CHECK(std::abs(gq0) > 1.4e-3 / 2.0);
  CHECK(std::abs(gq0) < 1.4e-3 * 2.0);
}

TEST_CASE("transconductance has conjugate symmetry on the imaginary axis") {
  const auto& op = fx().op;
  for (double fr : {1e4, 1.5e5, 2e6}) {
    const cplx up = op.gq(cplx(0.0, kc::two_pi * fr));
    const cplx dn = op.gq(cplx(0.0, -kc::two_pi * fr));
    CHECK(std::abs(dn - std::conj(up)) < 1e-12 * std::abs(up));
  }
}

TEST_CASE("intrinsic gain bridge identity links the two code paths") {
  const auto& op = fx().op;
  const AtomicParams& p = committed_config().atomic;
  const double bridge = kc::hbar * p.omega_p_optical() /
                        (kc::q_e * p.pd_quantum_efficiency) * kc::hbar /
                        p.mu_rf;
  Rng rng(11, 0);
  for (int i = 0; i < 20; ++i) {
    const double fr = std::pow(10.0, 2.0 + 5.0 * rng.uniform());
    const cplx s(0.0, kc::two_pi * fr);
    CHECK(rel_err(op.kappa(s), bridge * op.gq_total(s)) < 1e-10);
  }
}

TEST_CASE("intrinsic gain at DC agrees with the sweep-slope route") {
  const auto& op = fx().op;
  const double fd = kappa_dc_fd(committed_config().atomic);
  const double tf = op.kappa(cplx{0.0, 0.0}).real();
  CHECK(rel_err(tf, fd) < 0.01);
  CHECK(std::abs(tf) > 8.67e-13 / 2.0);
  CHECK(std::abs(tf) < 8.67e-13 * 2.0);
}

TEST_CASE("pole-zero structure of the committed response") {
  const auto& op = fx().op;
  const auto pz = pole_zero(op);
  CHECK(pz.poles.size() == 15);
  CHECK(pz.zeros.size() == 13);
  for (const cplx& p : pz.poles) CHECK(p.real() < 0.0);
  CHECK(pz.dc_gain == doctest::Approx(op.gq(cplx{0.0, 0.0}).real()));
  // Rational reconstruction against sampled values.
  for (int i = 0; i < 40; ++i) {
    const double fr = 1e2 * std::pow(1e5, i / 39.0);
    const cplx s(0.0, kc::two_pi * fr);
    CHECK(rel_err(eval_rational(pz, s), op.gq(s)) < 1e-6);
  }
}

TEST_CASE("impulse response integrates to the step response") {
  const auto& op = fx().op;
  const double dt = 0.5e-9;
  const auto tr = impulse_step_response(op, dt, 40001);  // 20 us
  double acc = 0.0;
  for (size_t i = 1; i < tr.t.size(); ++i) {
    acc += 0.5 * dt * (tr.impulse[i - 1] + tr.impulse[i]);
    if (i % 4000 == 0)
      CHECK(std::abs(acc - tr.step[i]) < 1e-6 * std::abs(tr.step.back()));
  }
}

TEST_CASE("step response settles to the DC gain") {
  const auto& op = fx().op;
  // Long enough for the slow population tail to die out.
  const auto tr = impulse_step_response(op, 2e-8, 20001);  // 400 us
  CHECK(rel_err(tr.step.back(), op.gq(cplx{0.0, 0.0}).real()) < 1e-4);
}

TEST_CASE("rise time and bandwidth of the committed response") {
  const auto tr = impulse_step_response(fx().op, 5e-9, 12000);
  CHECK(tr.rise_time > 2.45e-6 * 0.75);
  CHECK(tr.rise_time < 2.45e-6 * 1.25);
  CHECK(tr.bw3db_hz == doctest::Approx(0.35 / tr.rise_time));
}

TEST_CASE("impulse response decays with the slowest pole") {
  const auto& op = fx().op;
  double slowest = -1e300;
  for (const cplx& p : op.poles()) slowest = std::max(slowest, p.real());
  const double t_end = 20.0 / std::abs(slowest);
  const double dt = t_end / 20000;
  const auto tr = impulse_step_response(op, dt, 20001);
  double peak = 0.0;
  for (double v : tr.impulse) peak = std::max(peak, std::abs(v));
  CHECK(std::abs(tr.impulse.back()) < 1e-6 * peak);
}

TEST_CASE("rk4 stays on the fixed point without a signal") {
  const AtomicParams& p = committed_config().atomic;
  const auto ss = steady_state(build_liouvillian(p));
  const auto traj = rk4_master_solver(
      p, [](double) { return cplx{0.0, 0.0}; }, 20e-6, 1e-9, 2000, &ss.rho);
  for (const auto& rho : traj.rho)
    CHECK((rho - ss.rho).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rk4 rejects steps beyond the stability bound") {
  const AtomicParams& p = committed_config().atomic;
  CHECK_THROWS_AS(rk4_master_solver(
                      p, [](double) { return cplx{0.0, 0.0}; }, 1e-6, 1e-6),
                  Error);
}

TEST_CASE("rk4 single-tone response amplitude matches the intrinsic gain") {
  const AtomicParams& p = committed_config().atomic;
  const auto& op = fx().op;
  const double f_if = 1.5e5;
  const double w_sig = p.omega_lo() * 1e-3;
  const auto traj = rk4_master_solver(
      p,
      [&](double t) { return w_sig * std::polar(1.0, kc::two_pi * f_if * t); },
      120e-6, 1e-9, 10);
  // Amplitude of the settled oscillation in P(t).
  double pmin = 1e300, pmax = -1e300;
  const size_t tail = traj.p.size() / 2;
  for (size_t i = tail; i < traj.p.size(); ++i) {
    pmin = std::min(pmin, traj.p[i]);
    pmax = std::max(pmax, traj.p[i]);
  }
  const double amp = 0.5 * (pmax - pmin);
  const double expected = std::abs(op.kappa(cplx(0.0, kc::two_pi * f_if))) * w_sig;
  CHECK(rel_err(amp, expected) < 0.03);
}

TEST_CASE("rk4 converges at fourth order under step halving") {
  const AtomicParams& p = committed_config().atomic;
  const double w0 = p.omega_lo() * 1e-2;
  auto sig = [&](double t) {
    return w0 * std::polar(1.0, kc::two_pi * 1.5e5 * t);
  };
  Mat4c ground = Mat4c::Zero();
  ground(0, 0) = 1.0;
  const auto a = rk4_master_solver(p, sig, 5e-6, 1e-9, 5000, &ground);
  const auto b = rk4_master_solver(p, sig, 5e-6, 0.5e-9, 10000, &ground);
  CHECK((a.rho.back() - b.rho.back()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("photocurrent spectrum honors the image-frequency rule") {
  const auto& op = fx().op;
  const double w0 = kc::two_pi * 1.5e5;
  // Symmetric two-point grid carrying a single real tone.
  const std::vector<double> grid = {-w0, w0};
  const cplx e0{2.4e-3, 1.1e-3};
  const std::vector<cplx> spec = {std::conj(e0), e0};
  const auto out = photocurrent_response(op, grid, spec);
  const cplx expected = op.gq_total(cplx(0.0, w0)) * 0.5 * (e0 + e0);
  CHECK(rel_err(out[1], expected) < 1e-12);

  // Upper-sideband-only input: the real-signal spectrum at +w equals half
  // the analytic-signal convolution.
  const std::vector<cplx> usb = {cplx{0.0, 0.0}, e0};
  const auto out_usb = photocurrent_response(op, grid, usb);
  const cplx analytic = op.gq_total(cplx(0.0, w0)) * e0;
  CHECK(rel_err(2.0 * out_usb[1], analytic) < 1e-12);
}

TEST_CASE("photocurrent spectrum rejects asymmetric grids") {
  const auto& op = fx().op;
  const std::vector<double> bad = {-1.0, 2.0};
  const std::vector<cplx> spec = {cplx{0, 0}, cplx{0, 0}};
  CHECK_THROWS_AS(photocurrent_response(op, bad, spec), GridMismatch);
}

TEST_CASE("LTI prediction doubles exactly when the field doubles") {
  auto cfg = committed_config();
  cfg.link.n_symbols = 12;
  const double e1 = cfg.atomic.e_lo * 1e-3;
  const auto r1 = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                          AtomicStageMode::lti, false, e1);
  const auto r2 = simulate_single_carrier(cfg.link, cfg.atomic, cfg.chain,
                                          AtomicStageMode::lti, false, 2.0 * e1);
  // Identical EVM: the linear pipeline scales out.
  CHECK(std::abs(r1.evm_rms - r2.evm_rms) < 1e-9);
}
