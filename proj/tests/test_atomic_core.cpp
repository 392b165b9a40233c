#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rydex/atomic_core.hpp"
#include "rydex/doppler.hpp"
#include "rydex/dynamic_response.hpp"
#include "rydex/errors.hpp"
#include "test_support.hpp"

using namespace rydex;
using testsup::committed_config;
namespace kc = rydex::constants;

TEST_CASE("hamiltonian at resonance is real symmetric with zero diagonal") {
  AtomicParams p = committed_config().atomic;
  p.delta_p = p.delta_c = p.delta_lo = 0.0;
  const Mat4c h = build_hamiltonian(p, cplx{0.0, 0.0});
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hamiltonian is Hermitian without a signal field") {
  AtomicParams p = committed_config().atomic;
  p.delta_p = 0.3e6;
  p.delta_c = -0.7e6;
  p.delta_lo = 0.11e6;
  const Mat4c h = build_hamiltonian(p, cplx{0.0, 0.0});
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("probe coupling entries carry half the Rabi frequency") {
  const AtomicParams& p = committed_config().atomic;
  const Mat4c h = build_hamiltonian(p, cplx{0.0, 0.0});
  // Omega_p = 2 pi x 8.08 MHz at the committed operating point.
  CHECK(h(0, 1).real() == doctest::Approx(M_PI * 8.08e6).epsilon(1e-12));
  CHECK(h(1, 0).real() == doctest::Approx(M_PI * 8.08e6).epsilon(1e-12));
}

TEST_CASE("signal field enters the (3,4)/(4,3) entries conjugated") {
  const AtomicParams& p = committed_config().atomic;
  const cplx w{3.0e4, -1.2e4};
  const Mat4c h = build_hamiltonian(p, w);
  const double olo = p.omega_lo();
  CHECK(std::abs(h(2, 3) - 0.5 * (olo + std::conj(w))) < 1e-9);
  CHECK(std::abs(h(3, 2) - 0.5 * (olo + w)) < 1e-9);
}

TEST_CASE("generator preserves the trace direction") {
  const auto sys = build_liouvillian(committed_config().atomic);
  Vec16c u4 = Vec16c::Zero();
  u4(0) = u4(5) = u4(10) = u4(15) = 0.5;
  const double res = (u4.transpose() * sys.a0).norm();
  CHECK(res < 1e-12 * sys.a0.cwiseAbs().maxCoeff());
}

TEST_CASE("generator reduces to the anti-Hermitian commutator when decay vanishes") {
  AtomicParams p = committed_config().atomic;
  p.gamma = p.gamma2 = p.gamma3 = p.gamma4 = 0.0;
  const Mat4c h0 = build_hamiltonian(p, cplx{0.0, 0.0});
  const Mat16c a = assemble_generator(p, h0);
  const Mat16c expected = commutator_superop(h0);
  CHECK((a - expected).cwiseAbs().maxCoeff() < 1e-12 * a.cwiseAbs().maxCoeff());
  CHECK((a + a.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("reduction basis is orthonormal and exact") {
  const auto sys = build_liouvillian(committed_config().atomic);
  const Mat16d qtq = sys.q.transpose() * sys.q;
  CHECK((qtq - Mat16d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  // Reconstructing a0 from its q-basis blocks reproduces it.
  Mat16c b0 = Mat16c::Zero();
  b0.block<15, 1>(1, 0) = sys.w0;
  b0.block<15, 15>(1, 1) = sys.c0;
  const Mat16c back = sys.q.cast<cplx>() * b0 * sys.q.cast<cplx>().transpose();
  CHECK((back - sys.a0).cwiseAbs().maxCoeff() <
        1e-12 * sys.a0.cwiseAbs().maxCoeff());
}

TEST_CASE("system matrix is stable at the committed operating point") {
  const auto sys = build_liouvillian(committed_config().atomic);
  Eigen::ComplexEigenSolver<Mat15c> es(sys.c0, false);
  for (int i = 0; i < 15; ++i) CHECK(es.eigenvalues()(i).real() < 0.0);
}

TEST_CASE("signal perturbation annihilates the trace direction") {
  const auto sys = build_liouvillian(committed_config().atomic);
  Eigen::VectorXd u4 = Eigen::VectorXd::Zero(16);
  u4(0) = u4(5) = u4(10) = u4(15) = 0.5;
  for (auto [k, l] : {std::pair{3, 4}, {4, 3}, {1, 2}, {2, 1}}) {
    Mat4c ekl = Mat4c::Zero();
    ekl(k - 1, l - 1) = 1.0;
    const Mat16c full = commutator_superop(ekl);
    const Mat16c reduced =
        sys.q.cast<cplx>().transpose() * full * sys.q.cast<cplx>();
    CHECK(reduced.col(0).tail<15>().norm() < 1e-14);
    CHECK(reduced.row(0).norm() < 1e-14);
  }
}

TEST_CASE("dark steady state with all fields off") {
  AtomicParams p = committed_config().atomic;
  p.omega_p = 1e-6;  // fields essentially off
  p.omega_c = 1e-6;
  p.e_lo = 1e-30;
  const auto ss = steady_state(build_liouvillian(p));
  CHECK(std::abs(ss.rho(0, 0) - 1.0) < 1e-9);
  for (int i = 1; i < 4; ++i) CHECK(std::abs(ss.rho(i, i)) < 1e-9);
}

TEST_CASE("steady state satisfies the full generator and density invariants") {
  const auto sys = build_liouvillian(committed_config().atomic);
  const auto ss = steady_state(sys);
  CHECK((sys.a0 * vec4(ss.rho)).norm() < 1e-10 * sys.a0.cwiseAbs().maxCoeff());
  const auto d = check_density(ss.rho);
  CHECK(d.hermiticity_error < 1e-12);
  CHECK(d.trace_error < 1e-10);
  CHECK(d.min_eigenvalue > -1e-9);
}

TEST_CASE("steady state matches the long-time RK4 trajectory") {
  const AtomicParams& p = committed_config().atomic;
  const auto ss = steady_state(build_liouvillian(p));
  Mat4c ground = Mat4c::Zero();
  ground(0, 0) = 1.0;
  // 900 us is many lifetimes of the slowest pole at this operating point.
  const auto traj = rk4_master_solver(
      p, [](double) { return cplx{0.0, 0.0}; }, 900e-6, 1e-9, 900000, &ground);
  const Mat4c last = traj.rho.back();
  CHECK((last - ss.rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("transparent medium transmits the full probe power") {
  const AtomicParams& p = committed_config().atomic;
  Mat4c rho = Mat4c::Zero();
  rho(0, 0) = 1.0;  // Im rho21 = 0
  const auto t = probe_transmission(rho, p);
  CHECK(t.p_bar == doctest::Approx(p.probe_power_in).epsilon(1e-14));
}

TEST_CASE("absorption sign convention") {
  const AtomicParams& p = committed_config().atomic;
  const auto ss = steady_state(build_liouvillian(p));
  CHECK(ss.rho(1, 0).imag() < 0.0);
  const auto t = probe_transmission(ss.rho, p);
  CHECK(t.alpha[0] > 0.0);
  CHECK(t.p_bar < p.probe_power_in);
}

TEST_CASE("sliced transmission converges monotonically under slice doubling") {
  const AtomicParams& p = committed_config().atomic;
  std::vector<double> p_bar;
  for (int slices : {1, 2, 4, 8, 16, 32, 64})
    p_bar.push_back(probe_transmission_sliced(p, slices).p_bar);
  std::vector<double> diff;
  for (size_t i = 0; i + 1 < p_bar.size(); ++i)
    diff.push_back(std::abs(p_bar[i + 1] - p_bar[i]));
  for (size_t i = 0; i + 1 < diff.size(); ++i) CHECK(diff[i + 1] < diff[i]);
}

TEST_CASE("dc sweep rejects grids with fewer than three points") {
  const AtomicParams& p = committed_config().atomic;
  const double grid[] = {0.01, 0.02};
  CHECK_THROWS_AS(dc_sweep(p, grid, 1.0), GridTooCoarse);
}

TEST_CASE("dc slope vanishes at both saturation extremes") {
  const AtomicParams& p = committed_config().atomic;
  std::vector<double> grid;
  for (double e = 1e-7; e < 100.0; e *= 1.7) grid.push_back(e);
  const auto curve = dc_sweep(p, grid, 1.0);
  double peak = 0.0;
  for (const auto& pt : curve) peak = std::max(peak, std::abs(pt.slope));
  CHECK(std::abs(curve.front().slope) < 0.02 * peak);
  CHECK(std::abs(curve.back().slope) < 0.02 * peak);
}

TEST_CASE("gamma_scale rescales the Rydberg decay pair") {
  AtomicParams p = committed_config().atomic;
  const double grid[] = {0.03, 0.04, 0.05};
  const auto base = dc_sweep(p, grid, 2.0);
  AtomicParams q = p;
  q.gamma3 *= 2.0;
  q.gamma4 *= 2.0;
  const auto manual = dc_sweep(q, grid, 1.0);
  for (size_t i = 0; i < 3; ++i)
    CHECK(base[i].transmission ==
          doctest::Approx(manual[i].transmission).epsilon(1e-14));
}

TEST_CASE("slope-based DC gain is negative and near the reference magnitude") {
  const AtomicParams& p = committed_config().atomic;
  const double kappa = kappa_dc_fd(p);
  CHECK(kappa < 0.0);
  // Reference magnitude 8.67e-13 W/Hz within a factor of 2 under the
  // committed config.
  CHECK(std::abs(kappa) > 8.67e-13 / 2.0);
  CHECK(std::abs(kappa) < 8.67e-13 * 2.0);
}

TEST_CASE("trace and Hermiticity are preserved along a driven trajectory") {
  const AtomicParams& p = committed_config().atomic;
  const double w0 = p.omega_lo() * 1e-3;
  const auto traj = rk4_master_solver(
      p,
      [&](double t) { return w0 * std::polar(1.0, kc::two_pi * 1.5e5 * t); },
      100e-6, 1e-9, 5000);
  for (const auto& rho : traj.rho) {
    CHECK(std::abs(rho.trace() - cplx{1.0, 0.0}) < 1e-9);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat4c> es(0.5 * (rho + rho.adjoint()));
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
  }
}
