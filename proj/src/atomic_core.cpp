#include "rydex/atomic_core.hpp"

#include <cmath>

#include "rydex/doppler.hpp"
#include "rydex/errors.hpp"

namespace rydex {

namespace k = constants;

Mat4c build_hamiltonian(const AtomicParams& p, cplx omega_sig) {
  const double olo = p.omega_lo();
  Mat4c h = Mat4c::Zero();
  h(0, 1) = 0.5 * p.omega_p;
  h(1, 0) = 0.5 * p.omega_p;
  h(1, 1) = -p.delta_p;
  h(1, 2) = 0.5 * p.omega_c;
  h(2, 1) = 0.5 * p.omega_c;
  h(2, 2) = -p.delta_p - p.delta_c;
  h(2, 3) = 0.5 * (olo + std::conj(omega_sig));
  h(3, 2) = 0.5 * (olo + omega_sig);
  h(3, 3) = -p.delta_p - p.delta_c + p.delta_lo;
  return h;
}

Mat4c decay_matrix(const AtomicParams& p) {
  Mat4c g = Mat4c::Zero();
  g(0, 0) = p.gamma;
  g(1, 1) = p.gamma + p.gamma2;
  g(2, 2) = p.gamma + p.gamma3;
  g(3, 3) = p.gamma + p.gamma4;
  return g;
}

Mat16c assemble_generator(const AtomicParams& p, const Mat4c& h0) {
  const Mat4c id = Mat4c::Identity();
  const Mat4c gam = decay_matrix(p);
  Mat16c a = commutator_superop(h0);
  a -= 0.5 * (kron(gam, id) + kron(id, gam));
  // Repopulation in vec indices (1-based): diag entries live at 1, 6, 11, 16.
  a(0, 0) += p.gamma;
  a(0, 5) += p.gamma + p.gamma2;
  a(0, 15) += p.gamma + p.gamma4;
  a(5, 10) += p.gamma3;
  a(0, 10) += p.gamma;
  return a;
}

namespace {

Mat16d reduction_basis() {
  Eigen::VectorXd u4 = Eigen::VectorXd::Zero(16);
  u4(0) = u4(5) = u4(10) = u4(15) = 0.5;  // vec(I4)/2, unit norm
  return orthonormal_completion(u4);
}

Mat15c reduce_block(const Mat16d& q, const Mat16c& full, const char* what,
                    double leak_tol) {
  const Mat16c b = q.cast<cplx>().transpose() * full * q.cast<cplx>();
  const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
  const double row_leak = b.row(0).norm();
  const double col_leak = b.col(0).norm();
  if (row_leak > leak_tol * scale || col_leak > leak_tol * scale)
    throw BlockLeakage(std::string(what) + ": trace-direction block not zero");
  return b.block<15, 15>(1, 1);
}

}  // namespace

Mat15c LiouvillianSystem::signal_action(int kk, int ll) const {
  if (kk < 1 || kk > 4 || ll < 1 || ll > 4 || kk == ll)
    throw Error("signal_action: level indices must be distinct and in 1..4");
  Mat4c ekl = Mat4c::Zero();
  ekl(kk - 1, ll - 1) = 1.0;
  // d(A1)/d[H1]_kl for independent complex entries of the perturbation.
  const Mat16c full = commutator_superop(ekl);
  return reduce_block(q, full, "signal_action", 1e-13);
}

LiouvillianSystem build_liouvillian(const AtomicParams& p) {
  LiouvillianSystem sys;
  const Mat4c h0 = build_hamiltonian(p, cplx{0.0, 0.0});
  sys.a0 = assemble_generator(p, h0);
  sys.q = reduction_basis();

  const Mat16c b0 =
      sys.q.cast<cplx>().transpose() * sys.a0 * sys.q.cast<cplx>();
  const double scale = sys.a0.cwiseAbs().maxCoeff();
  if (b0.row(0).norm() > 1e-12 * scale)
    throw ReductionError(
        "first row of q^T a0 q is not zero; vectorization convention broken");
  sys.w0 = b0.block<15, 1>(1, 0);
  sys.c0 = b0.block<15, 15>(1, 1);

  sys.cv = reduce_block(sys.q, velocity_superoperator(p), "velocity coupling",
                        1e-12);
  sys.f34 = sys.signal_action(3, 4);
  sys.f43 = sys.signal_action(4, 3);

  // Row of Q [0; I15] that reconstructs the rho_21 component (vec index 1).
  sys.rho21_row = sys.q.row(1).segment<15>(1).cast<cplx>();
  return sys;
}

SteadyState steady_state(const LiouvillianSystem& sys) {
  Eigen::PartialPivLU<Mat15c> lu(sys.c0);
  const Vec15c z0 = lu.solve(-0.5 * sys.w0);
  const double residual = (sys.c0 * z0 + 0.5 * sys.w0).norm();
  if (!z0.allFinite() || residual > 1e-8 * std::max(1.0, sys.w0.norm()))
    throw SingularSystem("steady_state: linear solve failed");
  Vec16c y;
  y(0) = 0.5;
  y.tail<15>() = z0;
  SteadyState ss;
  ss.z0 = z0;
  ss.rho = unvec4(sys.q.cast<cplx>() * y);
  return ss;
}

DensityDiagnostics check_density(const Mat4c& rho) {
  DensityDiagnostics d;
  const double scale = std::max(1e-300, rho.cwiseAbs().maxCoeff());
  d.hermiticity_error =
      (rho - rho.adjoint()).cwiseAbs().maxCoeff() / scale;
  d.trace_error = std::abs(rho.trace() - cplx{1.0, 0.0});
  const Mat4c herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4c> es(herm);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

double attenuation_alpha(const AtomicParams& p, cplx rho21,
                         double omega_p_local) {
  const double pref = p.k_p() * p.n0 * p.mu12 * p.mu12 /
                      (k::eps0 * k::hbar * omega_p_local);
  return -pref * rho21.imag();
}

Transmission probe_transmission(const Mat4c& rho_bar, const AtomicParams& p) {
  Transmission t;
  const cplx r21 = rho_bar(1, 0);
  const double a = attenuation_alpha(p, r21, p.omega_p);
  t.alpha = {a};
  t.omega_p_x = {p.omega_p};
  t.rho21 = {r21};
  t.p_bar = p.probe_power_in * std::exp(-2.0 * a * p.cell_length);
  return t;
}

Transmission probe_transmission_sliced(const AtomicParams& p, int slices) {
  if (slices < 1) throw Error("probe_transmission_sliced: slices must be >= 1");
  if (slices == 1) {
    const auto ss = steady_state(build_liouvillian(p));
    return probe_transmission(ss.rho, p);
  }
  Transmission t;
  t.alpha.reserve(slices);
  t.omega_p_x.reserve(slices);
  t.rho21.reserve(slices);
  const double dx = p.cell_length / slices;
  double attn_exponent = 0.0;  // accumulated amplitude attenuation
  for (int j = 0; j < slices; ++j) {
    AtomicParams local = p;
    local.omega_p = p.omega_p * std::exp(-attn_exponent);
    const auto ss = steady_state(build_liouvillian(local));
    const cplx r21 = ss.rho(1, 0);
    const double a = attenuation_alpha(p, r21, local.omega_p);
    t.alpha.push_back(a);
    t.omega_p_x.push_back(local.omega_p);
    t.rho21.push_back(r21);
    attn_exponent += a * dx;
  }
  t.p_bar = p.probe_power_in * std::exp(-2.0 * attn_exponent);
  return t;
}

double photocurrent_dc(const AtomicParams& p, double p_bar) {
  return k::q_e * p.pd_quantum_efficiency * p_bar /
         (k::hbar * p.omega_p_optical());
}

std::vector<DcSweepPoint> dc_sweep(const AtomicParams& p,
                                   std::span<const double> e_lo_grid,
                                   double gamma_scale) {
  if (e_lo_grid.size() < 3)
    throw GridTooCoarse("dc_sweep: need at least 3 grid points");
  for (size_t i = 0; i + 1 < e_lo_grid.size(); ++i)
    if (!(e_lo_grid[i] > 0.0) || e_lo_grid[i + 1] <= e_lo_grid[i])
      throw Error("dc_sweep: grid must be strictly increasing and positive");

  std::vector<DcSweepPoint> out(e_lo_grid.size());
  for (size_t i = 0; i < e_lo_grid.size(); ++i) {
    AtomicParams q = p;
    q.e_lo = e_lo_grid[i];
    q.gamma3 = p.gamma3 * gamma_scale;
    q.gamma4 = p.gamma4 * gamma_scale;
    const auto ss = steady_state(build_liouvillian(q));
    out[i].e_lo = e_lo_grid[i];
    out[i].transmission = probe_transmission(ss.rho, q).p_bar / q.probe_power_in;
  }
  const auto n = out.size();
  for (size_t i = 0; i < n; ++i) {
    if (i == 0)
      out[i].slope = (out[1].transmission - out[0].transmission) /
                     (out[1].e_lo - out[0].e_lo);
    else if (i == n - 1)
      out[i].slope = (out[n - 1].transmission - out[n - 2].transmission) /
                     (out[n - 1].e_lo - out[n - 2].e_lo);
    else
      out[i].slope = (out[i + 1].transmission - out[i - 1].transmission) /
                     (out[i + 1].e_lo - out[i - 1].e_lo);
  }
  return out;
}

double kappa_dc_fd(const AtomicParams& p) {
  const double h = 1e-4 * p.e_lo;
  auto p_bar_at = [&p](double e) {
    AtomicParams q = p;
    q.e_lo = e;
    const auto ss = steady_state(build_liouvillian(q));
    return probe_transmission(ss.rho, q).p_bar;
  };
  const double slope = (p_bar_at(p.e_lo + h) - p_bar_at(p.e_lo - h)) / (2.0 * h);
  return k::hbar / p.mu_rf * slope;
}

}  // namespace rydex
