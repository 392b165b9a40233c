#include "rydex/dynamic_response.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>

#include "rydex/errors.hpp"

namespace rydex {

namespace k = constants;

cplx transfer_T(const LiouvillianSystem& sys, const SteadyState& ss, int kk,
                int ll, cplx s) {
  Eigen::ComplexEigenSolver<Mat15c> es(sys.c0, false);
  for (int i = 0; i < 15; ++i) {
    const cplx lam = es.eigenvalues()(i);
    if (std::abs(s - lam) < 1e-9 * std::abs(lam))
      throw PoleHit("transfer_T: s coincides with a system pole");
  }
  Mat15c m = -sys.c0;
  m.diagonal().array() += s;
  Mat15c f;
  if (kk == 3 && ll == 4)
    f = sys.f34;
  else if (kk == 4 && ll == 3)
    f = sys.f43;
  else
    f = sys.signal_action(kk, ll);
  const Vec15c sol = m.partialPivLu().solve(f * ss.z0);
  return sys.rho21_row * sol;
}

IqGains gains_iq(const LiouvillianSystem& sys, const SteadyState& ss, cplx s) {
  const cplx t34 = transfer_T(sys, ss, 3, 4, s);
  const cplx t43 = transfer_T(sys, ss, 4, 3, s);
  const cplx t34c = transfer_T(sys, ss, 3, 4, std::conj(s));
  const cplx t43c = transfer_T(sys, ss, 4, 3, std::conj(s));

  IqGains g;
  g.g_i = 0.5 * (t43 + t34);
  g.g_q = 0.5 * im * (t43 - t34);
  const cplx gi_bar = std::conj(0.5 * (t43c + t34c));
  const cplx gq_bar = std::conj(0.5 * im * (t43c - t34c));
  g.g_i1 = 0.5 * (g.g_i + gi_bar);
  g.g_i2 = (g.g_i - gi_bar) / (2.0 * im);
  g.g_q1 = 0.5 * (g.g_q + gq_bar);
  g.g_q2 = (g.g_q - gq_bar) / (2.0 * im);
  return g;
}

namespace {

// Orthonormal basis of Hermitian 4x4 matrices under tr(A^H B): the four
// diagonal projectors, then (X,Y) pairs for each i<j.
const std::array<Mat4c, 16>& hermitian_basis() {
  static const std::array<Mat4c, 16> basis = [] {
    std::array<Mat4c, 16> g{};
    int idx = 0;
    for (int i = 0; i < 4; ++i) {
      Mat4c m = Mat4c::Zero();
      m(i, i) = 1.0;
      g[idx++] = m;
    }
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        Mat4c x = Mat4c::Zero();
        x(i, j) = r;
        x(j, i) = r;
        g[idx++] = x;
        Mat4c y = Mat4c::Zero();
        y(i, j) = cplx(0.0, r);
        y(j, i) = cplx(0.0, -r);
        g[idx++] = y;
      }
    return g;
  }();
  return basis;
}

Eigen::Vector<double, 16> herm_coords(const Mat4c& m) {
  const auto& basis = hermitian_basis();
  Eigen::Vector<double, 16> v;
  for (int i = 0; i < 16; ++i) v(i) = (basis[i] * m).trace().real();
  return v;
}

const Mat16d& herm_reduction_basis() {
  static const Mat16d q = [] {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(16);
    u(0) = u(1) = u(2) = u(3) = 0.5;  // trace direction, unit norm
    return Mat16d(orthonormal_completion(u));
  }();
  return q;
}

}  // namespace

RealRealization real_realization(const LiouvillianSystem& sys,
                                 const Mat4c& rho_bar) {
  const auto& basis = hermitian_basis();
  Mat16d gen;
  for (int l = 0; l < 16; ++l) {
    const Mat4c image = unvec4(sys.a0 * vec4(basis[l]));
    gen.col(l) = herm_coords(image);
  }

  // Input channels: unit in-phase / quadrature signal Rabi frequency.
  Mat4c hx = Mat4c::Zero();
  hx(2, 3) = 0.5;
  hx(3, 2) = 0.5;
  Mat4c hy = Mat4c::Zero();
  hy(2, 3) = cplx(0.0, -0.5);
  hy(3, 2) = cplx(0.0, 0.5);
  const Mat4c rho_h = 0.5 * (rho_bar + rho_bar.adjoint());
  const auto drive = [&rho_h](const Mat4c& h) {
    const Mat4c comm = h * rho_h - rho_h * h;
    return herm_coords(-im * comm);
  };
  const Eigen::Vector<double, 16> bx = drive(hx);
  const Eigen::Vector<double, 16> by = drive(hy);

  // Outputs: rho_21 = conj(rho_01); coords 4/5 hold sqrt(2) Re/Im rho_01.
  Eigen::RowVector<double, 16> cre = Eigen::RowVector<double, 16>::Zero();
  Eigen::RowVector<double, 16> cim = Eigen::RowVector<double, 16>::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  cre(4) = r;
  cim(5) = -r;

  const Mat16d& q = herm_reduction_basis();
  const Mat16d reduced = q.transpose() * gen * q;
  const double scale = gen.cwiseAbs().maxCoeff();
  if (reduced.row(0).norm() > 1e-12 * scale)
    throw ReductionError("real_realization: trace row not eliminated");

  RealRealization rr;
  rr.a = reduced.block<15, 15>(1, 1);
  rr.b_i = (q.transpose() * bx).tail<15>();
  rr.b_q = (q.transpose() * by).tail<15>();
  rr.c_re = cre * q.rightCols<15>();
  rr.c_im = cim * q.rightCols<15>();
  return rr;
}

cplx realization_tf(const Mat15d& a, const Vec15d& b, const RowVec15d& c,
                    cplx s) {
  Mat15c m = (-a).cast<cplx>();
  m.diagonal().array() += s;
  const Vec15c sol = m.partialPivLu().solve(b.cast<cplx>());
  return c.cast<cplx>() * sol;
}

OperatingPoint OperatingPoint::make(const AtomicParams& p, int slices) {
  if (slices < 1) throw Error("OperatingPoint: slices must be >= 1");
  OperatingPoint op;
  op.params_ = p;
  const double dx = p.cell_length / slices;
  double attn = 0.0;
  for (int j = 0; j < slices; ++j) {
    AtomicParams local = p;
    local.omega_p = p.omega_p * std::exp(-attn);
    Slice s;
    s.sys = build_liouvillian(local);
    s.ss = steady_state(s.sys);
    s.rr = real_realization(s.sys, s.ss.rho);
    s.omega_p_local = local.omega_p;
    s.alpha = attenuation_alpha(p, s.ss.rho(1, 0), local.omega_p);
    attn += s.alpha * dx;
    op.slices_.push_back(std::move(s));
  }
  op.p_bar_ = p.probe_power_in * std::exp(-2.0 * attn);
  op.i_ph_bar_ = photocurrent_dc(p, op.p_bar_);

  Eigen::ComplexEigenSolver<Mat15c> es(op.slices_[0].sys.c0, false);
  op.poles_.assign(es.eigenvalues().data(), es.eigenvalues().data() + 15);
  std::sort(op.poles_.begin(), op.poles_.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return op;
}

namespace {

// 2 k_p N0 mu12^2 / (eps0 hbar Omega_p(x)), the transconductance prefactor
// per unit G_I2 [1/m].
double gq_prefactor(const AtomicParams& p, double omega_p_local) {
  return 2.0 * p.k_p() * p.n0 * p.mu12 * p.mu12 /
         (k::eps0 * k::hbar * omega_p_local);
}

}  // namespace

cplx OperatingPoint::gq_slice(int j, cplx s) const {
  const Slice& sl = slices_.at(j);
  const cplx gi2 = realization_tf(sl.rr.a, sl.rr.b_i, sl.rr.c_im, s);
  return i_ph_bar_ * gq_prefactor(params_, sl.omega_p_local) * gi2 *
         (params_.mu_rf / k::hbar);
}

cplx OperatingPoint::gq_total(cplx s) const {
  cplx sum = 0.0;
  for (int j = 0; j < slices(); ++j) sum += gq_slice(j, s);
  return sum * dx();
}

cplx OperatingPoint::gq(cplx s) const {
  return gq_total(s) / params_.cell_length;
}

cplx OperatingPoint::kappa(cplx s) const {
  cplx sum = 0.0;
  for (int j = 0; j < slices(); ++j) {
    const Slice& sl = slices_[j];
    const cplx gi2 = realization_tf(sl.rr.a, sl.rr.b_i, sl.rr.c_im, s);
    sum += gq_prefactor(params_, sl.omega_p_local) * gi2;
  }
  return p_bar_ * sum * dx();
}

PoleZero pole_zero(const OperatingPoint& op) {
  const auto& sl = op.slice(0);
  const double w0 = sl.rr.a.cwiseAbs().maxCoeff();  // time scaling

  Eigen::Matrix<double, 16, 16> m = Eigen::Matrix<double, 16, 16>::Zero();
  m.topLeftCorner<15, 15>() = sl.rr.a / w0;
  m.topRightCorner<15, 1>() = sl.rr.b_i / sl.rr.b_i.norm();
  m.bottomLeftCorner<1, 15>() = sl.rr.c_im / sl.rr.c_im.norm();
  Eigen::Matrix<double, 16, 16> n = Eigen::Matrix<double, 16, 16>::Identity();
  n(15, 15) = 0.0;

  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(m, n, false);

  PoleZero pz;
  pz.poles = op.poles();
  const double spectral_radius = w0;
  for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
    const cplx alpha = ges.alphas()(i);
    const double beta = ges.betas()(i);
    if (beta == 0.0) continue;
    const cplx z = w0 * alpha / beta;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) continue;
    if (std::abs(z) > 1e4 * spectral_radius) continue;  // infinite zero
    pz.zeros.push_back(z);
  }
  std::sort(pz.zeros.begin(), pz.zeros.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  if (pz.zeros.size() >= pz.poles.size())
    throw DegenerateRealization("pole_zero: zero count reached pole count");
  pz.dc_gain = op.gq(cplx{0.0, 0.0}).real();
  return pz;
}

cplx eval_rational(const PoleZero& pz, cplx s) {
  cplx num = 1.0, den = 1.0;
  for (const cplx& z : pz.zeros) num *= (1.0 - s / z);
  for (const cplx& p : pz.poles) den *= (1.0 - s / p);
  return pz.dc_gain * num / den;
}

TimeResponse impulse_step_response(const OperatingPoint& op, double dt,
                                   int n) {
  const auto& sl = op.slice(0);
  const double scale = (op.gq(cplx{0.0, 0.0}) /
                        realization_tf(sl.rr.a, sl.rr.b_i, sl.rr.c_im, 0.0))
                           .real();

  const Mat15d ed = (sl.rr.a * dt).exp();
  const Eigen::PartialPivLU<Mat15d> alu(sl.rr.a);
  const Vec15d ainv_b = alu.solve(sl.rr.b_i);

  TimeResponse r;
  r.t.resize(n);
  r.impulse.resize(n);
  r.step.resize(n);
  Vec15d x = sl.rr.b_i;
  for (int i = 0; i < n; ++i) {
    r.t[i] = i * dt;
    r.impulse[i] = scale * (sl.rr.c_im * x).value();
    r.step[i] = scale * (sl.rr.c_im * (alu.solve(x) - ainv_b)).value();
    x = ed * x;
  }

  const double settle = -scale * (sl.rr.c_im * ainv_b).value();  // step(inf)
  auto crossing = [&](double level) {
    for (int i = 1; i < n; ++i) {
      const double u0 = r.step[i - 1] / settle;
      const double u1 = r.step[i] / settle;
      if (u0 < level && u1 >= level)
        return r.t[i - 1] + dt * (level - u0) / (u1 - u0);
    }
    return r.t.back();
  };
  const double t10 = crossing(0.1);
  const double t90 = crossing(0.9);
  r.rise_time = t90 - t10;
  r.bw3db_hz = 0.35 / r.rise_time;
  return r;
}

MasterEquationIntegrator::MasterEquationIntegrator(const AtomicParams& p,
                                                   double dt)
    : dt_(dt) {
  a0_ = assemble_generator(p, build_hamiltonian(p, cplx{0.0, 0.0}));
  Mat4c hx = Mat4c::Zero();
  hx(2, 3) = 0.5;
  hx(3, 2) = 0.5;
  Mat4c hy = Mat4c::Zero();
  hy(2, 3) = cplx(0.0, -0.5);
  hy(3, 2) = cplx(0.0, 0.5);
  bx_ = commutator_superop(hx);
  by_ = commutator_superop(hy);
  Eigen::ComplexEigenSolver<Mat16c> es(a0_, false);
  max_stable_dt_ = 2.0 / es.eigenvalues().cwiseAbs().maxCoeff();
  x_.setZero();
  x_(0) = 1.0;  // ground state
}

double MasterEquationIntegrator::trace_drift() const {
  return std::abs(x_(0) + x_(5) + x_(10) + x_(15) - cplx{1.0, 0.0});
}

Vec16c MasterEquationIntegrator::apply(const Vec16c& x, cplx w) const {
  return a0_ * x + w.real() * (bx_ * x) + w.imag() * (by_ * x);
}

void MasterEquationIntegrator::step(cplx w_begin, cplx w_mid, cplx w_end) {
  const Vec16c k1 = apply(x_, w_begin);
  const Vec16c k2 = apply(x_ + (0.5 * dt_) * k1, w_mid);
  const Vec16c k3 = apply(x_ + (0.5 * dt_) * k2, w_mid);
  const Vec16c k4 = apply(x_ + dt_ * k3, w_end);
  x_ += (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory rk4_master_solver(const AtomicParams& p,
                             const std::function<cplx(double)>& omega_sig,
                             double t_end, double dt, int decimate,
                             const Mat4c* rho_init) {
  MasterEquationIntegrator integ(p, dt);
  if (dt > integ.max_stable_dt())
    throw Error("rk4_master_solver: dt exceeds the stability bound 2/max|eig|");
  if (rho_init)
    integ.set_state(*rho_init);
  else
    integ.set_state(steady_state(build_liouvillian(p)).rho);

  const auto n_steps = static_cast<long>(std::llround(t_end / dt));
  Trajectory traj;
  traj.t.reserve(n_steps / decimate + 1);
  const double alpha_pref =
      p.k_p() * p.n0 * p.mu12 * p.mu12 / (k::eps0 * k::hbar * p.omega_p);
  auto emit = [&](long step_idx) {
    traj.t.push_back(step_idx * dt);
    traj.rho.push_back(integ.state());
    const double a = -alpha_pref * integ.rho21().imag();
    traj.p.push_back(p.probe_power_in * std::exp(-2.0 * a * p.cell_length));
  };
  emit(0);
  for (long i = 0; i < n_steps; ++i) {
    const double t = i * dt;
    integ.step(omega_sig(t), omega_sig(t + 0.5 * dt), omega_sig(t + dt));
    if ((i & 1023) == 0 && integ.trace_drift() > 1e-6)
      throw UnstableStep("rk4_master_solver: trace drift exceeded 1e-6");
    if ((i + 1) % decimate == 0) emit(i + 1);
  }
  if (integ.trace_drift() > 1e-6)
    throw UnstableStep("rk4_master_solver: trace drift exceeded 1e-6");
  return traj;
}

std::vector<cplx> photocurrent_response(const OperatingPoint& op,
                                        std::span<const double> omega_grid,
                                        std::span<const cplx> e_spectrum) {
  const size_t n = omega_grid.size();
  if (e_spectrum.size() != n)
    throw GridMismatch("photocurrent_response: grid/spectrum size mismatch");
  double w_max = 0.0;
  for (double w : omega_grid) w_max = std::max(w_max, std::abs(w));
  for (size_t i = 0; i < n; ++i)
    if (std::abs(omega_grid[i] + omega_grid[n - 1 - i]) > 1e-9 * w_max)
      throw GridMismatch("photocurrent_response: grid is not symmetric");

  std::vector<cplx> out(n);
  for (size_t i = 0; i < n; ++i) {
    const cplx g = op.gq_total(cplx{0.0, omega_grid[i]});
    out[i] = g * 0.5 * (e_spectrum[i] + std::conj(e_spectrum[n - 1 - i]));
  }
  return out;
}

}  // namespace rydex
