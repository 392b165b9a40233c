#include "rydex/doppler.hpp"

#include <cmath>
#include <limits>

#include "rydex/errors.hpp"

namespace rydex {

namespace {

VelocityEnsemble make_ensemble(double sigma_v, int n) {
  if (n < 3) throw Error("velocity_ensemble: need at least 3 nodes");
  if (n % 2 == 0) ++n;
  VelocityEnsemble ve;
  ve.sigma_v = sigma_v;
  ve.nodes.resize(n);
  ve.weights.resize(n);
  const double span = 5.0;
  const double h = 2.0 * span / (n - 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -span + i * h;
    ve.nodes[i] = x;
    const double simpson =
        (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    ve.weights[i] = simpson * std::exp(-0.5 * x * x);
    total += ve.weights[i];
  }
  for (double& w : ve.weights) w /= total;
  return ve;
}

}  // namespace

VelocityEnsemble velocity_ensemble(const AtomicParams& p, int n) {
  // The atomic response varies over a few m/s while the thermal spread is
  // ~1e2 m/s, so the integrand is a narrow spike under the Gaussian and
  // needs a uniform grid: Gaussian-weighted composite Simpson on +-5 sigma.
  return make_ensemble(p.sigma_v(), n);
}

Mat4c doppler_static_rho(const AtomicParams& p, int nodes,
                         double probe_shift_sign, double control_shift_sign) {
  const VelocityEnsemble ve = velocity_ensemble(p, nodes);
  Mat4c acc = Mat4c::Zero();
  for (int i = 0; i < nodes; ++i) {
    const double v = ve.sigma_v * ve.nodes[i];
    AtomicParams q = p;
    q.delta_p = p.delta_p + probe_shift_sign * p.k_p() * v;
    q.delta_c = p.delta_c + control_shift_sign * p.k_c() * v;
    acc += ve.weights[i] * steady_state(build_liouvillian(q)).rho;
  }
  return acc;
}

Mat16c velocity_superoperator(const AtomicParams& p) {
  Mat4c dp = Mat4c::Zero();
  dp(1, 1) = -1.0;
  dp(2, 2) = -1.0;
  dp(3, 3) = -1.0;
  Mat4c dc = Mat4c::Zero();
  dc(2, 2) = -1.0;
  dc(3, 3) = -1.0;
  const Mat4c id = Mat4c::Identity();
  const double sv = p.sigma_v();
  Mat16c av;
  av = -im * p.k_p() * sv * (kron(id, dp) - kron(dp, id)) +
       im * p.k_c() * sv * (kron(id, dc) - kron(dc, id));
  return av;
}

namespace {

cplx doppler_transfer_once(const LiouvillianSystem& sys,
                           const VelocityEnsemble& ve, const Mat15c& f,
                           cplx s) {
  cplx acc = 0.0;
  for (size_t i = 0; i < ve.nodes.size(); ++i) {
    const Mat15c shifted = sys.c0 + ve.nodes[i] * sys.cv;

    Eigen::FullPivLU<Mat15c> lu_ss(shifted);
    if (!lu_ss.isInvertible())
      throw SingularSystem("doppler_transfer: velocity-class steady state");
    const Vec15c zv = lu_ss.solve(-0.5 * sys.w0);

    Mat15c res = -shifted;
    res.diagonal().array() += s;
    Eigen::FullPivLU<Mat15c> lu_res(res);
    const double umax = lu_res.matrixLU().diagonal().cwiseAbs().maxCoeff();
    const double umin = lu_res.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (umin < 1e-13 * umax)
      throw PoleHit("doppler_transfer: s hits a velocity-class pole");
    const Vec15c sol = lu_res.solve(f * zv);
    acc += ve.weights[i] * (sys.rho21_row * sol).value();
  }
  return acc;
}

}  // namespace

cplx doppler_transfer_numeric(const LiouvillianSystem& sys, int k, int l,
                              cplx s, int nodes) {
  Mat15c f;
  if (k == 3 && l == 4)
    f = sys.f34;
  else if (k == 4 && l == 3)
    f = sys.f43;
  else
    f = sys.signal_action(k, l);
  const cplx coarse = doppler_transfer_once(sys, make_ensemble(0.0, nodes), f, s);
  const cplx fine = doppler_transfer_once(sys, make_ensemble(0.0, 2 * nodes), f, s);
  if (std::abs(fine - coarse) > 1e-4 * std::abs(fine))
    throw NonConvergent("doppler_transfer_numeric: node doubling moved result");
  return fine;
}

EigenPack eigen_pack(const Mat15c& m) {
  Eigen::ComplexEigenSolver<Mat15c> es(m, true);
  if (es.info() != Eigen::Success)
    throw IllConditioned("eigen_pack: eigendecomposition failed");
  EigenPack pack;
  pack.lambda = es.eigenvalues();
  pack.right = es.eigenvectors();

  Eigen::JacobiSVD<Mat15c> svd(pack.right);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  pack.cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (pack.cond > 1e8)
    throw IllConditioned("eigen_pack: eigenvector condition number > 1e8");

  pack.left_t = pack.right.partialPivLu().solve(Mat15c::Identity());

  const double m_norm = m.norm();
  const double recon =
      (pack.right * pack.lambda.asDiagonal() * pack.left_t - m).norm();
  if (m_norm > 0.0 && recon > 1e-8 * m_norm)
    throw IllConditioned("eigen_pack: reconstruction residual too large");
  return pack;
}

cplx doppler_transfer_analytic(const LiouvillianSystem& sys,
                               const SteadyState& ss, int k, int l, cplx s) {
  Mat15c f;
  if (k == 3 && l == 4)
    f = sys.f34;
  else if (k == 4 && l == 3)
    f = sys.f43;
  else
    f = sys.signal_action(k, l);

  Mat15c res = -sys.c0;
  res.diagonal().array() += s;
  Eigen::PartialPivLU<Mat15c> lu_s(res);

  const EigenPack at_s = eigen_pack(lu_s.solve(sys.cv));
  const EigenPack at_0 = eigen_pack(Mat15c((-sys.c0).lu().solve(sys.cv)));

  // u_n = s_n(0) (t_n^T(0) z0); h_n = (sI-C0)^{-1} F u_n.
  const Vec15c t0z = at_0.left_t * ss.z0;
  Mat15c u = at_0.right * t0z.asDiagonal();
  const Mat15c h = lu_s.solve(f * u);
  const Mat15c beta = at_s.left_t * h;  // beta(m,n) = t_m^T(s) h_n

  Vec15c qvec;
  for (int m = 0; m < 15; ++m) {
    cplx sum = 0.0;
    for (int n = 0; n < 15; ++n)
      sum += gaussian_pole_expectation(at_s.lambda(m), at_0.lambda(n)) *
             beta(m, n);
    qvec(m) = sum;
  }
  return sys.rho21_row * (at_s.right * qvec);
}

}  // namespace rydex
