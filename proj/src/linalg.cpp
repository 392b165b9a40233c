#include "rydex/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace rydex {

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  // Jacobi matrix of the Hermite recurrence: off-diagonal sqrt(k/2).
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussHermite out;
  out.nodes.resize(n);
  out.weights.resize(n);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    out.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    out.weights[i] = sqrt_pi * v0 * v0;
  }
  return out;
}

namespace {

// 15-point Kronrod nodes on [-1,1] with embedded 7-point Gauss rule.
constexpr double kron_x[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kron_w[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double gauss_w[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

struct PanelResult {
  double value;
  double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double m = 0.5 * (a + b);
  double sk = 0.0, sg = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double y = f(m + h * kron_x[i]);
    sk += kron_w[i] * y;
    if (i % 2 == 1) sg += gauss_w[i / 2] * y;
  }
  return {h * sk, std::abs(h * (sk - sg))};
}

double adaptive_gk_impl(const std::function<double(double)>& f, double a,
                        double b, double tol, int depth) {
  const auto r = gk15(f, a, b);
  if (r.error <= tol || depth <= 0) return r.value;
  const double m = 0.5 * (a + b);
  return adaptive_gk_impl(f, a, m, tol * 0.5, depth - 1) +
         adaptive_gk_impl(f, m, b, tol * 0.5, depth - 1);
}

}  // namespace

double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double abs_tol, int max_depth) {
  return adaptive_gk_impl(f, a, b, abs_tol, max_depth);
}

Eigen::MatrixXd orthonormal_completion(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  Eigen::MatrixXd q(n, n);
  q.col(0) = u / u.norm();
  Eigen::Index filled = 1;
  for (Eigen::Index k = 0; k < n && filled < n; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(k) = 1.0;
    // Two Gram-Schmidt passes keep orthogonality near machine precision.
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < filled; ++j)
        v -= q.col(j).dot(v) * q.col(j);
    const double norm = v.norm();
    if (norm < 1e-8) continue;  // candidate already spanned
    q.col(filled++) = v / norm;
  }
  if (filled != n)
    throw std::runtime_error("orthonormal_completion: basis incomplete");
  return q;
}

}  // namespace rydex
