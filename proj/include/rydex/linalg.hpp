#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

namespace rydex {

using cplx = std::complex<double>;

using Mat4c = Eigen::Matrix4cd;
using Mat16c = Eigen::Matrix<cplx, 16, 16>;
using Mat15c = Eigen::Matrix<cplx, 15, 15>;
using Vec16c = Eigen::Vector<cplx, 16>;
using Vec15c = Eigen::Vector<cplx, 15>;
using Mat16d = Eigen::Matrix<double, 16, 16>;
using Mat15d = Eigen::Matrix<double, 15, 15>;
using Vec15d = Eigen::Vector<double, 15>;
using RowVec15d = Eigen::RowVector<double, 15>;

inline constexpr cplx im{0.0, 1.0};

/// Column-stacking vectorization of a 4x4 matrix. Entry (r,c) lands at
/// index 4*c + r, so rho_21 sits at index 1 and the diagonal at 0,5,10,15.
inline Vec16c vec4(const Mat4c& m) {
  Vec16c v;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) v(4 * c + r) = m(r, c);
  return v;
}

inline Mat4c unvec4(const Vec16c& v) {
  Mat4c m;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) m(r, c) = v(4 * c + r);
  return m;
}

/// Kronecker product for small dense matrices.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Superoperator of the commutator -i[H, .] in the column-stacking convention.
inline Mat16c commutator_superop(const Mat4c& h) {
  const Mat4c id = Mat4c::Identity();
  Mat16c out;
  out = -im * (kron(id, h) - kron(h.transpose(), id));
  return out;
}

/// Gauss-Hermite rule: integrates f against exp(-x^2) on the real line,
/// sum_i w_i f(x_i). Nodes/weights via Golub-Welsch on the Jacobi matrix.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

/// Adaptive Gauss-Kronrod (G7,K15) on [a,b] to absolute tolerance.
double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double abs_tol, int max_depth = 30);

/// Orthonormal completion of a unit vector into a full orthonormal basis.
/// First column is u; the rest come from modified Gram-Schmidt over the
/// canonical basis, skipping near-dependent candidates. Deterministic.
Eigen::MatrixXd orthonormal_completion(const Eigen::VectorXd& u);

}  // namespace rydex
