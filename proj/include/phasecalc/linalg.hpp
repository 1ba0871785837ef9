#pragma once

// Dense linear algebra helpers: Hermitian eigendecomposition via LAPACK
// (zheevd) and small real-symmetric utilities used by the metric algebra.

#include <stdexcept>
#include <string>
#include <lapacke.h>
#include "grid.hpp"

namespace phasecalc {

struct Eigh {
  VecR w;  // ascending eigenvalues
  Mat V;   // columns are eigenvectors
};

// Hermitian eigendecomposition; hermitizes the input copy first.
inline Eigh eigh(const Mat& M) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n) throw std::invalid_argument("eigh: square matrix required");
  Eigh r;
  r.V = 0.5 * (M + M.adjoint());
  r.w.resize(n);
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                            reinterpret_cast<lapack_complex_double*>(r.V.data()),
                            n, r.w.data());
  if (info != 0)
    throw std::runtime_error("eigh: zheevd failed, info=" + std::to_string(info));
  return r;
}

// symmetric eigensolve for small real matrices
inline Eigen::SelfAdjointEigenSolver<MatR> sym_eig(const MatR& A) {
  Eigen::SelfAdjointEigenSolver<MatR> es(0.5 * (A + A.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eig: eigensolver failed");
  return es;
}

inline void require_spd(const MatR& G, const std::string& who) {
  auto es = sym_eig(G);
  double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0))
    throw std::domain_error(who + ": matrix not positive definite, min eigenvalue " +
                            std::to_string(lmin));
}

inline MatR spd_sqrt(const MatR& G) {
  auto es = sym_eig(G);
  return es.operatorSqrt();
}
inline MatR spd_inv_sqrt(const MatR& G) {
  auto es = sym_eig(G);
  return es.operatorInverseSqrt();
}

/// largest generalized eigenvalue of A relative to SPD B: max eig of B^-1 A
inline double max_rel_eig(const MatR& A, const MatR& B) {
  MatR Bi = spd_inv_sqrt(B);
  return sym_eig(Bi * A * Bi).eigenvalues().maxCoeff();
}

// operator norm of symmetric A in the inner product of SPD G
inline double g_op_norm(const MatR& A, const MatR& G) {
  MatR Gi = spd_inv_sqrt(G);
  return sym_eig(Gi * A * Gi).eigenvalues().cwiseAbs().maxCoeff();
}

// minimum eigenvalue of the symmetric part (PSD slack; >= 0 means A is PSD)
inline double psd_slack(const MatR& A) {
  return sym_eig(A).eigenvalues().minCoeff();
}

inline double vec_g_norm(const VecR& v, const MatR& G) { return std::sqrt(v.dot(G * v)); }

// norm of a linear map between two inner-product spaces (input Gin, output Gout)
inline double op_g_norm2(const MatR& M, const MatR& Gout, const MatR& Gin) {
  MatR A = spd_sqrt(Gout) * M * spd_inv_sqrt(Gin);
  return std::sqrt(sym_eig(A.transpose() * A).eigenvalues().maxCoeff());
}

}  // namespace phasecalc
