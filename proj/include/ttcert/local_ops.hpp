#pragma once

// Building blocks of the alternating solvers: partial projections of a TT
// operator onto left/right frames ("interfaces") and the reduced operator
// acting on a single core.

#include "ttcert/tt_core.hpp"

namespace ttcert {

/// Three-index interface phi(y, a, x) with shape (ry, ra, rx), stored
/// column-major with the y index fastest.
struct Interface3 {
  Index ry = 1, ra = 1, rx = 1;
  std::vector<double> data{1.0};

  double operator()(Index y, Index a, Index x) const { return data[y + ry * (a + ra * x)]; }
  ConstMatrixMap as_matrix() const { return {data.data(), Eigen::Index(ry * ra), Eigen::Index(rx)}; }
};

/// Extend a left interface over one more core: result covers cores 0..k.
Interface3 interface_left_step(const Interface3& prev, const Core3& y, const Core4& a, Index band,
                               const Core3& x);
/// Extend a right interface over one more core: result covers cores k..d-1.
Interface3 interface_right_step(const Interface3& next, const Core3& y, const Core4& a, Index band,
                                const Core3& x);

/// Interfaces of y^T b for a TT vector b: matrices of shape (ry, rb).
Matrix vec_interface_left_step(const Matrix& prev, const Core3& y, const Core3& b);
Matrix vec_interface_right_step(const Matrix& next, const Core3& y, const Core3& b);

/// y (shape L.ry x m x R.ry) (+)= (L ⊗ A ⊗ R) x with x of shape L.rx x n x R.rx.
void local_apply(const Interface3& left, const Core4& a, Index band, const Interface3& right, const double* x,
                 double* y, bool accumulate = false);

/// Projected right-hand side L ⊗ b ⊗ R, shape (L.rows, n, R.rows).
Vector local_rhs(const Matrix& left, const Core3& b, const Matrix& right);

/// Dense reduced matrix of L ⊗ A ⊗ R (requires L.ry == L.rx, R.ry == R.rx).
Matrix local_dense(const Interface3& left, const Core4& a, Index band, const Interface3& right);

}  // namespace ttcert
