#pragma once

#include "ttcert/tt_core.hpp"

#include <functional>
#include <vector>

namespace ttcert {

/// Cholesky factorization of a symmetric positive definite band matrix.
/// Only the lower band is stored.
class BandedCholesky {
 public:
  BandedCholesky() = default;
  BandedCholesky(Index n, Index bandwidth);

  Index size() const { return n_; }
  Index bandwidth() const { return bw_; }

  /// Accumulate into entry (i, j) with i >= j and i - j <= bandwidth.
  void add(Index i, Index j, double v) { band_[(i - j) + (bw_ + 1) * j] += v; }
  double entry(Index i, Index j) const { return band_[(i - j) + (bw_ + 1) * j]; }

  /// Factorize in place; false if a non-positive pivot appears.
  bool factor();
  /// Solve A x = b in place (requires a successful factor()).
  void solve(double* x) const;

 private:
  double& at(Index i, Index j) { return band_[(i - j) + (bw_ + 1) * j]; }
  double at(Index i, Index j) const { return band_[(i - j) + (bw_ + 1) * j]; }
  Index n_ = 0, bw_ = 0;
  std::vector<double> band_;
};

using LinearOperator = std::function<void(const double* x, double* y)>;
using Preconditioner = std::function<void(double* x)>;

struct KrylovResult {
  int iterations = 0;
  double rel_residual = 0.0;  ///< ||b - A x|| / ||b||
  bool converged = false;
  bool stagnated = false;
};

/// Restarted GMRES with right preconditioning; x holds the initial guess on
/// entry. Stops when ||b - A x|| <= rtol ||b||, after max_iter iterations, or
/// when a restart cycle reduces the residual by less than 1%.
KrylovResult gmres(const LinearOperator& apply, const Preconditioner& precond, const Vector& b, Vector& x,
                   int restart, int max_iter, double rtol);

/// Preconditioned conjugate gradients for SPD systems; x holds the initial guess.
KrylovResult pcg(const LinearOperator& apply, const Preconditioner& precond, const Vector& b, Vector& x,
                 int max_iter, double rtol);

/// Row indices of a quasi-maximal-volume r x r submatrix of the tall matrix a.
std::vector<Index> maxvol(const Matrix& a, double tol = 1.05, int max_iter = 200);

}  // namespace ttcert
