#pragma once

// Independent dense reference computations used as test oracles.

#include "ttcert/tt_core.hpp"

#include <functional>
#include <vector>

namespace oracle {

using ttcert::Index;
using ttcert::Matrix;
using ttcert::Vector;

/// Kronecker product with the first factor varying slowest.
Matrix kron(const std::vector<Matrix>& factors);
Vector kron_vec(const std::vector<Vector>& factors);

}  // namespace oracle

namespace oracle {

/// Three-point Gauss-Legendre rule on [lo, hi], written out explicitly.
void gauss3(double lo, double hi, double nodes[3], double weights[3]);

/// Dense Q1 stiffness matrix on a 2D tensor grid by element loops; the first
/// coordinate index varies slowest. Boundary rows/columns are not modified.
Matrix q1_stiffness_2d(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle

namespace oracle {

using Fn2 = std::function<double(double, double)>;

/// Dense (c phi_j, phi_i) for Q1 hats on a 2D tensor grid (3-point Gauss per
/// direction, element loops); the first coordinate index varies slowest.
Matrix q1_weighted_mass_2d(const std::vector<double>& x, const std::vector<double>& y, const Fn2& c);

/// Dense load vector (f, phi_i) for Q1 hats on a 2D tensor grid.
Vector q1_load_2d(const std::vector<double>& x, const std::vector<double>& y, const Fn2& f);

/// Explicit frame matrix of a TT vector at core k: columns are indexed by the
/// entries of core k (left rank fastest), rows by the global index.
Matrix frame_matrix(const ttcert::TtVector& x, Index k);

}  // namespace oracle

namespace oracle {

/// Dense RT1 block system on a 2D tensor grid with component-major ordering
/// s * N + (j0 * (2 n1 + 1) + j1): entries (sigma div, div) + (psi, psi) and
/// rhs (q, d/dx_s psi^{(s)}). Broken P1 padding functions are zero and carry
/// a unit factor in the mass.
struct Rt1System {
  Matrix B;
  Vector g;
};
Rt1System rt1_system_2d(const std::vector<double>& x, const std::vector<double>& y, const Fn2& sigma, const Fn2& q);

}  // namespace oracle

namespace oracle {

/// Squared estimator quantities on a 2D tensor grid by element loops with
/// 3-point Gauss rules. uh is (n0+1) x (n1+1) hat coefficients, tau is the
/// component-major RT1 coefficient vector of rt1_system_2d.
struct EstimatorSquares {
  double eta1 = 0.0;      ///< ||tau - grad u_h||^2
  double eta2 = 0.0;      ///< ||kt_inv (Pi r + div tau)||^2
  double osc = 0.0;       ///< ||r - Pi r||^2 with r = f - kappa2 u_h
  double energy = 0.0;    ///< ||grad(u - u_h)||^2 + ||kappa (u - u_h)||^2
};
EstimatorSquares estimator_squares_2d(const std::vector<double>& x, const std::vector<double>& y, const Matrix& uh,
                                      const Vector& tau, const Fn2& f, const Fn2& kappa2, const Fn2& kt_inv,
                                      const Fn2& u, const Fn2& ux, const Fn2& uy);

}  // namespace oracle

namespace oracle {

/// Value at (px, py) of the Q1 function with hat coefficients uh.
double q1_eval_2d(const std::vector<double>& x, const std::vector<double>& y, const Matrix& uh, double px, double py);

/// Value at (px, py) of the elementwise L2 projection onto Q1 of
/// r = f - kappa2 u_h, computed on the containing element with 3-point Gauss rules.
double projected_residual_2d(const std::vector<double>& x, const std::vector<double>& y, const Matrix& uh,
                             const Fn2& f, const Fn2& kappa2, double px, double py);

}  // namespace oracle
