#pragma once

// Guaranteed energy-error bound evaluated exactly in TT format from quadrature
// values of the discrete solution, the flux and the data.

#include "ttcert/complementary_solver.hpp"
#include "ttcert/fem_assembly.hpp"
#include "ttcert/tt_core.hpp"

#include <optional>
#include <vector>

namespace ttcert {

/// Sharp Poincare constant of a box with side lengths L: 1 / (pi sqrt(sum L^-2)).
double poincare_constant(const std::vector<double>& side_lengths);
double poincare_constant(const CartesianGrid& grid);

/// Quadrature values of u_h, its gradient, the flux components and div tau.
/// Every field is an exact TT matvec of the coefficient tensors.
struct FemFieldValues {
  TtVector u;
  std::vector<TtVector> grad_u;
  std::vector<TtVector> tau;
  TtVector div_tau;
};
FemFieldValues collocate_fem_fields(const TtVector& u_h, const BlockTtVector& tau, const QuadratureGrid& quad);

/// Error terms multiplied by square roots of the quadrature weights:
/// eta1[s] = sqrt(w) (tau_s - d_s u_h) and eta2 = c (.) g with
/// c = sqrt(w) kappa_tilde^{-1} and g = Pi r + div tau. eta2 is kept as the
/// factor pair because its norm is contracted exactly without forming it.
struct EtaTerms {
  std::vector<TtVector> eta1;
  TtVector eta2_weight;
  TtVector eta2_residual;

  double eta1_norm() const;
  double eta2_norm() const;
  /// Explicit eta2 TT (ranks multiply).
  TtVector eta2() const;
};
EtaTerms eta_terms(const FemFieldValues& fields, const TtVector& kappa_tilde_inv, const TtVector& pi_r,
                   const QuadratureGrid& quad);

/// Quadrature values of r = f - kappa^2 u_h (kappa2 may be null for kappa = 0).
TtVector residual_values(const TtVector& f, const TtVector* kappa2, const TtVector& u_values);

/// Oscillation bound C_osc ||r - Pi r|| with C_osc = max_K h_K / pi, or
/// kappa2_floor^{-1/2} when that is smaller (kappa2_floor <= 0: kappa may vanish).
double oscillation_bound(const TtVector& r, const QuadratureGrid& quad, double kappa2_floor);
double oscillation_constant(const CartesianGrid& grid, double kappa2_floor);

/// Data of the bound, all collocated on one quadrature grid.
struct EstimatorInputs {
  TtVector f;
  std::optional<TtVector> kappa2;  ///< empty means kappa = 0
  TtVector kappa_tilde_inv;        ///< (kappa + kappa0)^{-1}
  double kappa2_floor = 0.0;       ///< certified lower bound of kappa^2; <= 0 when kappa may vanish
  double kappa0 = 0.0;
  /// (kappa + kappa0)^{-2}. When set, ||eta2|| is contracted against it
  /// instead of the Hadamard square of kappa_tilde_inv, whose rank is squared.
  std::optional<TtVector> kappa_tilde_inv_sq;
};

struct ErrorCertificate {
  double eta1_norm = 0.0;
  double eta2_norm = 0.0;
  double osc_bound = 0.0;
  double shift_term = 0.0;   ///< kappa0 C_P ||eta2||
  double total_bound = 0.0;  ///< sqrt(eta1^2 + eta2^2) + osc + shift
  double poincare_cp = 0.0;
  double kappa0 = 0.0;
  double osc_constant = 0.0;
  Index max_rank = 0;        ///< largest TT rank among the intermediate fields
};

/// Guaranteed upper bound of |||u - u_h||| from u_h and the flux tau.
ErrorCertificate certify(const TtVector& u_h, const BlockTtVector& tau, const EstimatorInputs& in,
                         const QuadratureGrid& quad);

/// |||u - u_h||| by quadrature from values of the exact solution and its
/// gradient (kappa2 may be null for kappa = 0).
double energy_error(const TtVector& u_values, const std::vector<TtVector>& grad_values, const TtVector* kappa2,
                    const TtVector& u_h, const QuadratureGrid& quad);

}  // namespace ttcert
