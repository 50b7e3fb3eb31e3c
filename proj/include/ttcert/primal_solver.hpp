#pragma once

#include "ttcert/fem_assembly.hpp"
#include "ttcert/tt_core.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ttcert {

/// Discrete primal problem (grad u, grad v) + (kappa^2 u, v) = (f, v) on Q1
/// elements. Index 0 and n of every direction are boundary indices.
struct PrimalSystem {
  TtMatrix A;  ///< boundary rows/columns decoupled as in assemble_1d_pair
  TtVector b;  ///< zero at boundary indices
  CartesianGrid grid;
};

/// Kronecker-sum Laplacian with TT ranks (1, 2, ..., 2, 1).
TtMatrix assemble_laplace_tt(const CartesianGrid& grid);

/// Reaction matrix (kappa^2 phi_j, phi_i) from collocated kappa^2 values; its
/// TT ranks equal those of the field. Boundary rows and columns are zero.
TtMatrix assemble_reaction_tt(const TtVector& kappa2, const QuadratureGrid& quad);

/// Load vector (f, phi_i) from collocated f values; boundary entries are zero.
TtVector assemble_rhs_tt(const TtVector& f, const QuadratureGrid& quad);

/// Full primal system. A null kappa2 pointer means kappa = 0.
PrimalSystem assemble_primal(const QuadratureGrid& quad, const TtVector* kappa2, const TtVector& f);

/// Restrict every direction to the interior indices 1..n-1.
TtMatrix restrict_interior(const TtMatrix& a);
TtVector restrict_interior(const TtVector& x);
/// Inverse of restrict_interior for vectors: pad with zero boundary entries.
TtVector pad_boundary(const TtVector& x);

struct AlsOptions {
  double tol = 1e-3;           ///< stopping threshold on the relative change per sweep
  int max_sweeps = 50;
  Index kickrank = 3;          ///< residual enrichment rank, 0 disables enrichment
  bool truncate = true;        ///< SVD truncation at tol when moving; false keeps ranks (QR moves)
  Index max_rank = 0;          ///< 0 means unbounded
  Index dense_limit = 2000;    ///< local systems up to this size are solved by Cholesky
  int max_local_iterations = 1000;
  std::uint64_t seed = 1;      ///< seed of the enrichment initial guess
};

struct AlsReport {
  int sweeps = 0;
  bool converged = false;
  std::vector<double> changes;   ///< relative solution change of every sweep
  std::vector<double> energies;  ///< 1/2 x^T A x - x^T b after each local solve
  Index max_rank = 0;
  int local_solves = 0;
  int dense_solves = 0;
  long krylov_iterations = 0;
  int krylov_stagnations = 0;  ///< local Krylov solves flagged as stagnated
  double seconds = 0.0;
};

struct AlsResult {
  TtVector x;
  AlsReport report;
};

/// Alternating linear scheme for A x = b with A symmetric positive definite,
/// with optional residual-based rank enrichment.
AlsResult als_solve(const TtMatrix& a, const TtVector& b, const TtVector& x0, const AlsOptions& opt);

/// Seeded random rank-2 initial guess on the given mode sizes.
TtVector primal_initial_guess(const std::vector<Index>& modes, std::uint64_t seed);

/// Solve the interior system of a PrimalSystem and return the padded solution.
AlsResult solve_primal(const PrimalSystem& sys, const AlsOptions& opt, std::uint64_t seed);

}  // namespace ttcert
