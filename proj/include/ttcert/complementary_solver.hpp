#pragma once

// Low-rank RT1 flux reconstruction: the d x d block system of the
// complementary functional and its block alternating solver.

#include "ttcert/fem_assembly.hpp"
#include "ttcert/primal_solver.hpp"
#include "ttcert/tt_core.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace ttcert {

/// TT vector whose core at position() carries an extra component index s.
/// The block core is stored as a Core3 of shape (r0, n, r1 * components)
/// with the merged right index b + r1 * s, so every component slice is a
/// contiguous (r0, n, r1) core.
class BlockTtVector {
 public:
  BlockTtVector() = default;
  BlockTtVector(std::vector<Core3> cores, Index position, Index components);

  Index dim() const { return cores_.size(); }
  Index position() const { return position_; }
  Index components() const { return components_; }
  std::vector<Index> mode_sizes() const;
  /// TT ranks r_0..r_d without the component index.
  std::vector<Index> ranks() const;
  Index max_rank() const;

  /// Core k; at the block position this is the merged block core.
  const Core3& core(Index k) const { return cores_[k]; }
  const std::vector<Core3>& cores() const { return cores_; }
  std::vector<Core3> release() && { return std::move(cores_); }

  /// Component slice s of the block core, shape (r0, n, r1).
  Core3 slice(Index s) const;
  /// TT vector of component s.
  TtVector component(Index s) const;

  /// Seeded Gaussian cores with interior ranks capped at `rank`, the block at
  /// `position`, and all other cores orthogonalized towards it.
  static BlockTtVector random(const std::vector<Index>& modes, Index rank, Index components, Index position,
                              std::uint64_t seed);

 private:
  std::vector<Core3> cores_;
  Index position_ = 0;
  Index components_ = 0;
};

enum class BlockDirection { left, right };

/// Relocate the component index one core over by an SVD split of the block
/// core, dropping singular values while ||T - P S Q||_F <= rel_tol ||T||_F.
/// The core left behind is orthonormal. rel_tol = 0 only drops numerically
/// zero singular values.
BlockTtVector move_block_index(const BlockTtVector& tau, BlockDirection direction, double rel_tol,
                               Index max_rank = 0);

/// Block system sum_l B_{s,l} tau_l = g_s over RT1 components. Every B_{s,l}
/// is a Kronecker product per rank term, so only the distinct 1D factors are
/// stored:
///  - weighted[k][c]: sigma-weighted core of direction k; c = 2 * row_p2 + col_p2
///    where row_p2 (col_p2) selects d/dx_k of P2 instead of broken P1 values;
///  - mass_p2[k], mass_broken[k]: unweighted rank-1 mass cores;
///  - rhs_deriv[k], rhs_value[k]: cores of g_s in direction k for k == s and k != s.
struct ComplementarySystem {
  std::vector<Index> modes;  ///< 2 n_k + 1 per direction
  TtVector sigma;            ///< collocated kappa_tilde^{-2}
  std::vector<std::array<std::shared_ptr<const Core4>, 4>> weighted;
  std::vector<std::shared_ptr<const Core4>> mass_p2, mass_broken;
  std::vector<Core3> rhs_deriv, rhs_value;

  Index dim() const { return modes.size(); }
  /// sigma-weighted divergence part of B_{s,l}.
  TtMatrix divergence_block(Index s, Index l) const;
  /// Unweighted mass part of B_{s,s}.
  TtMatrix mass_block(Index s) const;
  /// Full B_{s,l} (divergence part plus mass when s == l).
  TtMatrix block(Index s, Index l) const;
  TtVector rhs(Index s) const;
};

/// Assemble the block system from quadrature values q of the right-hand side
/// density: g_s = (q, d/dx_s psi^{(s)}).
ComplementarySystem assemble_complementary_from_density(const QuadratureGrid& quad, const TtVector& sigma,
                                                        const TtVector& q);

/// Assemble the block system of the flux reconstruction for a primal solution
/// u_h. The density is q = -(sigma (Pi r) + u_h) with r = f - kappa^2 u_h,
/// rounded at rhs_tol; a null kappa2 means kappa = 0.
ComplementarySystem assemble_complementary(const QuadratureGrid& quad, const TtVector& sigma, const TtVector& u_h,
                                           const TtVector* kappa2, const TtVector& f, double rhs_tol);

/// Quadrature values of the density q = -(sigma (Pi r) + u_h), rounded at rhs_tol.
TtVector complementary_density(const QuadratureGrid& quad, const TtVector& sigma, const TtVector& u_h,
                               const TtVector* kappa2, const TtVector& f, double rhs_tol);

struct BlockAlsOptions {
  double tol = 1e-7;        ///< truncation of block moves and stopping threshold
  int max_sweeps = 50;
  bool truncate = true;     ///< false moves the block with rel_tol = 0
  Index max_rank = 0;       ///< 0 means unbounded
  int gmres_restart = 50;
  int gmres_max_iter = 500;
  double gmres_tol_factor = 1e-3;  ///< GMRES relative tolerance is this times tol
  Index dense_limit = 0;    ///< local systems up to this size are solved directly
};

struct BlockAlsResult {
  BlockTtVector tau;
  AlsReport report;
};

/// Block ALS for the complementary system starting from tau0 (block at core 0,
/// cores 1..d-1 right-orthonormal).
BlockAlsResult block_als_solve(const ComplementarySystem& sys, const BlockTtVector& tau0, const BlockAlsOptions& opt);

/// Seeded rank-2 initial flux with the block at core 0.
BlockTtVector complementary_initial_guess(const ComplementarySystem& sys, std::uint64_t seed);

/// Value 1/2 tau^T B tau - tau^T g of the discrete functional (dense, tests only).
double complementary_energy(const ComplementarySystem& sys, const BlockTtVector& tau);

}  // namespace ttcert
