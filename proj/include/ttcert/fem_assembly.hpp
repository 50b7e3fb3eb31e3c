#pragma once

#include "ttcert/tt_core.hpp"

#include <utility>
#include <vector>

namespace ttcert {

/// Nodes z_0 < z_1 < ... < z_n of one coordinate direction.
class Grid1D {
 public:
  explicit Grid1D(std::vector<double> nodes);
  static Grid1D uniform(double a, double b, Index n);

  Index n() const { return nodes_.size() - 1; }  ///< number of intervals
  double a() const { return nodes_.front(); }
  double b() const { return nodes_.back(); }
  double node(Index i) const { return nodes_[i]; }
  /// Length of interval e (0-based, e < n).
  double h(Index e) const { return nodes_[e + 1] - nodes_[e]; }
  double max_h() const;
  const std::vector<double>& nodes() const { return nodes_; }

 private:
  std::vector<double> nodes_;
};

class CartesianGrid {
 public:
  explicit CartesianGrid(std::vector<Grid1D> axes);
  static CartesianGrid uniform(const std::vector<std::pair<double, double>>& box, Index n);

  Index dim() const { return axes_.size(); }
  const Grid1D& axis(Index k) const { return axes_[k]; }
  const std::vector<Grid1D>& axes() const { return axes_; }
  std::vector<double> side_lengths() const;
  /// Largest interval length over all directions.
  double max_h() const;

 private:
  std::vector<Grid1D> axes_;
};

struct GaussRule {
  Vector nodes;
  Vector weights;
};

/// m-point Gauss-Legendre rule on [lo, hi], m in 1..10.
GaussRule gauss_legendre(int m, double lo, double hi);

/// Composite Gauss-Legendre nodes of one direction, ordered element by element.
class QuadratureGrid1D {
 public:
  QuadratureGrid1D(const Grid1D& grid, int m);

  int m() const { return m_; }
  Index size() const { return Index(nodes_.size()); }
  Index elements() const { return size() / Index(m_); }
  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }
  Index element_of(Index l) const { return l / Index(m_); }
  const Grid1D& grid() const { return grid_; }

 private:
  Grid1D grid_;
  int m_;
  Vector nodes_, weights_;
};

class QuadratureGrid {
 public:
  QuadratureGrid(const CartesianGrid& grid, int m);

  int m() const { return m_; }
  Index dim() const { return axes_.size(); }
  const QuadratureGrid1D& axis(Index k) const { return axes_[k]; }
  std::vector<Index> mode_sizes() const;
  /// Rank-1 TT of the tensorized weights w(l) = prod_k w_k(l_k).
  TtVector weights_tt() const;
  TtVector sqrt_weights_tt() const;

 private:
  int m_;
  std::vector<QuadratureGrid1D> axes_;
};

enum class BasisKind {
  hat,     ///< continuous P1, functions 0..n (nodal hats)
  broken,  ///< discontinuous P1, index 0 is a padding function, 2e+1 / 2e+2 live on element e
  p2       ///< continuous P2, Lagrange: 2i is the vertex function of z_i, 2e+1 the midpoint of element e
};

/// Values and first derivatives of a 1D basis at all quadrature nodes.
struct BasisTable1D {
  BasisKind kind;
  Index dim = 0;
  Matrix values;  ///< (m n) x dim
  Matrix derivs;  ///< (m n) x dim
  std::vector<std::vector<Index>> active;  ///< basis indices supported on each element

  /// Index of the padding function of the broken basis, or dim when absent.
  Index padding_index() const { return kind == BasisKind::broken ? 0 : dim; }
};

BasisTable1D make_basis_table(BasisKind kind, const QuadratureGrid1D& quad);

/// Stiffness and mass matrices of the hat basis; rows/columns 0 and n hold a
/// unit diagonal and are zero otherwise.
std::pair<Matrix, Matrix> assemble_1d_pair(const Grid1D& grid);

/// Entry (i, j) = sum_l w(l) coeff(l) B_row(l, i) B_col(l, j), with values or
/// derivatives selected by the flags.
Matrix weighted_1d_matrix(const Vector& coeff, const BasisTable1D& row, bool row_deriv, const BasisTable1D& col,
                          bool col_deriv, const QuadratureGrid1D& quad);

/// Unweighted Gram matrix; the padding function of the broken basis receives a
/// unit diagonal so that the matrix stays nonsingular.
Matrix mass_1d_matrix(const BasisTable1D& basis, const QuadratureGrid1D& quad);

/// Map from basis coefficients to (derivative) values at quadrature nodes.
Matrix interpolation_matrix(const BasisTable1D& basis, bool derivative);

/// Elementwise L2-orthogonal projection onto linears, acting on quadrature values.
Matrix q1_projection_matrix(const QuadratureGrid1D& quad);
Matrix q1_projection_matrix(const Grid1D& grid, int m = 4);

/// Zero the boundary rows and columns (indices 0 and n) of a hat-basis matrix.
void zero_hat_boundary(Matrix& a);

// Finite element functions sampled on quadrature grids ---------------------

/// Values of a Q1 function (hat coefficients) at the quadrature nodes, or of
/// its partial derivative in direction `derivative` when that is < dim.
TtVector q1_values(const TtVector& coeffs, const QuadratureGrid& quad, Index derivative = Index(-1));

/// Elementwise L2 projection onto Q1 of quadrature values (Kronecker product
/// of the 1D projections).
TtVector q1_project(const TtVector& values, const QuadratureGrid& quad);

/// Per-direction basis tables of the RT1 component s: P2 in direction s,
/// broken P1 elsewhere; `derivative_in_s` selects d/dx_s of the P2 factor.
std::vector<Matrix> rt1_component_maps(const QuadratureGrid& quad, Index s, bool derivative_in_s);

}  // namespace ttcert
