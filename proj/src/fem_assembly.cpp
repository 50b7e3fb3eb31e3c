#include "ttcert/fem_assembly.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ttcert {

Grid1D::Grid1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 3) throw std::invalid_argument("Grid1D: need at least two intervals");
  for (Index i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("Grid1D: nodes must increase strictly");
}

Grid1D Grid1D::uniform(double a, double b, Index n) {
  if (n < 2) throw std::invalid_argument("Grid1D::uniform: n must be at least 2");
  if (!(b > a)) throw std::invalid_argument("Grid1D::uniform: empty interval");
  std::vector<double> z(n + 1);
  const double h = (b - a) / double(n);
  for (Index i = 0; i <= n; ++i) z[i] = a + h * double(i);
  z[n] = b;
  return Grid1D(std::move(z));
}

double Grid1D::max_h() const {
  double h = 0.0;
  for (Index e = 0; e < n(); ++e) h = std::max(h, this->h(e));
  return h;
}

CartesianGrid::CartesianGrid(std::vector<Grid1D> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("CartesianGrid: no axes");
}

CartesianGrid CartesianGrid::uniform(const std::vector<std::pair<double, double>>& box, Index n) {
  std::vector<Grid1D> axes;
  for (const auto& [a, b] : box) axes.push_back(Grid1D::uniform(a, b, n));
  return CartesianGrid(std::move(axes));
}

std::vector<double> CartesianGrid::side_lengths() const {
  std::vector<double> l;
  for (const auto& g : axes_) l.push_back(g.b() - g.a());
  return l;
}

double CartesianGrid::max_h() const {
  double h = 0.0;
  for (const auto& g : axes_) h = std::max(h, g.max_h());
  return h;
}

GaussRule gauss_legendre(int m, double lo, double hi) {
  if (m < 1 || m > 10) throw std::invalid_argument("gauss_legendre: m must be in 1..10");
  if (!(hi > lo)) throw std::invalid_argument("gauss_legendre: empty interval");
  GaussRule rule{Vector(m), Vector(m)};
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  // P_m(x) and P_m'(x) by the three-term recurrence.
  auto legendre = [m](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / double(k);
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = double(m) * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(m) + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    rule.nodes[m - 1 - i] = mid + half * x;
    rule.weights[m - 1 - i] = half * 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureGrid1D::QuadratureGrid1D(const Grid1D& grid, int m) : grid_(grid), m_(m) {
  const Index n = grid.n();
  nodes_.resize(Eigen::Index(n * Index(m)));
  weights_.resize(Eigen::Index(n * Index(m)));
  for (Index e = 0; e < n; ++e) {
    const GaussRule r = gauss_legendre(m, grid.node(e), grid.node(e + 1));
    nodes_.segment(Eigen::Index(e * Index(m)), m) = r.nodes;
    weights_.segment(Eigen::Index(e * Index(m)), m) = r.weights;
  }
}

QuadratureGrid::QuadratureGrid(const CartesianGrid& grid, int m) : m_(m) {
  for (const auto& g : grid.axes()) axes_.emplace_back(g, m);
}

std::vector<Index> QuadratureGrid::mode_sizes() const {
  std::vector<Index> s;
  for (const auto& a : axes_) s.push_back(a.size());
  return s;
}

TtVector QuadratureGrid::weights_tt() const {
  std::vector<Vector> f;
  for (const auto& a : axes_) f.push_back(a.weights());
  return tt_from_rank1(f);
}

TtVector QuadratureGrid::sqrt_weights_tt() const {
  std::vector<Vector> f;
  for (const auto& a : axes_) f.push_back(a.weights().cwiseSqrt());
  return tt_from_rank1(f);
}

BasisTable1D make_basis_table(BasisKind kind, const QuadratureGrid1D& quad) {
  const Grid1D& g = quad.grid();
  const Index n = g.n(), m = Index(quad.m());
  BasisTable1D t;
  t.kind = kind;
  t.dim = kind == BasisKind::hat ? n + 1 : 2 * n + 1;
  t.values = Matrix::Zero(Eigen::Index(n * m), Eigen::Index(t.dim));
  t.derivs = Matrix::Zero(Eigen::Index(n * m), Eigen::Index(t.dim));
  t.active.resize(n);
  for (Index e = 0; e < n; ++e) {
    const double z0 = g.node(e), h = g.h(e);
    switch (kind) {
      case BasisKind::hat: t.active[e] = {e, e + 1}; break;
      case BasisKind::broken: t.active[e] = {2 * e + 1, 2 * e + 2}; break;
      case BasisKind::p2: t.active[e] = {2 * e, 2 * e + 1, 2 * e + 2}; break;
    }
    for (Index q = 0; q < m; ++q) {
      const Index l = e * m + q;
      const double s = (quad.nodes()[Eigen::Index(l)] - z0) / h;
      const auto L = Eigen::Index(l);
      const auto& act = t.active[e];
      if (kind == BasisKind::p2) {
        t.values(L, Eigen::Index(act[0])) = (1.0 - s) * (1.0 - 2.0 * s);
        t.values(L, Eigen::Index(act[1])) = 4.0 * s * (1.0 - s);
        t.values(L, Eigen::Index(act[2])) = s * (2.0 * s - 1.0);
        t.derivs(L, Eigen::Index(act[0])) = (4.0 * s - 3.0) / h;
        t.derivs(L, Eigen::Index(act[1])) = (4.0 - 8.0 * s) / h;
        t.derivs(L, Eigen::Index(act[2])) = (4.0 * s - 1.0) / h;
      } else {
        t.values(L, Eigen::Index(act[0])) = 1.0 - s;
        t.values(L, Eigen::Index(act[1])) = s;
        t.derivs(L, Eigen::Index(act[0])) = -1.0 / h;
        t.derivs(L, Eigen::Index(act[1])) = 1.0 / h;
      }
    }
  }
  return t;
}

std::pair<Matrix, Matrix> assemble_1d_pair(const Grid1D& grid) {
  const Index n = grid.n();
  Matrix L = Matrix::Zero(Eigen::Index(n + 1), Eigen::Index(n + 1));
  Matrix M = Matrix::Zero(Eigen::Index(n + 1), Eigen::Index(n + 1));
  for (Index e = 0; e < n; ++e) {
    const double h = grid.h(e);
    const auto i = Eigen::Index(e), j = Eigen::Index(e + 1);
    L(i, i) += 1.0 / h;
    L(j, j) += 1.0 / h;
    L(i, j) -= 1.0 / h;
    L(j, i) -= 1.0 / h;
    M(i, i) += h / 3.0;
    M(j, j) += h / 3.0;
    M(i, j) += h / 6.0;
    M(j, i) += h / 6.0;
  }
  for (Eigen::Index b : {Eigen::Index(0), Eigen::Index(n)}) {
    L.row(b).setZero();
    L.col(b).setZero();
    M.row(b).setZero();
    M.col(b).setZero();
    L(b, b) = 1.0;
    M(b, b) = 1.0;
  }
  return {std::move(L), std::move(M)};
}

Matrix weighted_1d_matrix(const Vector& coeff, const BasisTable1D& row, bool row_deriv, const BasisTable1D& col,
                          bool col_deriv, const QuadratureGrid1D& quad) {
  if (Index(coeff.size()) != quad.size() || Index(row.values.rows()) != quad.size() ||
      Index(col.values.rows()) != quad.size())
    throw std::invalid_argument("weighted_1d_matrix: length mismatch");
  const Matrix& R = row_deriv ? row.derivs : row.values;
  const Matrix& C = col_deriv ? col.derivs : col.values;
  Matrix out = Matrix::Zero(Eigen::Index(row.dim), Eigen::Index(col.dim));
  const Index m = Index(quad.m());
  for (Index e = 0; e < quad.elements(); ++e) {
    for (Index i : row.active[e])
      for (Index j : col.active[e]) {
        double s = 0.0;
        for (Index q = 0; q < m; ++q) {
          const auto l = Eigen::Index(e * m + q);
          s += quad.weights()[l] * coeff[l] * R(l, Eigen::Index(i)) * C(l, Eigen::Index(j));
        }
        out(Eigen::Index(i), Eigen::Index(j)) += s;
      }
  }
  return out;
}

Matrix mass_1d_matrix(const BasisTable1D& basis, const QuadratureGrid1D& quad) {
  Matrix m = weighted_1d_matrix(Vector::Ones(Eigen::Index(quad.size())), basis, false, basis, false, quad);
  if (basis.kind == BasisKind::broken) m(0, 0) = 1.0;
  return m;
}

Matrix interpolation_matrix(const BasisTable1D& basis, bool derivative) {
  return derivative ? basis.derivs : basis.values;
}

Matrix q1_projection_matrix(const QuadratureGrid1D& quad) {
  const Grid1D& g = quad.grid();
  const Index m = Index(quad.m()), size = quad.size();
  Matrix p = Matrix::Zero(Eigen::Index(size), Eigen::Index(size));
  for (Index e = 0; e < g.n(); ++e) {
    Matrix b(static_cast<Eigen::Index>(m), 2);
    Vector w(static_cast<Eigen::Index>(m));
    for (Index q = 0; q < m; ++q) {
      const auto l = Eigen::Index(e * m + q);
      const double s = (quad.nodes()[l] - g.node(e)) / g.h(e);
      b(Eigen::Index(q), 0) = 1.0 - s;
      b(Eigen::Index(q), 1) = s;
      w[Eigen::Index(q)] = quad.weights()[l];
    }
    const Matrix bw = b.transpose() * w.asDiagonal();  // 2 x m
    const Matrix gram = bw * b;
    p.block(Eigen::Index(e * m), Eigen::Index(e * m), Eigen::Index(m), Eigen::Index(m)) = b * gram.ldlt().solve(bw);
  }
  return p;
}

Matrix q1_projection_matrix(const Grid1D& grid, int m) { return q1_projection_matrix(QuadratureGrid1D(grid, m)); }

void zero_hat_boundary(Matrix& a) {
  for (Eigen::Index b : {Eigen::Index(0), a.rows() - 1}) {
    a.row(b).setZero();
    a.col(b).setZero();
  }
}

TtVector q1_values(const TtVector& coeffs, const QuadratureGrid& quad, Index derivative) {
  if (coeffs.dim() != quad.dim()) throw std::invalid_argument("q1_values: dimension mismatch");
  std::vector<Matrix> maps;
  for (Index k = 0; k < quad.dim(); ++k) {
    const BasisTable1D hat = make_basis_table(BasisKind::hat, quad.axis(k));
    maps.push_back(interpolation_matrix(hat, k == derivative));
  }
  return tt_apply_modes(coeffs, maps);
}

TtVector q1_project(const TtVector& values, const QuadratureGrid& quad) {
  if (values.mode_sizes() != quad.mode_sizes()) throw std::invalid_argument("q1_project: grid mismatch");
  std::vector<Matrix> maps;
  for (Index k = 0; k < quad.dim(); ++k) maps.push_back(q1_projection_matrix(quad.axis(k)));
  return tt_apply_modes(values, maps);
}

std::vector<Matrix> rt1_component_maps(const QuadratureGrid& quad, Index s, bool derivative_in_s) {
  std::vector<Matrix> maps;
  for (Index k = 0; k < quad.dim(); ++k) {
    const BasisTable1D t = make_basis_table(k == s ? BasisKind::p2 : BasisKind::broken, quad.axis(k));
    maps.push_back(interpolation_matrix(t, k == s && derivative_in_s));
  }
  return maps;
}

}  // namespace ttcert
