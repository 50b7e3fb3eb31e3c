#include "ttcert/primal_solver.hpp"

#include "ttcert/linalg.hpp"
#include "ttcert/local_ops.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ttcert {

namespace {

Core4 core_from_slices(Index r0, Index r1, const std::vector<std::vector<Matrix>>& slices) {
  const Matrix& s0 = slices[0][0];
  Core4 c(r0, Index(s0.rows()), Index(s0.cols()), r1);
  for (Index a = 0; a < r0; ++a)
    for (Index b = 0; b < r1; ++b)
      if (slices[a][b].size() > 0) c.set_slice(a, b, slices[a][b]);
  return c;
}

void check_quadrature(const TtVector& field, const QuadratureGrid& quad, const char* what) {
  if (field.mode_sizes() != quad.mode_sizes()) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Block-Jacobi preconditioner of a reduced operator: one banded Cholesky
/// factor per pair of rank indices (a0, a1).
class RankBlockJacobi {
 public:
  RankBlockJacobi(const Interface3& left, const Core4& a, Index band, const Interface3& right)
      : r0_(left.ry), n_(a.m()), r1_(right.ry) {
    blocks_.reserve(r0_ * r1_);
    for (Index a1 = 0; a1 < r1_; ++a1)
      for (Index a0 = 0; a0 < r0_; ++a0) {
        BandedCholesky chol(n_, band);
        for (Index b1 = 0; b1 < a.r1(); ++b1) {
          const double rv = right(a1, b1, a1);
          if (rv == 0.0) continue;
          for (Index b0 = 0; b0 < a.r0(); ++b0) {
            const double s = left(a0, b0, a0) * rv;
            if (s == 0.0) continue;
            for (Index j = 0; j < n_; ++j)
              for (Index i = j; i < std::min(n_, j + band + 1); ++i) chol.add(i, j, s * a(b0, i, j, b1));
          }
        }
        if (!chol.factor()) throw std::runtime_error("local preconditioner: block is not positive definite");
        blocks_.push_back(std::move(chol));
      }
    buf_.resize(n_);
  }

  void apply(double* v) {
    for (Index a1 = 0; a1 < r1_; ++a1)
      for (Index a0 = 0; a0 < r0_; ++a0) {
        double* base = v + a0 + r0_ * n_ * a1;
        for (Index i = 0; i < n_; ++i) buf_[i] = base[r0_ * i];
        blocks_[a0 + r0_ * a1].solve(buf_.data());
        for (Index i = 0; i < n_; ++i) base[r0_ * i] = buf_[i];
      }
  }

 private:
  Index r0_, n_, r1_;
  std::vector<BandedCholesky> blocks_;
  std::vector<double> buf_;
};

Vector solve_local(const Interface3& left, const Core4& a, Index band, const Interface3& right, const Vector& rhs,
                   const Vector& guess, const AlsOptions& opt, AlsReport& rep) {
  const Index size = Index(rhs.size());
  ++rep.local_solves;
  if (size <= opt.dense_limit) {
    Matrix m = local_dense(left, a, band, right);
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw std::runtime_error("local solve: reduced matrix is not positive definite");
    ++rep.dense_solves;
    return llt.solve(rhs);
  }
  RankBlockJacobi prec(left, a, band, right);
  const LinearOperator op = [&](const double* x, double* y) { local_apply(left, a, band, right, x, y); };
  Vector x = guess;
  const KrylovResult kr =
      pcg(op, [&prec](double* v) { prec.apply(v); }, rhs, x, opt.max_local_iterations, 0.1 * opt.tol);
  rep.krylov_iterations += kr.iterations;
  return x;
}

double local_energy(const Interface3& left, const Core4& a, Index band, const Interface3& right, const Vector& x,
                    const Vector& rhs) {
  Vector ax(x.size());
  local_apply(left, a, band, right, x.data(), ax.data());
  return 0.5 * x.dot(ax) - x.dot(rhs);
}

Vector as_vector(const Core3& c) { return Eigen::Map<const Vector>(c.data(), Eigen::Index(c.size())); }

Core3 as_core(const Vector& v, Index r0, Index n, Index r1) {
  return Core3(r0, n, r1, std::vector<double>(v.data(), v.data() + v.size()));
}

/// Orthonormal basis of [u, extra] (columns), keeping u's span first.
Matrix augment_basis(const Matrix& u, const Matrix& extra, Matrix& r_factor) {
  Matrix aug(u.rows(), u.cols() + extra.cols());
  aug << u, extra;
  const Eigen::Index k = std::min(aug.rows(), aug.cols());
  Eigen::HouseholderQR<Matrix> qr(aug);
  Matrix q = qr.householderQ() * Matrix::Identity(aug.rows(), k);
  r_factor = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return q;
}

/// Leading left singular vectors (at most `rank` of them) of m.
Matrix leading_basis(const Matrix& m, Index rank) {
  const TruncatedSvd svd = truncated_svd(m, 0.0, std::min<Index>(rank, Index(std::min(m.rows(), m.cols()))));
  return svd.u;
}

}  // namespace

TtMatrix assemble_laplace_tt(const CartesianGrid& grid) {
  const Index d = grid.dim();
  std::vector<Matrix> L(d), M(d);
  for (Index k = 0; k < d; ++k) std::tie(L[k], M[k]) = assemble_1d_pair(grid.axis(k));
  if (d == 1) return ttm_from_kron({L[0]});
  std::vector<Core4> cores;
  const Matrix none;
  for (Index k = 0; k < d; ++k) {
    if (k == 0)
      cores.push_back(core_from_slices(1, 2, {{L[k], M[k]}}));
    else if (k + 1 == d)
      cores.push_back(core_from_slices(2, 1, {{M[k]}, {L[k]}}));
    else
      cores.push_back(core_from_slices(2, 2, {{M[k], none}, {L[k], M[k]}}));
  }
  return TtMatrix(std::move(cores));
}

TtMatrix assemble_reaction_tt(const TtVector& kappa2, const QuadratureGrid& quad) {
  check_quadrature(kappa2, quad, "assemble_reaction_tt");
  std::vector<Core4> cores;
  for (Index k = 0; k < quad.dim(); ++k) {
    const QuadratureGrid1D& q = quad.axis(k);
    const BasisTable1D hat = make_basis_table(BasisKind::hat, q);
    const Core3& c = kappa2.core(k);
    Core4 out(c.r0(), hat.dim, hat.dim, c.r1());
    Vector coeff(static_cast<Eigen::Index>(c.n()));
    for (Index a = 0; a < c.r0(); ++a)
      for (Index b = 0; b < c.r1(); ++b) {
        for (Index l = 0; l < c.n(); ++l) coeff[Eigen::Index(l)] = c(a, l, b);
        Matrix s = weighted_1d_matrix(coeff, hat, false, hat, false, q);
        zero_hat_boundary(s);
        out.set_slice(a, b, s);
      }
    cores.push_back(std::move(out));
  }
  return TtMatrix(std::move(cores));
}

TtVector assemble_rhs_tt(const TtVector& f, const QuadratureGrid& quad) {
  check_quadrature(f, quad, "assemble_rhs_tt");
  std::vector<Matrix> maps;
  for (Index k = 0; k < quad.dim(); ++k) {
    const QuadratureGrid1D& q = quad.axis(k);
    const BasisTable1D hat = make_basis_table(BasisKind::hat, q);
    Matrix m = hat.values.transpose() * q.weights().asDiagonal();
    m.row(0).setZero();
    m.row(m.rows() - 1).setZero();
    maps.push_back(std::move(m));
  }
  return tt_apply_modes(f, maps);
}

PrimalSystem assemble_primal(const QuadratureGrid& quad, const TtVector* kappa2, const TtVector& f) {
  std::vector<Grid1D> axes;
  for (Index k = 0; k < quad.dim(); ++k) axes.push_back(quad.axis(k).grid());
  CartesianGrid grid(std::move(axes));
  TtMatrix a = assemble_laplace_tt(grid);
  if (kappa2 != nullptr) a = ttm_add(a, assemble_reaction_tt(*kappa2, quad));
  return PrimalSystem{std::move(a), assemble_rhs_tt(f, quad), std::move(grid)};
}

TtMatrix restrict_interior(const TtMatrix& a) {
  std::vector<Core4> cores;
  for (Index k = 0; k < a.dim(); ++k) {
    const Core4& c = a.core(k);
    if (c.m() < 3 || c.n() < 3) throw std::invalid_argument("restrict_interior: mode too small");
    Core4 out(c.r0(), c.m() - 2, c.n() - 2, c.r1());
    for (Index b = 0; b < c.r1(); ++b)
      for (Index j = 0; j + 2 < c.n(); ++j)
        for (Index i = 0; i + 2 < c.m(); ++i)
          for (Index q = 0; q < c.r0(); ++q) out(q, i, j, b) = c(q, i + 1, j + 1, b);
    cores.push_back(std::move(out));
  }
  return TtMatrix(std::move(cores));
}

TtVector restrict_interior(const TtVector& x) {
  std::vector<Core3> cores;
  for (const Core3& c : x.cores()) {
    if (c.n() < 3) throw std::invalid_argument("restrict_interior: mode too small");
    Core3 out(c.r0(), c.n() - 2, c.r1());
    for (Index b = 0; b < c.r1(); ++b)
      for (Index i = 0; i + 2 < c.n(); ++i)
        for (Index a = 0; a < c.r0(); ++a) out(a, i, b) = c(a, i + 1, b);
    cores.push_back(std::move(out));
  }
  return TtVector(std::move(cores));
}

TtVector pad_boundary(const TtVector& x) {
  std::vector<Core3> cores;
  for (const Core3& c : x.cores()) {
    Core3 out(c.r0(), c.n() + 2, c.r1());
    for (Index b = 0; b < c.r1(); ++b)
      for (Index i = 0; i < c.n(); ++i)
        for (Index a = 0; a < c.r0(); ++a) out(a, i + 1, b) = c(a, i, b);
    cores.push_back(std::move(out));
  }
  return TtVector(std::move(cores));
}

TtVector primal_initial_guess(const std::vector<Index>& modes, std::uint64_t seed) {
  return tt_random(modes, 2, seed);
}

AlsResult als_solve(const TtMatrix& a, const TtVector& b, const TtVector& x0, const AlsOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const Index d = a.dim();
  if (b.dim() != d || x0.dim() != d || a.row_sizes() != b.mode_sizes() || a.col_sizes() != x0.mode_sizes() ||
      a.row_sizes() != a.col_sizes())
    throw std::invalid_argument("als_solve: shape mismatch");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("als_solve: tolerance must be positive");

  AlsResult res;
  AlsReport& rep = res.report;
  std::vector<Core3> x = tt_right_orthogonalize(x0).release();
  const bool enrich = opt.kickrank > 0 && d > 1;
  std::vector<Core3> z;
  if (enrich) z = tt_right_orthogonalize(tt_random(b.mode_sizes(), opt.kickrank, opt.seed)).release();

  const Interface3 unit;
  const Matrix one = Matrix::Ones(1, 1);
  std::vector<Interface3> xax_l(d + 1, unit), xax_r(d + 1, unit), zax_l(d + 1, unit), zax_r(d + 1, unit);
  std::vector<Matrix> xb_l(d + 1, one), xb_r(d + 1, one), zb_l(d + 1, one), zb_r(d + 1, one);
  for (Index k = d; k-- > 1;) {
    xax_r[k] = interface_right_step(xax_r[k + 1], x[k], a.core(k), a.bandwidth(k), x[k]);
    xb_r[k] = vec_interface_right_step(xb_r[k + 1], x[k], b.core(k));
    if (enrich) {
      zax_r[k] = interface_right_step(zax_r[k + 1], z[k], a.core(k), a.bandwidth(k), x[k]);
      zb_r[k] = vec_interface_right_step(zb_r[k + 1], z[k], b.core(k));
    }
  }
  const double per_core = d > 1 ? opt.tol / std::sqrt(double(d - 1)) : opt.tol;

  auto step = [&](Index k, bool forward) {
    const Core4& ak = a.core(k);
    const Index band = a.bandwidth(k), n = ak.m();
    const Index r0 = x[k].r0(), r1 = x[k].r1();
    const Vector rhs = local_rhs(xb_l[k], b.core(k), xb_r[k + 1]);
    const Vector sol = solve_local(xax_l[k], ak, band, xax_r[k + 1], rhs, as_vector(x[k]), opt, rep);
    rep.energies.push_back(local_energy(xax_l[k], ak, band, xax_r[k + 1], sol, rhs));
    x[k] = as_core(sol, r0, n, r1);

    if (forward && k + 1 == d) return;
    if (!forward && k == 0) return;

    // Residual projections for the enrichment and the auxiliary z.
    Core3 zk, crs;
    if (enrich) {
      const Index rz0 = zb_l[k].rows(), rz1 = zb_r[k + 1].rows();
      Vector zv = local_rhs(zb_l[k], b.core(k), zb_r[k + 1]);
      Vector t(zv.size());
      local_apply(zax_l[k], ak, band, zax_r[k + 1], sol.data(), t.data());
      zk = as_core(zv - t, rz0, n, rz1);
      if (forward) {
        Vector cv = local_rhs(xb_l[k], b.core(k), zb_r[k + 1]);
        Vector ct(cv.size());
        local_apply(xax_l[k], ak, band, zax_r[k + 1], sol.data(), ct.data());
        crs = as_core(cv - ct, r0, n, rz1);
      } else {
        Vector cv = local_rhs(zb_l[k], b.core(k), xb_r[k + 1]);
        Vector ct(cv.size());
        local_apply(zax_l[k], ak, band, xax_r[k + 1], sol.data(), ct.data());
        crs = as_core(cv - ct, rz0, n, r1);
      }
    }

    // Split the solved core; the non-orthogonal factor moves to the neighbor.
    const Matrix unfolding = forward ? Matrix(x[k].left()) : Matrix(x[k].right().transpose());
    Matrix u, carry;
    if (opt.truncate) {
      const TruncatedSvd svd = truncated_svd(unfolding, per_core * unfolding.norm(), opt.max_rank);
      u = svd.u;
      carry = svd.s.asDiagonal() * svd.v.transpose();
    } else {
      Eigen::HouseholderQR<Matrix> qr(unfolding);
      const Eigen::Index kk = std::min(unfolding.rows(), unfolding.cols());
      u = qr.householderQ() * Matrix::Identity(unfolding.rows(), kk);
      carry = qr.matrixQR().topRows(kk).triangularView<Eigen::Upper>();
    }
    if (enrich) {
      const Matrix extra = forward ? Matrix(crs.left()) : Matrix(crs.right().transpose());
      Matrix rf;
      u = augment_basis(u, extra, rf);
      carry = (rf.leftCols(carry.rows()) * carry).eval();
    }
    if (forward) {
      x[k] = Core3::from_left(u, r0, n);
      Core3& nx = x[k + 1];
      x[k + 1] = Core3::from_right(carry * nx.right(), nx.n(), nx.r1());
      xax_l[k + 1] = interface_left_step(xax_l[k], x[k], ak, band, x[k]);
      xb_l[k + 1] = vec_interface_left_step(xb_l[k], x[k], b.core(k));
      if (enrich) {
        z[k] = Core3::from_left(leading_basis(Matrix(zk.left()), opt.kickrank), zk.r0(), n);
        zax_l[k + 1] = interface_left_step(zax_l[k], z[k], ak, band, x[k]);
        zb_l[k + 1] = vec_interface_left_step(zb_l[k], z[k], b.core(k));
      }
    } else {
      x[k] = Core3::from_right(u.transpose(), n, r1);
      Core3& px = x[k - 1];
      x[k - 1] = Core3::from_left(px.left() * carry.transpose(), px.r0(), px.n());
      xax_r[k] = interface_right_step(xax_r[k + 1], x[k], ak, band, x[k]);
      xb_r[k] = vec_interface_right_step(xb_r[k + 1], x[k], b.core(k));
      if (enrich) {
        z[k] = Core3::from_right(leading_basis(Matrix(zk.right().transpose()), opt.kickrank).transpose(), n,
                                 zk.r1());
        zax_r[k] = interface_right_step(zax_r[k + 1], z[k], ak, band, x[k]);
        zb_r[k] = vec_interface_right_step(zb_r[k + 1], z[k], b.core(k));
      }
    }
  };

  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    const TtVector previous(x);
    if (d == 1) {
      step(0, true);
    } else {
      for (Index k = 0; k + 1 < d; ++k) step(k, true);
      for (Index k = d - 1; k > 0; --k) step(k, false);
    }
    const TtVector current(x);
    const double norm = tt_norm(current);
    const double change = tt_norm(tt_sub(current, previous)) / (norm > 0.0 ? norm : 1.0);
    rep.changes.push_back(change);
    rep.sweeps = sweep;
    if (change <= opt.tol || d == 1) {
      rep.converged = true;
      break;
    }
  }
  res.x = TtVector(std::move(x));
  rep.max_rank = res.x.max_rank();
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

AlsResult solve_primal(const PrimalSystem& sys, const AlsOptions& opt, std::uint64_t seed) {
  const TtMatrix a = restrict_interior(sys.A);
  const TtVector b = restrict_interior(sys.b);
  AlsResult res = als_solve(a, b, primal_initial_guess(b.mode_sizes(), seed), opt);
  res.x = pad_boundary(res.x);
  return res;
}

}  // namespace ttcert
