#include "ttcert/complementary_solver.hpp"

#include "ttcert/linalg.hpp"
#include "ttcert/local_ops.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace ttcert {

// BlockTtVector -------------------------------------------------------------

BlockTtVector::BlockTtVector(std::vector<Core3> cores, Index position, Index components)
    : cores_(std::move(cores)), position_(position), components_(components) {
  const Index d = cores_.size();
  if (d == 0) throw std::invalid_argument("BlockTtVector: no cores");
  if (position_ >= d) throw std::invalid_argument("BlockTtVector: block position out of range");
  if (components_ == 0) throw std::invalid_argument("BlockTtVector: no components");
  if (cores_.front().r0() != 1) throw std::invalid_argument("BlockTtVector: first rank must be 1");
  for (Index k = 0; k + 1 < d; ++k) {
    Index r1 = cores_[k].r1();
    if (k == position_) {
      if (r1 % components_ != 0) throw std::invalid_argument("BlockTtVector: block core not divisible by components");
      r1 /= components_;
    }
    if (r1 != cores_[k + 1].r0()) throw std::invalid_argument("BlockTtVector: rank mismatch");
  }
  const Index last = cores_.back().r1();
  if (last != (position_ + 1 == d ? components_ : 1)) throw std::invalid_argument("BlockTtVector: last rank must be 1");
}

std::vector<Index> BlockTtVector::mode_sizes() const {
  std::vector<Index> out;
  for (const Core3& c : cores_) out.push_back(c.n());
  return out;
}

std::vector<Index> BlockTtVector::ranks() const {
  std::vector<Index> out{1};
  for (Index k = 0; k < dim(); ++k) out.push_back(k == position_ ? cores_[k].r1() / components_ : cores_[k].r1());
  return out;
}

Index BlockTtVector::max_rank() const {
  const std::vector<Index> r = ranks();
  return *std::max_element(r.begin(), r.end());
}

Core3 BlockTtVector::slice(Index s) const {
  if (s >= components_) throw std::out_of_range("BlockTtVector::slice");
  const Core3& c = cores_[position_];
  const Index r1 = c.r1() / components_, chunk = c.r0() * c.n() * r1;
  return Core3(c.r0(), c.n(), r1, std::vector<double>(c.data() + s * chunk, c.data() + (s + 1) * chunk));
}

TtVector BlockTtVector::component(Index s) const {
  std::vector<Core3> cores = cores_;
  cores[position_] = slice(s);
  return TtVector(std::move(cores));
}

BlockTtVector BlockTtVector::random(const std::vector<Index>& modes, Index rank, Index components, Index position,
                                    std::uint64_t seed) {
  const Index d = modes.size();
  if (position >= d) throw std::invalid_argument("BlockTtVector::random: block position out of range");
  const TtVector base = tt_random(modes, rank, seed);
  std::vector<Core3> cores = base.cores();
  // Replace the block core by independent random slices.
  std::mt19937_64 gen(seed ^ 0x5bd1e995ULL);
  std::normal_distribution<double> normal;
  const Core3& c = cores[position];
  Core3 block(c.r0(), c.n(), c.r1() * components);
  for (double& v : block.storage()) v = normal(gen);
  cores[position] = std::move(block);
  BlockTtVector out(std::move(cores), position, components);
  // Orthogonalize towards the block, carrying the factors into it.
  std::vector<Core3> cs = std::move(out).release();
  for (Index k = 0; k < position; ++k) {
    Eigen::HouseholderQR<Matrix> qr(Matrix(cs[k].left()));
    const Index rows = cs[k].r0() * cs[k].n();
    const Index r = std::min<Index>(rows, cs[k].r1());
    Matrix q = qr.householderQ() * Matrix::Identity(Eigen::Index(rows), Eigen::Index(r));
    Matrix rf = qr.matrixQR().topRows(Eigen::Index(r)).triangularView<Eigen::Upper>();
    cs[k] = Core3::from_left(q, cs[k].r0(), cs[k].n());
    const Core3& nx = cs[k + 1];
    cs[k + 1] = Core3::from_right(rf * Matrix(nx.right()), nx.n(), nx.r1());
  }
  for (Index k = d - 1; k > position; --k) {
    const Matrix mt = Matrix(cs[k].right()).transpose();
    Eigen::HouseholderQR<Matrix> qr(mt);
    const Index rows = Index(mt.rows());
    const Index r = std::min<Index>(rows, cs[k].r0());
    Matrix q = qr.householderQ() * Matrix::Identity(Eigen::Index(rows), Eigen::Index(r));
    Matrix rf = qr.matrixQR().topRows(Eigen::Index(r)).triangularView<Eigen::Upper>();
    cs[k] = Core3::from_right(q.transpose(), cs[k].n(), cs[k].r1());
    Core3& pv = cs[k - 1];
    if (k - 1 == position) {
      const Index r1 = pv.r1() / components;
      Core3 nb(pv.r0(), pv.n(), r * components);
      for (Index s = 0; s < components; ++s) {
        ConstMatrixMap src(pv.data() + s * pv.r0() * pv.n() * r1, Eigen::Index(pv.r0() * pv.n()), Eigen::Index(r1));
        MatrixMap dst(nb.data() + s * pv.r0() * pv.n() * r, Eigen::Index(pv.r0() * pv.n()), Eigen::Index(r));
        dst = src * rf.transpose();
      }
      pv = std::move(nb);
    } else {
      pv = Core3::from_left(Matrix(pv.left()) * rf.transpose(), pv.r0(), pv.n());
    }
  }
  return BlockTtVector(std::move(cs), position, components);
}

BlockTtVector move_block_index(const BlockTtVector& tau, BlockDirection direction, double rel_tol, Index max_rank) {
  if (rel_tol < 0.0) throw std::invalid_argument("move_block_index: negative tolerance");
  const Index k = tau.position(), d = tau.dim(), nc = tau.components();
  std::vector<Core3> cores = tau.cores();
  const Core3& t = cores[k];
  const Index r0 = t.r0(), n = t.n(), r1 = t.r1() / nc;
  if (direction == BlockDirection::right) {
    if (k + 1 >= d) throw std::out_of_range("move_block_index: block is at the last core");
    const Matrix m = t.left();  // (r0 n) x (r1 nc), column b + r1 s
    const double norm = m.norm();
    const TruncatedSvd svd =
        truncated_svd(m, rel_tol > 0.0 ? rel_tol * norm : zero_trim_tolerance(norm), max_rank);
    const Index r = Index(svd.u.cols());
    const Matrix w = svd.s.asDiagonal() * svd.v.transpose();  // r x (r1 nc)
    const Core3& nx = cores[k + 1];
    const Index n2 = nx.n(), r2 = nx.r1();
    Core3 block(r, n2, r2 * nc);
    MatrixMap dst = block.right();  // r x (n2 r2 nc)
    for (Index s = 0; s < nc; ++s)
      dst.middleCols(Eigen::Index(n2 * r2 * s), Eigen::Index(n2 * r2)) =
          w.middleCols(Eigen::Index(r1 * s), Eigen::Index(r1)) * nx.right();
    cores[k] = Core3::from_left(svd.u, r0, n);
    cores[k + 1] = std::move(block);
    return BlockTtVector(std::move(cores), k + 1, nc);
  }
  if (k == 0) throw std::out_of_range("move_block_index: block is at the first core");
  Matrix m(Eigen::Index(r0 * nc), Eigen::Index(n * r1));  // row a + r0 s, column i + n b
  for (Index s = 0; s < nc; ++s)
    m.middleRows(Eigen::Index(r0 * s), Eigen::Index(r0)) = t.right().middleCols(Eigen::Index(n * r1 * s), Eigen::Index(n * r1));
  const double norm = m.norm();
  const TruncatedSvd svd = truncated_svd(m, rel_tol > 0.0 ? rel_tol * norm : zero_trim_tolerance(norm), max_rank);
  const Index r = Index(svd.u.cols());
  const Matrix us = svd.u * svd.s.asDiagonal();  // (r0 nc) x r
  const Core3& pv = cores[k - 1];
  Core3 block(pv.r0(), pv.n(), r * nc);
  MatrixMap dst = block.left();  // (rp np) x (r nc)
  for (Index s = 0; s < nc; ++s)
    dst.middleCols(Eigen::Index(r * s), Eigen::Index(r)) = pv.left() * us.middleRows(Eigen::Index(r0 * s), Eigen::Index(r0));
  cores[k] = Core3::from_right(svd.v.transpose(), n, r1);
  cores[k - 1] = std::move(block);
  return BlockTtVector(std::move(cores), k - 1, nc);
}

// ComplementarySystem -------------------------------------------------------

namespace {

int category(bool row_p2, bool col_p2) { return 2 * int(row_p2) + int(col_p2); }

}  // namespace

TtMatrix ComplementarySystem::divergence_block(Index s, Index l) const {
  std::vector<std::shared_ptr<const Core4>> cores;
  for (Index k = 0; k < dim(); ++k) cores.push_back(weighted[k][category(k == s, k == l)]);
  return TtMatrix(std::move(cores));
}

TtMatrix ComplementarySystem::mass_block(Index s) const {
  std::vector<std::shared_ptr<const Core4>> cores;
  for (Index k = 0; k < dim(); ++k) cores.push_back(k == s ? mass_p2[k] : mass_broken[k]);
  return TtMatrix(std::move(cores));
}

TtMatrix ComplementarySystem::block(Index s, Index l) const {
  return s == l ? ttm_add(divergence_block(s, l), mass_block(s)) : divergence_block(s, l);
}

TtVector ComplementarySystem::rhs(Index s) const {
  std::vector<Core3> cores;
  for (Index k = 0; k < dim(); ++k) cores.push_back(k == s ? rhs_deriv[k] : rhs_value[k]);
  return TtVector(std::move(cores));
}

namespace {

std::shared_ptr<const Core4> rank1_core(const Matrix& m) {
  auto c = std::make_shared<Core4>(1, Index(m.rows()), Index(m.cols()), 1);
  c->set_slice(0, 0, m);
  return c;
}

/// Reject sigma fields with non-positive values on a sample of grid points.
void check_positive_sigma(const TtVector& sigma) {
  std::mt19937_64 gen(7);
  const std::vector<Index> modes = sigma.mode_sizes();
  std::vector<Index> idx(modes.size());
  for (int p = 0; p < 1000; ++p) {
    for (Index k = 0; k < modes.size(); ++k) idx[k] = std::uniform_int_distribution<Index>(0, modes[k] - 1)(gen);
    const double v = tt_entry(sigma, idx);
    if (!(v > 0.0)) throw std::invalid_argument("assemble_complementary: non-positive kappa_tilde^{-2} value");
  }
}

}  // namespace

ComplementarySystem assemble_complementary_from_density(const QuadratureGrid& quad, const TtVector& sigma,
                                                        const TtVector& q) {
  const Index d = quad.dim();
  if (sigma.mode_sizes() != quad.mode_sizes() || q.mode_sizes() != quad.mode_sizes())
    throw std::invalid_argument("assemble_complementary: grid mismatch");
  check_positive_sigma(sigma);
  ComplementarySystem sys;
  sys.sigma = sigma;
  for (Index k = 0; k < d; ++k) {
    const QuadratureGrid1D& ax = quad.axis(k);
    const BasisTable1D p2 = make_basis_table(BasisKind::p2, ax);
    const BasisTable1D br = make_basis_table(BasisKind::broken, ax);
    sys.modes.push_back(p2.dim);

    const Core3& sc = sigma.core(k);
    std::array<std::shared_ptr<const Core4>, 4> w;
    for (int c = 0; c < 4; ++c) {
      const bool row_p2 = c >= 2, col_p2 = (c % 2) == 1;
      const BasisTable1D& rb = row_p2 ? p2 : br;
      const BasisTable1D& cb = col_p2 ? p2 : br;
      auto core = std::make_shared<Core4>(sc.r0(), rb.dim, cb.dim, sc.r1());
      Vector coeff(Eigen::Index(sc.n()));
      for (Index b = 0; b < sc.r1(); ++b)
        for (Index a = 0; a < sc.r0(); ++a) {
          for (Index i = 0; i < sc.n(); ++i) coeff[Eigen::Index(i)] = sc(a, i, b);
          core->set_slice(a, b, weighted_1d_matrix(coeff, rb, row_p2, cb, col_p2, ax));
        }
      w[c] = std::move(core);
    }
    sys.weighted.push_back(w);
    sys.mass_p2.push_back(rank1_core(mass_1d_matrix(p2, ax)));
    sys.mass_broken.push_back(rank1_core(mass_1d_matrix(br, ax)));

    // Test functions against the density: rows of B^T diag(w).
    const Matrix wd = p2.derivs.transpose() * ax.weights().asDiagonal();
    const Matrix wv = br.values.transpose() * ax.weights().asDiagonal();
    const Core3& qc = q.core(k);
    Core3 gd(qc.r0(), p2.dim, qc.r1()), gv(qc.r0(), br.dim, qc.r1());
    for (Index b = 0; b < qc.r1(); ++b) {
      ConstMatrixMap src(qc.data() + qc.r0() * qc.n() * b, Eigen::Index(qc.r0()), Eigen::Index(qc.n()));
      MatrixMap dd(gd.data() + gd.r0() * gd.n() * b, Eigen::Index(gd.r0()), Eigen::Index(gd.n()));
      MatrixMap dv(gv.data() + gv.r0() * gv.n() * b, Eigen::Index(gv.r0()), Eigen::Index(gv.n()));
      dd = src * wd.transpose();
      dv = src * wv.transpose();
    }
    sys.rhs_deriv.push_back(std::move(gd));
    sys.rhs_value.push_back(std::move(gv));
  }
  return sys;
}

TtVector complementary_density(const QuadratureGrid& quad, const TtVector& sigma, const TtVector& u_h,
                               const TtVector* kappa2, const TtVector& f, double rhs_tol) {
  if (f.mode_sizes() != quad.mode_sizes() || (kappa2 && kappa2->mode_sizes() != quad.mode_sizes()))
    throw std::invalid_argument("complementary_density: grid mismatch");
  const TtVector uq = q1_values(u_h, quad);
  TtVector r = kappa2 ? tt_round(tt_sub(f, tt_hadamard(*kappa2, uq)), rhs_tol) : f;
  const TtVector pr = tt_round(q1_project(r, quad), rhs_tol);
  return tt_round(tt_scale(tt_add(tt_hadamard(sigma, pr), uq), -1.0), rhs_tol);
}

ComplementarySystem assemble_complementary(const QuadratureGrid& quad, const TtVector& sigma, const TtVector& u_h,
                                           const TtVector* kappa2, const TtVector& f, double rhs_tol) {
  if (sigma.mode_sizes() != quad.mode_sizes()) throw std::invalid_argument("assemble_complementary: grid mismatch");
  return assemble_complementary_from_density(quad, sigma, complementary_density(quad, sigma, u_h, kappa2, f, rhs_tol));
}

double complementary_energy(const ComplementarySystem& sys, const BlockTtVector& tau) {
  const Index d = sys.dim();
  std::vector<TtVector> comps;
  for (Index s = 0; s < d; ++s) comps.push_back(tau.component(s));
  double e = 0.0;
  for (Index s = 0; s < d; ++s) {
    for (Index l = 0; l < d; ++l) e += 0.5 * tt_dot(comps[s], ttm_matvec(sys.divergence_block(s, l), comps[l]));
    e += 0.5 * tt_dot(comps[s], ttm_matvec(sys.mass_block(s), comps[s]));
    e -= tt_dot(comps[s], sys.rhs(s));
  }
  return e;
}

BlockTtVector complementary_initial_guess(const ComplementarySystem& sys, std::uint64_t seed) {
  return BlockTtVector::random(sys.modes, 2, sys.dim(), 0, seed);
}

// Block ALS -----------------------------------------------------------------

namespace {

/// Projections of the block operator and rhs onto the current frame. Keys of
/// a left interface at position k are component indices < k or d ("none"),
/// keys of a right interface at position k are indices >= k or d.
class BlockInterfaces {
 public:
  BlockInterfaces(const ComplementarySystem& sys)
      : sys_(sys), d_(sys.dim()),
        dl_(d_ + 1, std::vector<Interface3>((d_ + 1) * (d_ + 1))),
        dr_(d_ + 1, std::vector<Interface3>((d_ + 1) * (d_ + 1))),
        ml_(d_ + 1, std::vector<Interface3>(d_ + 1)), mr_(d_ + 1, std::vector<Interface3>(d_ + 1)),
        gl_(d_ + 1, std::vector<Matrix>(d_ + 1, Matrix::Ones(1, 1))),
        gr_(d_ + 1, std::vector<Matrix>(d_ + 1, Matrix::Ones(1, 1))) {}

  /// Left interfaces at k + 1 from those at k and the left-orthonormal core k.
  void update_left(Index k, const Core3& t) {
    for (Index a : left_keys(k + 1)) {
      const Index sa = a == k ? d_ : a;
      for (Index b : left_keys(k + 1)) {
        const Index sb = b == k ? d_ : b;
        const Core4& c = *sys_.weighted[k][category(a == k, b == k)];
        dl_[k + 1][key(a, b)] = interface_left_step(dl_[k][key(sa, sb)], t, c, c.bandwidth(), t);
      }
      const Core4& m = a == k ? *sys_.mass_p2[k] : *sys_.mass_broken[k];
      ml_[k + 1][a] = interface_left_step(ml_[k][sa], t, m, m.bandwidth(), t);
      gl_[k + 1][a] = vec_interface_left_step(gl_[k][sa], t, a == k ? sys_.rhs_deriv[k] : sys_.rhs_value[k]);
    }
  }

  /// Right interfaces at k from those at k + 1 and the right-orthonormal core k.
  void update_right(Index k, const Core3& t) {
    for (Index a : right_keys(k)) {
      const Index sa = a == k ? d_ : a;
      for (Index b : right_keys(k)) {
        const Index sb = b == k ? d_ : b;
        const Core4& c = *sys_.weighted[k][category(a == k, b == k)];
        dr_[k][key(a, b)] = interface_right_step(dr_[k + 1][key(sa, sb)], t, c, c.bandwidth(), t);
      }
      const Core4& m = a == k ? *sys_.mass_p2[k] : *sys_.mass_broken[k];
      mr_[k][a] = interface_right_step(mr_[k + 1][sa], t, m, m.bandwidth(), t);
      gr_[k][a] = vec_interface_right_step(gr_[k + 1][sa], t, a == k ? sys_.rhs_deriv[k] : sys_.rhs_value[k]);
    }
  }

  Index lkey(Index s, Index k) const { return s < k ? s : d_; }
  Index rkey(Index s, Index k) const { return s > k ? s : d_; }

  const Interface3& div_left(Index k, Index s, Index l) const { return dl_[k][key(lkey(s, k), lkey(l, k))]; }
  const Interface3& div_right(Index k, Index s, Index l) const { return dr_[k + 1][key(rkey(s, k), rkey(l, k))]; }
  const Interface3& mass_left(Index k, Index s) const { return ml_[k][lkey(s, k)]; }
  const Interface3& mass_right(Index k, Index s) const { return mr_[k + 1][rkey(s, k)]; }
  const Matrix& rhs_left(Index k, Index s) const { return gl_[k][lkey(s, k)]; }
  const Matrix& rhs_right(Index k, Index s) const { return gr_[k + 1][rkey(s, k)]; }

 private:
  Index key(Index a, Index b) const { return a + (d_ + 1) * b; }
  std::vector<Index> left_keys(Index k) const {
    std::vector<Index> out;
    for (Index a = 0; a < k; ++a) out.push_back(a);
    out.push_back(d_);
    return out;
  }
  std::vector<Index> right_keys(Index k) const {
    std::vector<Index> out;
    for (Index a = k; a < d_; ++a) out.push_back(a);
    out.push_back(d_);
    return out;
  }

  const ComplementarySystem& sys_;
  Index d_;
  std::vector<std::vector<Interface3>> dl_, dr_, ml_, mr_;
  std::vector<std::vector<Matrix>> gl_, gr_;
};

/// Reduced block operator at core k acting on vectors laid out as
/// (r0, n, r1) slices stacked over the component index.
class ReducedBlockOperator {
 public:
  ReducedBlockOperator(const ComplementarySystem& sys, const BlockInterfaces& ifc, Index k, Index r0, Index r1)
      : sys_(sys), ifc_(ifc), k_(k), d_(sys.dim()), r0_(r0), n_(sys.modes[k]), r1_(r1) {}

  Index slice_size() const { return r0_ * n_ * r1_; }
  Index size() const { return slice_size() * d_; }

  const Core4& div_core(Index s, Index l) const { return *sys_.weighted[k_][category(s == k_, l == k_)]; }
  const Core4& mass_core(Index s) const { return s == k_ ? *sys_.mass_p2[k_] : *sys_.mass_broken[k_]; }

  void apply(const double* x, double* y) const {
    const Index m = slice_size();
    for (Index s = 0; s < d_; ++s) {
      double* ys = y + s * m;
      const Core4& mc = mass_core(s);
      local_apply(ifc_.mass_left(k_, s), mc, mc.bandwidth(), ifc_.mass_right(k_, s), x + s * m, ys, false);
      for (Index l = 0; l < d_; ++l) {
        const Core4& c = div_core(s, l);
        local_apply(ifc_.div_left(k_, s, l), c, c.bandwidth(), ifc_.div_right(k_, s, l), x + l * m, ys, true);
      }
    }
  }

  Vector rhs() const {
    Vector g(static_cast<Eigen::Index>(size()));
    for (Index s = 0; s < d_; ++s) {
      const Core3& gc = s == k_ ? sys_.rhs_deriv[k_] : sys_.rhs_value[k_];
      g.segment(Eigen::Index(s * slice_size()), Eigen::Index(slice_size())) =
          local_rhs(ifc_.rhs_left(k_, s), gc, ifc_.rhs_right(k_, s));
    }
    return g;
  }

  Index max_band() const {
    Index b = 0;
    for (int c = 0; c < 4; ++c) b = std::max(b, sys_.weighted[k_][c]->bandwidth());
    return std::max({b, sys_.mass_p2[k_]->bandwidth(), sys_.mass_broken[k_]->bandwidth()});
  }

  Index k() const { return k_; }
  Index dim() const { return d_; }
  Index r0() const { return r0_; }
  Index n() const { return n_; }
  Index r1() const { return r1_; }
  const BlockInterfaces& interfaces() const { return ifc_; }

 private:
  const ComplementarySystem& sys_;
  const BlockInterfaces& ifc_;
  Index k_, d_, r0_, n_, r1_;
};

/// Preconditioner that is block diagonal in the rank indices (a0, a1): each
/// block couples all components and mode indices of core k and is factorized
/// by banded Cholesky in the interleaved ordering s + d i.
class BlockRankJacobi {
 public:
  explicit BlockRankJacobi(const ReducedBlockOperator& op)
      : d_(op.dim()), r0_(op.r0()), n_(op.n()), r1_(op.r1()) {
    const Index band = op.max_band();
    const Index bw = d_ * (band + 1) - 1;
    const BlockInterfaces& ifc = op.interfaces();
    const Index k = op.k();
    blocks_.reserve(r0_ * r1_);
    for (Index a1 = 0; a1 < r1_; ++a1)
      for (Index a0 = 0; a0 < r0_; ++a0) {
        BandedCholesky chol(n_ * d_, bw);
        auto add_term = [&](const Interface3& left, const Core4& c, const Interface3& right, Index s, Index l) {
          for (Index b1 = 0; b1 < c.r1(); ++b1) {
            const double rv = right(a1, b1, a1);
            if (rv == 0.0) continue;
            for (Index b0 = 0; b0 < c.r0(); ++b0) {
              const double coef = left(a0, b0, a0) * rv;
              if (coef == 0.0) continue;
              for (Index j = 0; j < n_; ++j) {
                const Index lo = j > band ? j - band : 0, hi = std::min(n_, j + band + 1);
                for (Index i = lo; i < hi; ++i) {
                  const Index row = s + d_ * i, col = l + d_ * j;
                  if (row < col) continue;
                  const double v = c(b0, i, j, b1);
                  if (v != 0.0) chol.add(row, col, coef * v);
                }
              }
            }
          }
        };
        for (Index s = 0; s < d_; ++s) {
          add_term(ifc.mass_left(k, s), op.mass_core(s), ifc.mass_right(k, s), s, s);
          for (Index l = 0; l < d_; ++l) add_term(ifc.div_left(k, s, l), op.div_core(s, l), ifc.div_right(k, s, l), s, l);
        }
        if (!chol.factor())
          throw std::runtime_error("block ALS preconditioner: rank block (" + std::to_string(a0) + ", " +
                                   std::to_string(a1) + ") at core " + std::to_string(k) +
                                   " is not positive definite");
        blocks_.push_back(std::move(chol));
      }
    buf_.resize(n_ * d_);
  }

  void apply(double* v) {
    const Index m = r0_ * n_ * r1_;
    for (Index a1 = 0; a1 < r1_; ++a1)
      for (Index a0 = 0; a0 < r0_; ++a0) {
        for (Index s = 0; s < d_; ++s)
          for (Index i = 0; i < n_; ++i) buf_[s + d_ * i] = v[s * m + a0 + r0_ * (i + n_ * a1)];
        blocks_[a0 + r0_ * a1].solve(buf_.data());
        for (Index s = 0; s < d_; ++s)
          for (Index i = 0; i < n_; ++i) v[s * m + a0 + r0_ * (i + n_ * a1)] = buf_[s + d_ * i];
      }
  }

 private:
  Index d_, r0_, n_, r1_;
  std::vector<BandedCholesky> blocks_;
  std::vector<double> buf_;
};

Vector solve_reduced(const ReducedBlockOperator& op, const Vector& rhs, const Vector& guess, const BlockAlsOptions& opt,
                     AlsReport& rep) {
  ++rep.local_solves;
  const Index size = op.size();
  if (size <= opt.dense_limit) {
    Matrix m(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    Vector e = Vector::Zero(static_cast<Eigen::Index>(size));
    for (Index j = 0; j < size; ++j) {
      e[Eigen::Index(j)] = 1.0;
      op.apply(e.data(), m.col(Eigen::Index(j)).data());
      e[Eigen::Index(j)] = 0.0;
    }
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw std::runtime_error("block ALS: reduced matrix is not positive definite");
    ++rep.dense_solves;
    return llt.solve(rhs);
  }
  BlockRankJacobi prec(op);
  Vector x = guess;
  const KrylovResult kr = gmres([&op](const double* in, double* out) { op.apply(in, out); },
                                [&prec](double* v) { prec.apply(v); }, rhs, x, opt.gmres_restart,
                                opt.gmres_max_iter, opt.gmres_tol_factor * opt.tol);
  rep.krylov_iterations += kr.iterations;
  if (kr.stagnated || !kr.converged) ++rep.krylov_stagnations;
  return x;
}

double relative_gap(const BlockTtVector& a, const BlockTtVector& b) {
  double num = 0.0, den = 0.0;
  for (Index s = 0; s < a.components(); ++s) {
    const TtVector as = a.component(s);
    const double diff = tt_norm(tt_sub(as, b.component(s)));
    const double na = tt_norm(as);
    num += diff * diff;
    den += na * na;
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

BlockAlsResult block_als_solve(const ComplementarySystem& sys, const BlockTtVector& tau0, const BlockAlsOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const Index d = sys.dim();
  if (!(opt.tol > 0.0)) throw std::invalid_argument("block_als_solve: tolerance must be positive");
  if (tau0.dim() != d || tau0.components() != d || tau0.mode_sizes() != sys.modes)
    throw std::invalid_argument("block_als_solve: initial guess does not match the system");
  if (tau0.position() != 0) throw std::invalid_argument("block_als_solve: initial block must be at core 0");

  BlockAlsResult res;
  AlsReport& rep = res.report;
  BlockInterfaces ifc(sys);
  BlockTtVector tau = tau0;
  for (Index k = d - 1; k > 0; --k) ifc.update_right(k, tau.core(k));
  const double move_tol = opt.truncate ? opt.tol : 0.0;

  auto local_step = [&](Index k) {
    const Core3& t = tau.core(k);
    const Index r0 = t.r0(), n = t.n(), r1 = t.r1();
    const ReducedBlockOperator op(sys, ifc, k, r0, r1 / d);
    const Vector g = op.rhs();
    const Vector guess = Eigen::Map<const Vector>(t.data(), Eigen::Index(t.size()));
    const Vector x = solve_reduced(op, g, guess, opt, rep);
    Vector bx(x.size());
    op.apply(x.data(), bx.data());
    rep.energies.push_back(0.5 * x.dot(bx) - x.dot(g));
    std::vector<Core3> cores = std::move(tau).release();
    cores[k] = Core3(r0, n, r1, std::vector<double>(x.data(), x.data() + x.size()));
    tau = BlockTtVector(std::move(cores), k, d);
  };

  if (d == 1) {
    local_step(0);
    rep.sweeps = 1;
    rep.converged = true;
  } else {
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
      const BlockTtVector previous = tau;
      for (Index k = 0; k + 1 < d; ++k) {
        local_step(k);
        tau = move_block_index(tau, BlockDirection::right, move_tol, opt.max_rank);
        ifc.update_left(k, tau.core(k));
      }
      for (Index k = d - 1; k > 0; --k) {
        local_step(k);
        tau = move_block_index(tau, BlockDirection::left, move_tol, opt.max_rank);
        ifc.update_right(k, tau.core(k));
      }
      rep.sweeps = sweep;
      rep.max_rank = std::max(rep.max_rank, tau.max_rank());
      const double change = relative_gap(tau, previous);
      rep.changes.push_back(change);
      if (change <= opt.tol) {
        rep.converged = true;
        break;
      }
    }
  }
  rep.max_rank = std::max(rep.max_rank, tau.max_rank());
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.tau = std::move(tau);
  return res;
}

}  // namespace ttcert
