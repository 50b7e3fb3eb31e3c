#include "ttcert/tt_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace ttcert {

namespace {

void require_same_modes(const TtVector& x, const TtVector& y, const char* what) {
  if (x.mode_sizes() != y.mode_sizes()) {
    throw std::invalid_argument(std::string(what) + ": mode size mismatch");
  }
}

// Upper-triangular factor of a thin QR; rows = min(rows, cols) of m.
Matrix qr_r_factor(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  const Index k = std::min<Index>(m.rows(), m.cols());
  return qr.matrixQR().topRows(Eigen::Index(k)).triangularView<Eigen::Upper>();
}

// Thin QR: returns (Q, R) with Q of size rows x min(rows, cols).
std::pair<Matrix, Matrix> thin_qr(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  const auto k = std::min(m.rows(), m.cols());
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

}  // namespace

// Core3 ---------------------------------------------------------------------

Core3::Core3(Index r0, Index n, Index r1) : r0_(r0), n_(n), r1_(r1), data_(r0 * n * r1, 0.0) {}

Core3::Core3(Index r0, Index n, Index r1, std::vector<double> data)
    : r0_(r0), n_(n), r1_(r1), data_(std::move(data)) {
  if (data_.size() != r0 * n * r1) throw std::invalid_argument("Core3: data size mismatch");
}

Core3 Core3::from_left(const Matrix& m, Index r0, Index n) {
  if (Index(m.rows()) != r0 * n) throw std::invalid_argument("Core3::from_left: shape mismatch");
  Core3 c(r0, n, Index(m.cols()));
  c.left() = m;
  return c;
}

Core3 Core3::from_right(const Matrix& m, Index n, Index r1) {
  if (Index(m.cols()) != n * r1) throw std::invalid_argument("Core3::from_right: shape mismatch");
  Core3 c(Index(m.rows()), n, r1);
  c.right() = m;
  return c;
}

// Core4 ---------------------------------------------------------------------

Core4::Core4(Index r0, Index m, Index n, Index r1)
    : r0_(r0), m_(m), n_(n), r1_(r1), data_(r0 * m * n * r1, 0.0) {}

Matrix Core4::slice(Index a, Index b) const {
  Matrix s(m_, n_);
  for (Index j = 0; j < n_; ++j)
    for (Index i = 0; i < m_; ++i) s(i, j) = (*this)(a, i, j, b);
  return s;
}

void Core4::set_slice(Index a, Index b, const Matrix& s) {
  if (Index(s.rows()) != m_ || Index(s.cols()) != n_) throw std::invalid_argument("Core4::set_slice: shape");
  for (Index j = 0; j < n_; ++j)
    for (Index i = 0; i < m_; ++i) (*this)(a, i, j, b) = s(i, j);
}

Index Core4::bandwidth() const {
  Index band = 0;
  for (Index b = 0; b < r1_; ++b)
    for (Index j = 0; j < n_; ++j)
      for (Index i = 0; i < m_; ++i)
        for (Index a = 0; a < r0_; ++a)
          if ((*this)(a, i, j, b) != 0.0) band = std::max(band, i > j ? i - j : j - i);
  return band;
}

// TtVector ------------------------------------------------------------------

TtVector::TtVector(std::vector<Core3> cores, OrthogonalityTag tag) : cores_(std::move(cores)), tag_(tag) {
  if (cores_.empty()) throw std::invalid_argument("TtVector: no cores");
  if (cores_.front().r0() != 1 || cores_.back().r1() != 1)
    throw std::invalid_argument("TtVector: boundary ranks must be 1");
  for (Index k = 0; k < cores_.size(); ++k) {
    const Core3& c = cores_[k];
    if (c.n() == 0) throw std::invalid_argument("TtVector: zero mode size");
    if (c.r0() == 0 || c.r1() == 0) throw std::invalid_argument("TtVector: zero rank");
    if (k + 1 < cores_.size() && c.r1() != cores_[k + 1].r0())
      throw std::invalid_argument("TtVector: rank chaining violated at core " + std::to_string(k));
  }
}

std::vector<Index> TtVector::mode_sizes() const {
  std::vector<Index> n;
  n.reserve(cores_.size());
  for (const auto& c : cores_) n.push_back(c.n());
  return n;
}

std::vector<Index> TtVector::ranks() const {
  std::vector<Index> r{1};
  for (const auto& c : cores_) r.push_back(c.r1());
  return r;
}

Index TtVector::max_rank() const {
  Index r = 1;
  for (const auto& c : cores_) r = std::max(r, c.r1());
  return r;
}

// TtMatrix ------------------------------------------------------------------

TtMatrix::TtMatrix(std::vector<std::shared_ptr<const Core4>> cores) : cores_(std::move(cores)) { validate(); }

TtMatrix::TtMatrix(std::vector<Core4> cores) {
  for (auto& c : cores) cores_.push_back(std::make_shared<const Core4>(std::move(c)));
  validate();
}

void TtMatrix::validate() {
  if (cores_.empty()) throw std::invalid_argument("TtMatrix: no cores");
  if (cores_.front()->r0() != 1 || cores_.back()->r1() != 1)
    throw std::invalid_argument("TtMatrix: boundary ranks must be 1");
  for (Index k = 0; k < cores_.size(); ++k) {
    const Core4& c = *cores_[k];
    if (c.m() == 0 || c.n() == 0) throw std::invalid_argument("TtMatrix: zero mode size");
    if (k + 1 < cores_.size() && c.r1() != cores_[k + 1]->r0())
      throw std::invalid_argument("TtMatrix: rank chaining violated at core " + std::to_string(k));
  }
  bands_.clear();
  for (const auto& c : cores_) bands_.push_back(c->bandwidth());
}

std::vector<Index> TtMatrix::row_sizes() const {
  std::vector<Index> n;
  for (const auto& c : cores_) n.push_back(c->m());
  return n;
}

std::vector<Index> TtMatrix::col_sizes() const {
  std::vector<Index> n;
  for (const auto& c : cores_) n.push_back(c->n());
  return n;
}

std::vector<Index> TtMatrix::ranks() const {
  std::vector<Index> r{1};
  for (const auto& c : cores_) r.push_back(c->r1());
  return r;
}

// Construction ----------------------------------------------------------------

TtVector tt_from_rank1(const std::vector<Vector>& factors) {
  if (factors.empty()) throw std::invalid_argument("tt_from_rank1: empty factor list");
  std::vector<Core3> cores;
  for (const auto& f : factors) {
    if (f.size() == 0) throw std::invalid_argument("tt_from_rank1: empty factor");
    cores.emplace_back(1, Index(f.size()), 1, std::vector<double>(f.data(), f.data() + f.size()));
  }
  return TtVector(std::move(cores));
}

TtVector tt_zeros(const std::vector<Index>& modes) {
  std::vector<Core3> cores;
  for (Index n : modes) cores.emplace_back(1, n, 1);
  return TtVector(std::move(cores));
}

TtVector tt_ones(const std::vector<Index>& modes) {
  std::vector<Vector> f;
  for (Index n : modes) f.push_back(Vector::Ones(Eigen::Index(n)));
  return tt_from_rank1(f);
}

TtVector tt_random(const std::vector<Index>& modes, Index rank, std::uint64_t seed) {
  const Index d = modes.size();
  std::vector<Index> r(d + 1, 1);
  // Cap ranks by the sizes of the left and right unfoldings.
  double left = 1.0;
  for (Index k = 1; k < d; ++k) {
    left *= double(modes[k - 1]);
    double right = 1.0;
    for (Index q = k; q < d; ++q) right *= double(modes[q]);
    r[k] = Index(std::min({double(rank), left, right}));
    r[k] = std::max<Index>(r[k], 1);
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Core3> cores;
  for (Index k = 0; k < d; ++k) {
    Core3 c(r[k], modes[k], r[k + 1]);
    for (auto& v : c.storage()) v = normal(gen);
    cores.push_back(std::move(c));
  }
  return TtVector(std::move(cores));
}

TtMatrix ttm_from_kron(const std::vector<Matrix>& factors) {
  std::vector<Core4> cores;
  for (const auto& f : factors) {
    Core4 c(1, Index(f.rows()), Index(f.cols()), 1);
    c.set_slice(0, 0, f);
    cores.push_back(std::move(c));
  }
  return TtMatrix(std::move(cores));
}

TtMatrix ttm_identity(const std::vector<Index>& modes) {
  std::vector<Matrix> f;
  for (Index n : modes) f.push_back(Matrix::Identity(Eigen::Index(n), Eigen::Index(n)));
  return ttm_from_kron(f);
}

// Arithmetic --------------------------------------------------------------------

TtVector tt_add(const TtVector& x, const TtVector& y) {
  require_same_modes(x, y, "tt_add");
  const Index d = x.dim();
  std::vector<Core3> cores;
  if (d == 1) {
    Core3 c = x.core(0);
    for (Index i = 0; i < c.size(); ++i) c.data()[i] += y.core(0).data()[i];
    cores.push_back(std::move(c));
    return TtVector(std::move(cores));
  }
  for (Index k = 0; k < d; ++k) {
    const Core3& a = x.core(k);
    const Core3& b = y.core(k);
    const Index n = a.n();
    const bool first = k == 0, last = k + 1 == d;
    const Index r0 = first ? 1 : a.r0() + b.r0();
    const Index r1 = last ? 1 : a.r1() + b.r1();
    Core3 c(r0, n, r1);
    const Index ao0 = 0, bo0 = first ? 0 : a.r0();
    const Index ao1 = 0, bo1 = last ? 0 : a.r1();
    for (Index q = 0; q < a.r1(); ++q)
      for (Index i = 0; i < n; ++i)
        for (Index p = 0; p < a.r0(); ++p) c(ao0 + p, i, ao1 + q) = a(p, i, q);
    for (Index q = 0; q < b.r1(); ++q)
      for (Index i = 0; i < n; ++i)
        for (Index p = 0; p < b.r0(); ++p) c(bo0 + p, i, bo1 + q) += b(p, i, q);
    cores.push_back(std::move(c));
  }
  return TtVector(std::move(cores));
}

TtVector tt_scale(const TtVector& x, double alpha) {
  std::vector<Core3> cores = x.cores();
  // Scale the core that carries the norm when the tensor is orthogonalized.
  Index k = 0;
  const auto tag = x.orthogonality();
  if (tag.kind != OrthogonalityTag::Kind::none) k = std::min(tag.pivot, x.dim() - 1);
  for (auto& v : cores[k].storage()) v *= alpha;
  return TtVector(std::move(cores), tag);
}

TtVector tt_sub(const TtVector& x, const TtVector& y) { return tt_add(x, tt_scale(y, -1.0)); }

TtVector tt_hadamard(const TtVector& x, const TtVector& y) {
  require_same_modes(x, y, "tt_hadamard");
  std::vector<Core3> cores;
  for (Index k = 0; k < x.dim(); ++k) {
    const Core3& a = x.core(k);
    const Core3& b = y.core(k);
    const Index n = a.n();
    Core3 c(a.r0() * b.r0(), n, a.r1() * b.r1());
    for (Index qb = 0; qb < b.r1(); ++qb)
      for (Index qa = 0; qa < a.r1(); ++qa)
        for (Index i = 0; i < n; ++i)
          for (Index pb = 0; pb < b.r0(); ++pb) {
            const double bv = b(pb, i, qb);
            for (Index pa = 0; pa < a.r0(); ++pa) c(pa + a.r0() * pb, i, qa + a.r1() * qb) = a(pa, i, qa) * bv;
          }
    cores.push_back(std::move(c));
  }
  return TtVector(std::move(cores));
}

double tt_dot(const TtVector& x, const TtVector& y) {
  require_same_modes(x, y, "tt_dot");
  Matrix phi = Matrix::Ones(1, 1);
  for (Index k = 0; k < x.dim(); ++k) {
    const Core3& a = x.core(k);
    const Core3& b = y.core(k);
    Matrix t = phi * b.right();  // (rx0) x (n * ry1)
    ConstMatrixMap tm(t.data(), Eigen::Index(a.r0() * a.n()), Eigen::Index(b.r1()));
    phi = a.left().transpose() * tm;
  }
  return phi(0, 0);
}

double tt_dot_weighted(const TtVector& x, const TtVector& w, const TtVector& y) {
  require_same_modes(x, w, "tt_dot_weighted");
  require_same_modes(x, y, "tt_dot_weighted");
  // Interface phi(ax, aw, ay), stored as an (rx) x (rw * ry) matrix.
  Matrix phi = Matrix::Ones(1, 1);
  for (Index k = 0; k < x.dim(); ++k) {
    const Core3& cx = x.core(k);
    const Core3& cw = w.core(k);
    const Core3& cy = y.core(k);
    const Index n = cx.n(), rx1 = cx.r1(), rw0 = cw.r0(), rw1 = cw.r1(), ry0 = cy.r0(), ry1 = cy.r1();
    // t1(aw, ay, i, bx) = sum_ax phi(ax, aw, ay) x(ax, i, bx)
    Matrix t1 = phi.transpose() * cx.right();
    // t2(ay, i, bx, bw) = sum_aw w(aw, i, bw) t1(aw, ay, i, bx)
    Matrix t2 = Matrix::Zero(Eigen::Index(ry0 * n), Eigen::Index(rx1 * rw1));
    for (Index bw = 0; bw < rw1; ++bw)
      for (Index bx = 0; bx < rx1; ++bx)
        for (Index i = 0; i < n; ++i)
          for (Index aw = 0; aw < rw0; ++aw) {
            const double wv = cw(aw, i, bw);
            if (wv == 0.0) continue;
            const double* src = t1.data() + aw + rw0 * (0 + ry0 * (i + n * bx));
            double* dst = t2.data() + 0 + ry0 * i + ry0 * n * (bx + rx1 * bw);
            for (Index ay = 0; ay < ry0; ++ay) dst[ay] += wv * src[rw0 * ay];
          }
    // phi(bx, bw, by) = sum_{ay, i} t2(ay, i, bx, bw) y(ay, i, by)
    Matrix next = t2.transpose() * cy.left();  // (rx1 * rw1) x ry1
    phi = Matrix(Eigen::Index(rx1), Eigen::Index(rw1 * ry1));
    for (Index by = 0; by < ry1; ++by)
      for (Index bw = 0; bw < rw1; ++bw)
        for (Index bx = 0; bx < rx1; ++bx) phi(bx, bw + rw1 * by) = next(bx + rx1 * bw, by);
  }
  return phi(0, 0);
}

TtVector tt_left_orthogonalize(const TtVector& x) {
  std::vector<Core3> cores = x.cores();
  const Index d = cores.size();
  for (Index k = 0; k + 1 < d; ++k) {
    auto [q, r] = thin_qr(Matrix(cores[k].left()));
    const Index rk = Index(q.cols());
    cores[k] = Core3::from_left(q, cores[k].r0(), cores[k].n());
    Matrix next = r * cores[k + 1].right();
    cores[k + 1] = Core3::from_right(next, cores[k + 1].n(), cores[k + 1].r1());
    (void)rk;
  }
  return TtVector(std::move(cores), {OrthogonalityTag::Kind::left, d - 1});
}

TtVector tt_right_orthogonalize(const TtVector& x) {
  std::vector<Core3> cores = x.cores();
  const Index d = cores.size();
  for (Index k = d - 1; k > 0; --k) {
    auto [q, r] = thin_qr(Matrix(cores[k].right().transpose()));
    cores[k] = Core3::from_right(q.transpose(), cores[k].n(), cores[k].r1());
    Matrix prev = cores[k - 1].left() * r.transpose();
    cores[k - 1] = Core3::from_left(prev, cores[k - 1].r0(), cores[k - 1].n());
  }
  return TtVector(std::move(cores), {OrthogonalityTag::Kind::right, 0});
}

double tt_norm(const TtVector& x) {
  Matrix r = Matrix::Ones(1, 1);
  for (Index k = 0; k < x.dim(); ++k) {
    const Core3& c = x.core(k);
    Matrix m = r * c.right();  // r' x (n * r1)
    ConstMatrixMap left(m.data(), Eigen::Index(m.rows() * c.n()), Eigen::Index(c.r1()));
    if (k + 1 == x.dim()) return left.norm();
    r = qr_r_factor(Matrix(left));
  }
  return r.norm();
}

double tt_hadamard_norm(const TtVector& c, const TtVector& g) {
  const TtVector go = tt_left_orthogonalize(g);
  const double s = tt_dot_weighted(go, tt_hadamard(c, c), go);
  return std::sqrt(std::max(0.0, s));
}

double tt_entry(const TtVector& x, std::span<const Index> index) {
  if (index.size() != x.dim()) throw std::invalid_argument("tt_entry: index length mismatch");
  Vector v = Vector::Ones(1);
  for (Index k = 0; k < x.dim(); ++k) {
    const Core3& c = x.core(k);
    Vector next = Vector::Zero(Eigen::Index(c.r1()));
    for (Index b = 0; b < c.r1(); ++b) {
      double s = 0.0;
      for (Index a = 0; a < c.r0(); ++a) s += v[Eigen::Index(a)] * c(a, index[k], b);
      next[Eigen::Index(b)] = s;
    }
    v = std::move(next);
  }
  return v[0];
}

double zero_trim_tolerance(double frobenius_norm) {
  return 8.0 * std::numeric_limits<double>::epsilon() * frobenius_norm;
}

TruncatedSvd truncated_svd(const Matrix& m, double abs_tol, Index max_rank) {
  TruncatedSvd out;
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const Index full = Index(s.size());
  // tail[r] = sqrt(sum_{i >= r} s_i^2)
  std::vector<double> tail(full + 1, 0.0);
  for (Index i = full; i-- > 0;) tail[i] = tail[i + 1] + s[Eigen::Index(i)] * s[Eigen::Index(i)];
  Index r = full;
  while (r > 1 && std::sqrt(tail[r - 1]) <= abs_tol) --r;
  if (max_rank > 0) r = std::min(r, max_rank);
  r = std::max<Index>(r, 1);
  out.u = svd.matrixU().leftCols(Eigen::Index(r));
  out.s = s.head(Eigen::Index(r));
  out.v = svd.matrixV().leftCols(Eigen::Index(r));
  out.discarded = std::sqrt(tail[r]);
  return out;
}

TtVector tt_round(const TtVector& x, double rel_tol, Index max_rank) {
  if (rel_tol < 0.0) throw std::invalid_argument("tt_round: negative tolerance");
  const Index d = x.dim();
  TtVector ortho = tt_right_orthogonalize(x);
  if (d == 1) return ortho;
  std::vector<Core3> cores = std::move(ortho).release();
  const double norm = cores[0].left().norm();
  const double per_core =
      rel_tol > 0.0 ? rel_tol / std::sqrt(double(d - 1)) * norm : zero_trim_tolerance(norm);
  for (Index k = 0; k + 1 < d; ++k) {
    const Core3& c = cores[k];
    TruncatedSvd svd = truncated_svd(Matrix(c.left()), per_core, max_rank);
    Matrix carry = svd.s.asDiagonal() * svd.v.transpose();
    const Index r0 = c.r0(), n = c.n();
    cores[k] = Core3::from_left(svd.u, r0, n);
    Matrix next = carry * cores[k + 1].right();
    cores[k + 1] = Core3::from_right(next, cores[k + 1].n(), cores[k + 1].r1());
  }
  return TtVector(std::move(cores), {OrthogonalityTag::Kind::left, d - 1});
}

TtVector tt_apply_modes(const TtVector& x, const std::vector<const Matrix*>& maps) {
  if (maps.size() != x.dim()) throw std::invalid_argument("tt_apply_modes: wrong number of maps");
  std::vector<Core3> cores;
  for (Index k = 0; k < x.dim(); ++k) {
    const Core3& c = x.core(k);
    if (maps[k] == nullptr) {
      cores.push_back(c);
      continue;
    }
    const Matrix& e = *maps[k];
    if (Index(e.cols()) != c.n()) throw std::invalid_argument("tt_apply_modes: map/mode size mismatch");
    const Index l = Index(e.rows());
    Core3 out(c.r0(), l, c.r1());
    for (Index b = 0; b < c.r1(); ++b) {
      ConstMatrixMap src(c.data() + c.r0() * c.n() * b, Eigen::Index(c.r0()), Eigen::Index(c.n()));
      MatrixMap dst(out.data() + c.r0() * l * b, Eigen::Index(c.r0()), Eigen::Index(l));
      dst.noalias() = src * e.transpose();
    }
    cores.push_back(std::move(out));
  }
  return TtVector(std::move(cores));
}

TtVector tt_apply_modes(const TtVector& x, const std::vector<Matrix>& maps) {
  std::vector<const Matrix*> p;
  for (const auto& m : maps) p.push_back(&m);
  return tt_apply_modes(x, p);
}

TtMatrix ttm_add(const TtMatrix& a, const TtMatrix& b) {
  if (a.row_sizes() != b.row_sizes() || a.col_sizes() != b.col_sizes())
    throw std::invalid_argument("ttm_add: mode size mismatch");
  const Index d = a.dim();
  std::vector<Core4> cores;
  for (Index k = 0; k < d; ++k) {
    const Core4& x = a.core(k);
    const Core4& y = b.core(k);
    const bool first = k == 0, last = k + 1 == d;
    const Index r0 = first ? 1 : x.r0() + y.r0();
    const Index r1 = last ? 1 : x.r1() + y.r1();
    const Index yo0 = first ? 0 : x.r0(), yo1 = last ? 0 : x.r1();
    Core4 c(r0, x.m(), x.n(), r1);
    for (Index q = 0; q < x.r1(); ++q)
      for (Index j = 0; j < x.n(); ++j)
        for (Index i = 0; i < x.m(); ++i)
          for (Index p = 0; p < x.r0(); ++p) c(p, i, j, q) = x(p, i, j, q);
    for (Index q = 0; q < y.r1(); ++q)
      for (Index j = 0; j < y.n(); ++j)
        for (Index i = 0; i < y.m(); ++i)
          for (Index p = 0; p < y.r0(); ++p) c(yo0 + p, i, j, yo1 + q) += y(p, i, j, q);
    cores.push_back(std::move(c));
  }
  return TtMatrix(std::move(cores));
}

TtMatrix ttm_scale(const TtMatrix& a, double alpha) {
  std::vector<std::shared_ptr<const Core4>> cores;
  for (Index k = 0; k < a.dim(); ++k) cores.push_back(a.core_ptr(k));
  Core4 c = a.core(0);
  const Index total = c.r0() * c.m() * c.n() * c.r1();
  for (Index i = 0; i < total; ++i) c.data()[i] *= alpha;
  cores[0] = std::make_shared<const Core4>(std::move(c));
  return TtMatrix(std::move(cores));
}

TtVector ttm_matvec(const TtMatrix& a, const TtVector& x) {
  if (a.dim() != x.dim() || a.col_sizes() != x.mode_sizes())
    throw std::invalid_argument("ttm_matvec: mode size mismatch");
  std::vector<Core3> cores;
  for (Index k = 0; k < x.dim(); ++k) {
    const Core4& ac = a.core(k);
    const Core3& xc = x.core(k);
    const Index R0 = ac.r0(), R1 = ac.r1(), r0 = xc.r0(), r1 = xc.r1(), m = ac.m(), n = ac.n();
    const Index band = a.bandwidth(k);
    Core3 y(R0 * r0, m, R1 * r1);
    for (Index q = 0; q < r1; ++q)
      for (Index bq = 0; bq < R1; ++bq)
        for (Index i = 0; i < m; ++i) {
          const Index jlo = i > band ? i - band : 0;
          const Index jhi = std::min(n, i + band + 1);
          for (Index j = jlo; j < jhi; ++j)
            for (Index p = 0; p < r0; ++p) {
              const double xv = xc(p, j, q);
              if (xv == 0.0) continue;
              for (Index bp = 0; bp < R0; ++bp) y(bp + R0 * p, i, bq + R1 * q) += ac(bp, i, j, bq) * xv;
            }
        }
    cores.push_back(std::move(y));
  }
  return TtVector(std::move(cores));
}

Vector tt_full(const TtVector& x, Index cap) {
  double total = 1.0;
  for (Index n : x.mode_sizes()) total *= double(n);
  if (total > double(cap)) throw std::length_error("tt_full: size cap exceeded");
  // f(row, a) with row the global index of the processed modes (last fastest).
  Matrix f = Matrix::Ones(1, 1);
  for (Index k = 0; k < x.dim(); ++k) {
    const Core3& c = x.core(k);
    Matrix g = f * c.right();  // rows x (n * r1)
    Matrix next(f.rows() * Eigen::Index(c.n()), Eigen::Index(c.r1()));
    for (Index b = 0; b < c.r1(); ++b)
      for (Index i = 0; i < c.n(); ++i)
        for (Eigen::Index row = 0; row < f.rows(); ++row)
          next(Eigen::Index(i) + Eigen::Index(c.n()) * row, Eigen::Index(b)) = g(row, Eigen::Index(i + c.n() * b));
    f = std::move(next);
  }
  return f.col(0);
}

Matrix ttm_full(const TtMatrix& a, Index cap) {
  double rows = 1.0, cols = 1.0;
  for (Index k = 0; k < a.dim(); ++k) {
    rows *= double(a.core(k).m());
    cols *= double(a.core(k).n());
  }
  if (rows * cols > double(cap)) throw std::length_error("ttm_full: size cap exceeded");
  // f[(I, J), b] flattened as vector of matrices per rank index
  Index nr = 1, nc = 1;
  std::vector<Matrix> f{Matrix::Ones(1, 1)};
  for (Index k = 0; k < a.dim(); ++k) {
    const Core4& c = a.core(k);
    std::vector<Matrix> next(c.r1(), Matrix::Zero(Eigen::Index(nr * c.m()), Eigen::Index(nc * c.n())));
    for (Index b = 0; b < c.r1(); ++b)
      for (Index p = 0; p < c.r0(); ++p)
        for (Index j = 0; j < c.n(); ++j)
          for (Index i = 0; i < c.m(); ++i) {
            const double v = c(p, i, j, b);
            if (v == 0.0) continue;
            for (Index J = 0; J < nc; ++J)
              for (Index I = 0; I < nr; ++I)
                next[b](Eigen::Index(i + c.m() * I), Eigen::Index(j + c.n() * J)) +=
                    v * f[p](Eigen::Index(I), Eigen::Index(J));
          }
    nr *= c.m();
    nc *= c.n();
    f = std::move(next);
  }
  return f[0];
}

}  // namespace ttcert
