#include "ttcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ttcert {

BandedCholesky::BandedCholesky(Index n, Index bandwidth)
    : n_(n), bw_(std::min(bandwidth, n > 0 ? n - 1 : 0)), band_((bw_ + 1) * n, 0.0) {}

bool BandedCholesky::factor() {
  for (Index j = 0; j < n_; ++j) {
    const Index k0 = j > bw_ ? j - bw_ : 0;
    double d = at(j, j);
    for (Index k = k0; k < j; ++k) d -= at(j, k) * at(j, k);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    at(j, j) = ljj;
    const Index iend = std::min(n_, j + bw_ + 1);
    for (Index i = j + 1; i < iend; ++i) {
      const Index kk = i > bw_ ? i - bw_ : 0;
      double s = at(i, j);
      for (Index k = std::max(kk, k0); k < j; ++k) s -= at(i, k) * at(j, k);
      at(i, j) = s / ljj;
    }
  }
  return true;
}

void BandedCholesky::solve(double* x) const {
  for (Index i = 0; i < n_; ++i) {
    const Index k0 = i > bw_ ? i - bw_ : 0;
    double s = x[i];
    for (Index k = k0; k < i; ++k) s -= at(i, k) * x[k];
    x[i] = s / at(i, i);
  }
  for (Index i = n_; i-- > 0;) {
    const Index kend = std::min(n_, i + bw_ + 1);
    double s = x[i];
    for (Index k = i + 1; k < kend; ++k) s -= at(k, i) * x[k];
    x[i] = s / at(i, i);
  }
}

KrylovResult gmres(const LinearOperator& apply, const Preconditioner& precond, const Vector& b, Vector& x,
                   int restart, int max_iter, double rtol) {
  KrylovResult res;
  const Eigen::Index n = b.size();
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  const double target = rtol * bnorm;
  Vector r(n), w(n), z(n);
  Matrix v(n, restart + 1);
  Matrix h = Matrix::Zero(restart + 1, restart);
  Vector cs(restart), sn(restart), g(restart + 1);

  apply(x.data(), w.data());
  r = b - w;
  double beta = r.norm();
  res.rel_residual = beta / bnorm;
  if (beta <= target) {
    res.converged = true;
    return res;
  }
  while (res.iterations < max_iter) {
    const double cycle_start = beta;
    v.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    int j = 0;
    for (; j < restart && res.iterations < max_iter; ++j) {
      z = v.col(j);
      precond(z.data());
      apply(z.data(), w.data());
      for (int i = 0; i <= j; ++i) {
        h(i, j) = v.col(i).dot(w);
        w.noalias() -= h(i, j) * v.col(i);
      }
      h(j + 1, j) = w.norm();
      if (h(j + 1, j) > 0.0) v.col(j + 1) = w / h(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      cs[j] = denom > 0.0 ? h(j, j) / denom : 1.0;
      sn[j] = denom > 0.0 ? h(j + 1, j) / denom : 0.0;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++res.iterations;
      if (std::abs(g[j + 1]) <= target || h(j, j) == 0.0) {
        ++j;
        break;
      }
    }
    // Solve the small triangular system and update x = x + M^{-1} V y.
    Vector y = h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    z = v.leftCols(j) * y;
    precond(z.data());
    x += z;
    apply(x.data(), w.data());
    r = b - w;
    beta = r.norm();
    res.rel_residual = beta / bnorm;
    if (beta <= target) {
      res.converged = true;
      return res;
    }
    if (beta > 0.99 * cycle_start) {
      res.stagnated = true;
      return res;
    }
  }
  return res;
}

KrylovResult pcg(const LinearOperator& apply, const Preconditioner& precond, const Vector& b, Vector& x,
                 int max_iter, double rtol) {
  KrylovResult res;
  const Eigen::Index n = b.size();
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  Vector r(n), z(n), p(n), q(n);
  apply(x.data(), q.data());
  r = b - q;
  double rn = r.norm();
  res.rel_residual = rn / bnorm;
  if (rn <= rtol * bnorm) {
    res.converged = true;
    return res;
  }
  z = r;
  precond(z.data());
  p = z;
  double rz = r.dot(z);
  while (res.iterations < max_iter) {
    apply(p.data(), q.data());
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    ++res.iterations;
    rn = r.norm();
    res.rel_residual = rn / bnorm;
    if (rn <= rtol * bnorm) {
      res.converged = true;
      break;
    }
    z = r;
    precond(z.data());
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

std::vector<Index> maxvol(const Matrix& a, double tol, int max_iter) {
  const Index m = Index(a.rows()), r = Index(a.cols());
  if (r == 0) return {};
  if (m < r) throw std::invalid_argument("maxvol: matrix must be tall");
  // Initial rows from Gaussian elimination with partial pivoting.
  Matrix work = a;
  std::vector<Index> rows;
  std::vector<char> used(m, 0);
  for (Index c = 0; c < r; ++c) {
    Index best = m;
    double bv = -1.0;
    for (Index i = 0; i < m; ++i) {
      if (used[i]) continue;
      const double v = std::abs(work(Eigen::Index(i), Eigen::Index(c)));
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    used[best] = 1;
    rows.push_back(best);
    const double piv = work(Eigen::Index(best), Eigen::Index(c));
    if (piv != 0.0 && c + 1 < r) {
      const Eigen::Index rest = Eigen::Index(r - c - 1);
      Eigen::RowVectorXd prow = work.row(Eigen::Index(best)).tail(rest) / piv;
      for (Index i = 0; i < m; ++i) {
        if (used[i]) continue;
        const double f = work(Eigen::Index(i), Eigen::Index(c));
        if (f != 0.0) work.row(Eigen::Index(i)).tail(rest) -= f * prow;
      }
    }
  }
  // Iterative row swaps.
  Matrix sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (Index k = 0; k < r; ++k) sub.row(Eigen::Index(k)) = a.row(Eigen::Index(rows[k]));
  Eigen::FullPivLU<Matrix> lu(sub);
  if (!lu.isInvertible()) return rows;
  Matrix b = lu.solve(Matrix::Identity(sub.rows(), sub.cols()));
  Matrix c = a * b;  // m x r, equals identity on the selected rows
  for (int it = 0; it < max_iter; ++it) {
    Eigen::Index i, j;
    const double v = c.cwiseAbs().maxCoeff(&i, &j);
    if (v <= tol) break;
    // Replace row rows[j] by i: rank-one update of c.
    const double pivot = c(i, j);
    const Vector cj = c.col(j) / pivot;
    Eigen::RowVectorXd ci = c.row(i);
    ci[j] -= 1.0;
    c.noalias() -= cj * ci;
    rows[Index(j)] = Index(i);
  }
  return rows;
}

}  // namespace ttcert
