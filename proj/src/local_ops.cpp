#include "ttcert/local_ops.hpp"

#include <algorithm>
#include <stdexcept>

namespace ttcert {

namespace {

// t2(g, i, b1, c) = sum_{b0, j} A(b0, i, j, b1) t1(g, b0, j, c)
// t1 has shape (lead, R0, n, cols), t2 has shape (lead, m, R1, cols).
void apply_core_leading(const double* t1, Index lead, Index cols, const Core4& a, Index band, double* t2) {
  const Index R0 = a.r0(), R1 = a.r1(), m = a.m(), n = a.n();
  std::fill(t2, t2 + lead * m * R1 * cols, 0.0);
  const bool square = m == n;
  for (Index c = 0; c < cols; ++c)
    for (Index b1 = 0; b1 < R1; ++b1)
      for (Index j = 0; j < n; ++j) {
        const Index ilo = square && j > band ? j - band : 0;
        const Index ihi = square ? std::min(m, j + band + 1) : m;
        for (Index b0 = 0; b0 < R0; ++b0) {
          const double* src = t1 + lead * (b0 + R0 * (j + n * c));
          for (Index i = ilo; i < ihi; ++i) {
            const double v = a(b0, i, j, b1);
            if (v == 0.0) continue;
            double* dst = t2 + lead * (i + m * (b1 + R1 * c));
            for (Index g = 0; g < lead; ++g) dst[g] += v * src[g];
          }
        }
      }
}

thread_local std::vector<double> tl_buf1, tl_buf2;

double* scratch(std::vector<double>& buf, Index size) {
  if (buf.size() < size) buf.resize(size);
  return buf.data();
}

}  // namespace

Interface3 interface_left_step(const Interface3& prev, const Core3& y, const Core4& a, Index band,
                               const Core3& x) {
  if (prev.ry != y.r0() || prev.ra != a.r0() || prev.rx != x.r0() || a.m() != y.n() || a.n() != x.n())
    throw std::invalid_argument("interface_left_step: shape mismatch");
  const Index ry0 = prev.ry, R0 = prev.ra, m = a.m(), n = a.n(), R1 = a.r1(), rx1 = x.r1(), ry1 = y.r1();
  double* t1 = scratch(tl_buf1, ry0 * R0 * n * rx1);
  MatrixMap(t1, Eigen::Index(ry0 * R0), Eigen::Index(n * rx1)).noalias() = prev.as_matrix() * x.right();
  double* t2 = scratch(tl_buf2, ry0 * m * R1 * rx1);
  apply_core_leading(t1, ry0, rx1, a, band, t2);
  Interface3 out;
  out.ry = ry1;
  out.ra = R1;
  out.rx = rx1;
  out.data.assign(ry1 * R1 * rx1, 0.0);
  MatrixMap(out.data.data(), Eigen::Index(ry1), Eigen::Index(R1 * rx1)).noalias() =
      y.left().transpose() * ConstMatrixMap(t2, Eigen::Index(ry0 * m), Eigen::Index(R1 * rx1));
  return out;
}

Interface3 interface_right_step(const Interface3& next, const Core3& y, const Core4& a, Index band,
                                const Core3& x) {
  if (next.ry != y.r1() || next.ra != a.r1() || next.rx != x.r1() || a.m() != y.n() || a.n() != x.n())
    throw std::invalid_argument("interface_right_step: shape mismatch");
  const Index ry1 = next.ry, R1 = next.ra, rx1 = next.rx;
  const Index ry0 = y.r0(), R0 = a.r0(), rx0 = x.r0(), m = a.m(), n = a.n();
  // t1(a', j, g, b) = sum_a x(a', j, a) next(g, b, a)
  double* t1 = scratch(tl_buf1, rx0 * n * ry1 * R1);
  MatrixMap(t1, Eigen::Index(rx0 * n), Eigen::Index(ry1 * R1)).noalias() =
      x.left() * ConstMatrixMap(next.data.data(), Eigen::Index(ry1 * R1), Eigen::Index(rx1)).transpose();
  // t2(a', i, g, b') = sum_{j, b} A(b', i, j, b) t1(a', j, g, b)
  double* t2 = scratch(tl_buf2, rx0 * m * ry1 * R0);
  std::fill(t2, t2 + rx0 * m * ry1 * R0, 0.0);
  const bool square = m == n;
  for (Index b = 0; b < R1; ++b)
    for (Index g = 0; g < ry1; ++g)
      for (Index j = 0; j < n; ++j) {
        const double* src = t1 + rx0 * (j + n * (g + ry1 * b));
        const Index ilo = square && j > band ? j - band : 0;
        const Index ihi = square ? std::min(m, j + band + 1) : m;
        for (Index bp = 0; bp < R0; ++bp)
          for (Index i = ilo; i < ihi; ++i) {
            const double v = a(bp, i, j, b);
            if (v == 0.0) continue;
            double* dst = t2 + rx0 * (i + m * (g + ry1 * bp));
            for (Index p = 0; p < rx0; ++p) dst[p] += v * src[p];
          }
      }
  Interface3 out;
  out.ry = ry0;
  out.ra = R0;
  out.rx = rx0;
  out.data.assign(ry0 * R0 * rx0, 0.0);
  Matrix block(static_cast<Eigen::Index>(ry0), static_cast<Eigen::Index>(rx0));
  for (Index bp = 0; bp < R0; ++bp) {
    ConstMatrixMap tb(t2 + rx0 * m * ry1 * bp, Eigen::Index(rx0), Eigen::Index(m * ry1));
    block.noalias() = y.right() * tb.transpose();
    for (Index p = 0; p < rx0; ++p)
      for (Index q = 0; q < ry0; ++q) out.data[q + ry0 * (bp + R0 * p)] = block(Eigen::Index(q), Eigen::Index(p));
  }
  return out;
}

Matrix vec_interface_left_step(const Matrix& prev, const Core3& y, const Core3& b) {
  if (Index(prev.rows()) != y.r0() || Index(prev.cols()) != b.r0() || y.n() != b.n())
    throw std::invalid_argument("vec_interface_left_step: shape mismatch");
  Matrix t = prev * b.right();  // ry0 x (n rb1)
  ConstMatrixMap tm(t.data(), Eigen::Index(y.r0() * y.n()), Eigen::Index(b.r1()));
  return y.left().transpose() * tm;
}

Matrix vec_interface_right_step(const Matrix& next, const Core3& y, const Core3& b) {
  if (Index(next.rows()) != y.r1() || Index(next.cols()) != b.r1() || y.n() != b.n())
    throw std::invalid_argument("vec_interface_right_step: shape mismatch");
  Matrix t = b.left() * next.transpose();  // (rb0 n) x ry1
  ConstMatrixMap tm(t.data(), Eigen::Index(b.r0()), Eigen::Index(b.n() * y.r1()));
  return y.right() * tm.transpose();
}

void local_apply(const Interface3& left, const Core4& a, Index band, const Interface3& right, const double* x,
                 double* y, bool accumulate) {
  const Index ry0 = left.ry, R0 = left.ra, rx0 = left.rx;
  const Index ry1 = right.ry, R1 = right.ra, rx1 = right.rx;
  const Index m = a.m(), n = a.n();
  if (a.r0() != R0 || a.r1() != R1) throw std::invalid_argument("local_apply: rank mismatch");
  double* t1 = scratch(tl_buf1, ry0 * R0 * n * rx1);
  MatrixMap(t1, Eigen::Index(ry0 * R0), Eigen::Index(n * rx1)).noalias() =
      left.as_matrix() * ConstMatrixMap(x, Eigen::Index(rx0), Eigen::Index(n * rx1));
  double* t2 = scratch(tl_buf2, ry0 * m * R1 * rx1);
  apply_core_leading(t1, ry0, rx1, a, band, t2);
  MatrixMap out(y, Eigen::Index(ry0 * m), Eigen::Index(ry1));
  ConstMatrixMap t2m(t2, Eigen::Index(ry0 * m), Eigen::Index(R1 * rx1));
  ConstMatrixMap rm(right.data.data(), Eigen::Index(ry1), Eigen::Index(R1 * rx1));
  if (accumulate)
    out.noalias() += t2m * rm.transpose();
  else
    out.noalias() = t2m * rm.transpose();
}

Vector local_rhs(const Matrix& left, const Core3& b, const Matrix& right) {
  Matrix t = left * b.right();  // ry0 x (n rb1)
  ConstMatrixMap tm(t.data(), Eigen::Index(left.rows() * b.n()), Eigen::Index(b.r1()));
  Matrix out = tm * right.transpose();
  return Eigen::Map<const Vector>(out.data(), out.size());
}

Matrix local_dense(const Interface3& left, const Core4& a, Index band, const Interface3& right) {
  const Index r0 = left.ry, R0 = left.ra, r1 = right.ry, R1 = right.ra, m = a.m(), n = a.n();
  if (left.rx != r0 || right.rx != r1 || m != n) throw std::invalid_argument("local_dense: not square");
  const Index size = r0 * n * r1;
  Matrix out = Matrix::Zero(Eigen::Index(size), Eigen::Index(size));
  for (Index a1 = 0; a1 < r1; ++a1)
    for (Index g1 = 0; g1 < r1; ++g1)
      for (Index b1 = 0; b1 < R1; ++b1) {
        const double rv = right(g1, b1, a1);
        if (rv == 0.0) continue;
        for (Index b0 = 0; b0 < R0; ++b0)
          for (Index j = 0; j < n; ++j) {
            const Index ilo = j > band ? j - band : 0;
            const Index ihi = std::min(m, j + band + 1);
            for (Index i = ilo; i < ihi; ++i) {
              const double av = a(b0, i, j, b1) * rv;
              if (av == 0.0) continue;
              for (Index a0 = 0; a0 < r0; ++a0) {
                const Index col = a0 + r0 * (j + n * a1);
                for (Index g0 = 0; g0 < r0; ++g0)
                  out(Eigen::Index(g0 + r0 * (i + m * g1)), Eigen::Index(col)) += av * left(g0, b0, a0);
              }
            }
          }
      }
  return out;
}

}  // namespace ttcert
