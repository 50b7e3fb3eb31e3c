#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace ttcert {

using Index = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// Order-3 TT core G(a, i, b) of shape (r0, n, r1), stored column-major
/// with the left rank index running fastest.
class Core3 {
 public:
  Core3() = default;
  Core3(Index r0, Index n, Index r1);
  Core3(Index r0, Index n, Index r1, std::vector<double> data);

  Index r0() const { return r0_; }
  Index n() const { return n_; }
  Index r1() const { return r1_; }
  Index size() const { return data_.size(); }

  double& operator()(Index a, Index i, Index b) { return data_[a + r0_ * (i + n_ * b)]; }
  double operator()(Index a, Index i, Index b) const { return data_[a + r0_ * (i + n_ * b)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  /// (r0*n) x r1 unfolding.
  MatrixMap left() { return {data_.data(), Eigen::Index(r0_ * n_), Eigen::Index(r1_)}; }
  ConstMatrixMap left() const { return {data_.data(), Eigen::Index(r0_ * n_), Eigen::Index(r1_)}; }
  /// r0 x (n*r1) unfolding.
  MatrixMap right() { return {data_.data(), Eigen::Index(r0_), Eigen::Index(n_ * r1_)}; }
  ConstMatrixMap right() const { return {data_.data(), Eigen::Index(r0_), Eigen::Index(n_ * r1_)}; }

  static Core3 from_left(const Matrix& m, Index r0, Index n);
  static Core3 from_right(const Matrix& m, Index n, Index r1);

 private:
  Index r0_ = 0, n_ = 0, r1_ = 0;
  std::vector<double> data_;
};

/// Order-4 TT matrix core A(a, i, j, b) of shape (R0, m, n, R1): i is the row
/// mode index, j the column mode index.
class Core4 {
 public:
  Core4() = default;
  Core4(Index r0, Index m, Index n, Index r1);

  Index r0() const { return r0_; }
  Index m() const { return m_; }
  Index n() const { return n_; }
  Index r1() const { return r1_; }

  double& operator()(Index a, Index i, Index j, Index b) { return data_[a + r0_ * (i + m_ * (j + n_ * b))]; }
  double operator()(Index a, Index i, Index j, Index b) const { return data_[a + r0_ * (i + m_ * (j + n_ * b))]; }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }

  /// Copy the (a, b) slice as an m x n matrix.
  Matrix slice(Index a, Index b) const;
  void set_slice(Index a, Index b, const Matrix& s);

  /// Largest |i - j| over nonzero entries (0 for an all-zero core).
  Index bandwidth() const;

 private:
  Index r0_ = 0, m_ = 0, n_ = 0, r1_ = 0;
  std::vector<double> data_;
};

struct OrthogonalityTag {
  enum class Kind { none, left, right };
  Kind kind = Kind::none;
  /// left: cores [0, pivot) are left-orthogonal; right: cores (pivot, d) are
  /// right-orthogonal.
  Index pivot = 0;
};

class TtVector {
 public:
  TtVector() = default;
  explicit TtVector(std::vector<Core3> cores, OrthogonalityTag tag = {});

  Index dim() const { return cores_.size(); }
  std::vector<Index> mode_sizes() const;
  std::vector<Index> ranks() const;
  Index max_rank() const;
  const Core3& core(Index k) const { return cores_[k]; }
  const std::vector<Core3>& cores() const { return cores_; }
  std::vector<Core3> release() && { return std::move(cores_); }
  OrthogonalityTag orthogonality() const { return tag_; }

 private:
  std::vector<Core3> cores_;
  OrthogonalityTag tag_;
};

class TtMatrix {
 public:
  TtMatrix() = default;
  explicit TtMatrix(std::vector<std::shared_ptr<const Core4>> cores);
  explicit TtMatrix(std::vector<Core4> cores);

  Index dim() const { return cores_.size(); }
  std::vector<Index> row_sizes() const;
  std::vector<Index> col_sizes() const;
  std::vector<Index> ranks() const;
  const Core4& core(Index k) const { return *cores_[k]; }
  const std::shared_ptr<const Core4>& core_ptr(Index k) const { return cores_[k]; }
  Index bandwidth(Index k) const { return bands_[k]; }

 private:
  void validate();
  std::vector<std::shared_ptr<const Core4>> cores_;
  std::vector<Index> bands_;
};

// Construction -------------------------------------------------------------

TtVector tt_from_rank1(const std::vector<Vector>& factors);
TtVector tt_zeros(const std::vector<Index>& modes);
TtVector tt_ones(const std::vector<Index>& modes);
/// Gaussian random cores with interior ranks capped at `rank`.
TtVector tt_random(const std::vector<Index>& modes, Index rank, std::uint64_t seed);

TtMatrix ttm_from_kron(const std::vector<Matrix>& factors);
TtMatrix ttm_identity(const std::vector<Index>& modes);

// Arithmetic ---------------------------------------------------------------

TtVector tt_add(const TtVector& x, const TtVector& y);
TtVector tt_sub(const TtVector& x, const TtVector& y);
TtVector tt_scale(const TtVector& x, double alpha);
TtVector tt_hadamard(const TtVector& x, const TtVector& y);
double tt_dot(const TtVector& x, const TtVector& y);
/// Sum over all entries of x ⊙ w ⊙ y without forming the product.
double tt_dot_weighted(const TtVector& x, const TtVector& w, const TtVector& y);
double tt_norm(const TtVector& x);
/// Euclidean norm of c ⊙ g computed exactly by contraction, without forming
/// the Hadamard product.
double tt_hadamard_norm(const TtVector& c, const TtVector& g);
double tt_entry(const TtVector& x, std::span<const Index> index);

/// Orthogonalize cores 0..d-2 (left) with the norm carried by the last core.
TtVector tt_left_orthogonalize(const TtVector& x);
/// Orthogonalize cores 1..d-1 (right) with the norm carried by the first core.
TtVector tt_right_orthogonalize(const TtVector& x);

/// SVD-based recompression with ||x - result|| <= rel_tol ||x||. A zero
/// tolerance only drops numerically zero singular values.
TtVector tt_round(const TtVector& x, double rel_tol, Index max_rank = 0);

/// Apply one matrix per mode: y^{(k)}(a, l, b) = sum_i E_k(l, i) x^{(k)}(a, i, b).
TtVector tt_apply_modes(const TtVector& x, const std::vector<const Matrix*>& maps);
TtVector tt_apply_modes(const TtVector& x, const std::vector<Matrix>& maps);

TtMatrix ttm_add(const TtMatrix& a, const TtMatrix& b);
TtMatrix ttm_scale(const TtMatrix& a, double alpha);
TtVector ttm_matvec(const TtMatrix& a, const TtVector& x);

/// Dense tensor in global index order (last mode index fastest).
Vector tt_full(const TtVector& x, Index cap = 1'000'000);
Matrix ttm_full(const TtMatrix& a, Index cap = 1'000'000);

// Dense helpers shared by the solvers --------------------------------------

/// Truncated SVD of m with ||m - U S V^T||_F <= abs_tol.
struct TruncatedSvd {
  Matrix u;
  Vector s;
  Matrix v;
  double discarded = 0.0;  ///< Frobenius norm of the dropped part.
};
TruncatedSvd truncated_svd(const Matrix& m, double abs_tol, Index max_rank = 0);

/// Absolute tolerance used when trimming numerically zero singular values.
double zero_trim_tolerance(double frobenius_norm);

}  // namespace ttcert
