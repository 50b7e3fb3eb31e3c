#include "ttcert/tt_cross.hpp"

#include "ttcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ttcert {

namespace {

/// Multi-index prefixes (left) or suffixes (right), stored flat.
struct IndexSet {
  Index width = 0;  ///< entries per tuple; 0 stands for the single empty tuple
  std::vector<Index> flat;

  Index size() const { return width == 0 ? 1 : flat.size() / width; }
  const Index* at(Index a) const { return flat.data() + a * width; }
};

class CrossState {
 public:
  CrossState(const IndexFunction& f, std::vector<Index> modes) : f_(f), modes_(std::move(modes)), idx_(modes_.size()) {}

  /// C(a, i, b) = f(left[a], i, right[b]) for core k.
  Core3 evaluate(Index k, const IndexSet& left, const IndexSet& right) {
    const Index r0 = left.size(), n = modes_[k], r1 = right.size();
    Core3 c(r0, n, r1);
    for (Index b = 0; b < r1; ++b) {
      if (right.width > 0) std::copy(right.at(b), right.at(b) + right.width, idx_.begin() + Eigen::Index(k + 1));
      for (Index i = 0; i < n; ++i) {
        idx_[k] = i;
        for (Index a = 0; a < r0; ++a) {
          if (left.width > 0) std::copy(left.at(a), left.at(a) + left.width, idx_.begin());
          c(a, i, b) = f_(std::span<const Index>(idx_));
        }
      }
    }
    return c;
  }

 private:
  const IndexFunction& f_;
  std::vector<Index> modes_;
  std::vector<Index> idx_;
};

/// Orthonormal basis of the dominant column space of m plus `kick` random
/// directions, limited to at most m.rows() columns.
Matrix enriched_basis(const Matrix& m, double rel_tol, Index max_rank, Index kick, Index d, std::mt19937_64& gen) {
  const double tol = rel_tol / std::sqrt(double(std::max<Index>(d, 1))) * m.norm();
  TruncatedSvd svd = truncated_svd(m, tol, max_rank);
  const Index rows = Index(m.rows());
  Index r = Index(svd.u.cols());
  Index extra = std::min(kick, rows > r ? rows - r : 0);
  if (max_rank > 0) extra = std::min(extra, max_rank > r ? max_rank - r : 0);
  if (extra == 0) return svd.u;
  Matrix aug(m.rows(), Eigen::Index(r + extra));
  aug.leftCols(Eigen::Index(r)) = svd.u;
  std::normal_distribution<double> normal;
  for (Eigen::Index j = Eigen::Index(r); j < aug.cols(); ++j)
    for (Eigen::Index i = 0; i < aug.rows(); ++i) aug(i, j) = normal(gen);
  Eigen::HouseholderQR<Matrix> qr(aug);
  return qr.householderQ() * Matrix::Identity(aug.rows(), aug.cols());
}

/// Interpolation coefficients Q Q(rows,:)^{-1}.
Matrix interpolation_coefficients(const Matrix& q, const std::vector<Index>& rows) {
  Matrix sel(q.cols(), q.cols());
  for (Index p = 0; p < rows.size(); ++p) sel.row(Eigen::Index(p)) = q.row(Eigen::Index(rows[p]));
  return sel.transpose().partialPivLu().solve(q.transpose()).transpose();
}

std::vector<Index> random_indices(const std::vector<Index>& modes, Index count, std::mt19937_64& gen) {
  std::vector<Index> out(count * modes.size());
  for (Index p = 0; p < count; ++p)
    for (Index k = 0; k < modes.size(); ++k) out[p * modes.size() + k] = std::uniform_int_distribution<Index>(0, modes[k] - 1)(gen);
  return out;
}

double relative_change(const Vector& a, const Vector& b) {
  const double nb = b.norm();
  return nb > 0.0 ? (a - b).norm() / nb : (a - b).norm();
}

}  // namespace

Vector tt_entries(const TtVector& x, const std::vector<Index>& indices) {
  const Index d = x.dim();
  if (d == 0 || indices.size() % d != 0) throw std::invalid_argument("tt_entries: bad index batch");
  const Index count = indices.size() / d;
  Vector out(static_cast<Eigen::Index>(count));
  for (Index p = 0; p < count; ++p) out[Eigen::Index(p)] = tt_entry(x, std::span<const Index>(indices.data() + p * d, d));
  return out;
}

CrossResult cross_interpolate(const IndexFunction& f, const std::vector<Index>& modes, const CrossOptions& opt) {
  const Index d = modes.size();
  if (d == 0) throw std::invalid_argument("cross_interpolate: no modes");
  if (!(opt.rel_tol > 0.0)) throw std::invalid_argument("cross_interpolate: rel_tol must be positive");
  for (Index n : modes)
    if (n == 0) throw std::invalid_argument("cross_interpolate: zero mode size");

  std::mt19937_64 gen(opt.seed);
  std::mt19937_64 sample_gen(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  CrossState state(f, modes);

  // left[k]: prefixes over modes 0..k-1; right[k]: suffixes over modes k..d-1.
  std::vector<IndexSet> left(d + 1), right(d + 1);
  for (Index k = 1; k < d; ++k) {
    Index capacity = 1;
    for (Index j = k; j < d && capacity < opt.initial_rank; ++j) capacity *= modes[j];
    const Index r = std::max<Index>(1, std::min(opt.initial_rank, capacity));
    std::vector<Index> suffix(modes.begin() + Eigen::Index(k), modes.end());
    right[k] = IndexSet{d - k, random_indices(suffix, r, gen)};
  }
  if (d == 1) {
    CrossResult res;
    res.tt = TtVector({state.evaluate(0, left[0], right[1])});
    res.converged = true;
    res.sweeps = 1;
    res.seed = opt.seed;
    res.variant = "als-cross/maxvol/kick";
    return res;
  }

  const Index samples = opt.validation_samples;
  const std::vector<Index> sample = random_indices(modes, samples, sample_gen);
  Vector exact(static_cast<Eigen::Index>(samples));
  for (Index p = 0; p < samples; ++p) exact[Eigen::Index(p)] = f(std::span<const Index>(sample.data() + p * d, d));

  std::vector<Core3> cores(d);
  Vector previous;
  CrossResult res;
  res.seed = opt.seed;
  res.variant = "als-cross/maxvol/kick";
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    // Forward half-sweep: left-interpolating cores, new left index sets.
    for (Index k = 0; k + 1 < d; ++k) {
      const Core3 c = state.evaluate(k, left[k], right[k + 1]);
      const Matrix q = enriched_basis(Matrix(c.left()), opt.rel_tol, opt.max_rank, opt.kickrank, d, gen);
      const std::vector<Index> rows = maxvol(q);
      cores[k] = Core3::from_left(interpolation_coefficients(q, rows), c.r0(), c.n());
      IndexSet next{k + 1, {}};
      for (Index p : rows) {
        const Index a = p % c.r0(), i = p / c.r0();
        if (k > 0) next.flat.insert(next.flat.end(), left[k].at(a), left[k].at(a) + k);
        next.flat.push_back(i);
      }
      left[k + 1] = std::move(next);
    }
    cores[d - 1] = state.evaluate(d - 1, left[d - 1], right[d]);
    // Backward half-sweep: right-interpolating cores, new right index sets.
    for (Index k = d - 1; k > 0; --k) {
      const Core3 c = state.evaluate(k, left[k], right[k + 1]);
      const Matrix mt = Matrix(c.right()).transpose();  // (n r1) x r0, row i + n b
      const Matrix q = enriched_basis(mt, opt.rel_tol, opt.max_rank, opt.kickrank, d, gen);
      const std::vector<Index> rows = maxvol(q);
      cores[k] = Core3::from_right(interpolation_coefficients(q, rows).transpose(), c.n(), c.r1());
      IndexSet next{d - k, {}};
      for (Index p : rows) {
        const Index i = p % c.n(), b = p / c.n();
        next.flat.push_back(i);
        if (k + 1 < d) next.flat.insert(next.flat.end(), right[k + 1].at(b), right[k + 1].at(b) + (d - k - 1));
      }
      right[k] = std::move(next);
    }
    cores[0] = state.evaluate(0, left[0], right[1]);

    const TtVector current(cores);
    const Vector values = tt_entries(current, sample);
    res.tt = current;
    res.sweeps = sweep;
    res.validation_error = relative_change(values, exact);
    if (previous.size() > 0 && relative_change(values, previous) < opt.rel_tol) {
      res.converged = true;
      break;
    }
    previous = values;
  }
  res.tt = tt_round(res.tt, opt.rel_tol, opt.max_rank);
  res.validation_error = relative_change(tt_entries(res.tt, sample), exact);
  return res;
}

CollocatedField collocate(const PointFunction& f, const QuadratureGrid& quad, const CrossOptions& opt,
                          std::string label) {
  const Index d = quad.dim();
  const IndexFunction g = [&quad, &f, d](std::span<const Index> idx) {
    double x[64];
    std::vector<double> big;
    double* p = x;
    if (d > 64) {
      big.resize(d);
      p = big.data();
    }
    for (Index k = 0; k < d; ++k) p[k] = quad.axis(k).nodes()[Eigen::Index(idx[k])];
    return f(std::span<const double>(p, d));
  };
  CrossResult r = cross_interpolate(g, quad.mode_sizes(), opt);
  CollocatedField out;
  out.values = std::move(r.tt);
  out.source_tol = opt.rel_tol;
  out.label = std::move(label);
  out.converged = r.converged;
  out.validation_error = r.validation_error;
  return out;
}

}  // namespace ttcert
