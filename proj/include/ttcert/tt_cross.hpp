#pragma once

#include "ttcert/fem_assembly.hpp"
#include "ttcert/tt_core.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace ttcert {

/// Pointwise evaluator over multi-indices; must be safe to call repeatedly.
using IndexFunction = std::function<double(std::span<const Index>)>;
/// Pointwise evaluator over physical coordinates.
using PointFunction = std::function<double(std::span<const double>)>;

struct CrossOptions {
  double rel_tol = 1e-8;
  Index max_rank = 100;
  int max_sweeps = 20;
  Index kickrank = 2;
  Index initial_rank = 2;
  Index validation_samples = 1000;
  std::uint64_t seed = 1;
};

struct CrossResult {
  TtVector tt;
  bool converged = false;
  int sweeps = 0;
  /// Relative RMS error against direct evaluation on the validation sample.
  double validation_error = 0.0;
  std::uint64_t seed = 0;
  std::string variant;
};

/// ALS cross interpolation with maxvol pivots and random rank enrichment.
/// Convergence: the sampled values change by less than rel_tol (relative)
/// between consecutive sweeps. The result is rounded to rel_tol at the end.
CrossResult cross_interpolate(const IndexFunction& f, const std::vector<Index>& modes, const CrossOptions& opt);

/// A coefficient field sampled at the nodes of a quadrature grid.
struct CollocatedField {
  TtVector values;
  double source_tol = 0.0;
  std::string label;
  bool converged = true;
  double validation_error = 0.0;
};

/// Cross-approximate a function of the coordinates on the quadrature nodes.
CollocatedField collocate(const PointFunction& f, const QuadratureGrid& quad, const CrossOptions& opt,
                          std::string label);

/// Values of a TT vector at a batch of multi-indices (row-major, d per point).
Vector tt_entries(const TtVector& x, const std::vector<Index>& indices);

}  // namespace ttcert
