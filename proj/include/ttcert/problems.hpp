#pragma once

// Built-in benchmark problems -div grad u + kappa^2 u = f on a box with
// homogeneous Dirichlet data and a known exact solution.

#include "ttcert/tt_cross.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ttcert {

using GradientFunction = std::function<void(std::span<const double>, std::span<double>)>;

struct ProblemSpec {
  std::string name;
  Index dim = 0;
  std::vector<std::pair<double, double>> box;
  PointFunction kappa2;  ///< empty means kappa = 0
  PointFunction f;
  PointFunction u;       ///< exact solution, may be empty
  GradientFunction grad_u;
  bool kappa_positive = false;
  double kappa2_floor = 0.0;    ///< declared lower bound of kappa^2 when kappa_positive
  double default_kappa0 = 0.0;

  bool has_exact_solution() const { return static_cast<bool>(u) && static_cast<bool>(grad_u); }
};

/// u = prod 4 x_k (1 - x_k) on the unit cube with constant kappa^2 >= 0.
/// Default shift 0.1 when kappa = 0, none otherwise.
ProblemSpec const_kappa_problem(Index d, double kappa2);

/// Poisson problem on the unit cube (d = 3) with the exact solution
/// exp(-(10 (x1 cos^2 a + x2 cos a sin a + x3 sin a) - 5)^2) prod x_i (1 - x_i).
/// The right-hand side is the analytic -Laplacian of u. Default shift 1.
ProblemSpec rotated_gaussian_problem(double alpha);

/// Shifted Henon-Heiles potential kappa^2 = sum x^2 + 0.223606 sum (x_k^2 x_{k+1} - x_{k+1}^3 / 3) + 1
/// on (-5, 5)^d with u = prod exp(-x^2 / 2) and f = (d + 1 + V_u) u.
/// kappa^2 >= 1 on the box, so no shift is needed.
ProblemSpec henon_heiles_problem(Index d);

/// Problem by name: "const-kappa" (uses kappa2), "rotated-gaussian" (uses
/// alpha, d must be 3) or "henon-heiles".
ProblemSpec make_problem(const std::string& name, Index d, double kappa2, double alpha);

/// Names accepted by make_problem.
std::vector<std::string> problem_names();

/// Throws if kappa_positive is set and kappa^2 falls below the declared
/// floor at one of `samples` uniform random points of the closed box.
void check_kappa_floor(const ProblemSpec& p, Index samples = 10000, std::uint64_t seed = 7);

}  // namespace ttcert
