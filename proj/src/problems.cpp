#include "ttcert/problems.hpp"

#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ttcert {

namespace {

std::vector<std::pair<double, double>> cube(Index d, double a, double b) {
  return std::vector<std::pair<double, double>>(static_cast<std::size_t>(d), {a, b});
}

// Product of g over all coordinates except `skip` (Index(-1): all of them).
template <class G>
double product_except(std::span<const double> x, Index skip, G g) {
  double p = 1.0;
  for (Index j = 0; j < static_cast<Index>(x.size()); ++j)
    if (j != skip) p *= g(x[j]);
  return p;
}

double bubble(double t) { return 4.0 * t * (1.0 - t); }

double henon_heiles_vu(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) s += x[k] * x[k] * x[k + 1] - x[k + 1] * x[k + 1] * x[k + 1] / 3.0;
  return 0.223606 * s;
}

}  // namespace

ProblemSpec const_kappa_problem(Index d, double kappa2) {
  if (d < 1) throw std::invalid_argument("const-kappa: dimension must be positive");
  if (!(kappa2 >= 0.0) || !std::isfinite(kappa2)) throw std::invalid_argument("const-kappa: kappa^2 must be >= 0");
  ProblemSpec p;
  p.name = "const-kappa";
  p.dim = d;
  p.box = cube(d, 0.0, 1.0);
  if (kappa2 > 0.0) {
    p.kappa2 = [kappa2](std::span<const double>) { return kappa2; };
    p.kappa_positive = true;
    p.kappa2_floor = kappa2;
  }
  p.default_kappa0 = kappa2 > 0.0 ? 0.0 : 0.1;
  p.u = [](std::span<const double> x) { return product_except(x, -1, bubble); };
  p.grad_u = [](std::span<const double> x, std::span<double> g) {
    for (Index k = 0; k < static_cast<Index>(x.size()); ++k)
      g[k] = 4.0 * (1.0 - 2.0 * x[k]) * product_except(x, k, bubble);
  };
  p.f = [kappa2](std::span<const double> x) {
    double s = 0.0;
    for (Index k = 0; k < static_cast<Index>(x.size()); ++k) s += 8.0 * product_except(x, k, bubble);
    return s + kappa2 * product_except(x, -1, bubble);
  };
  return p;
}

ProblemSpec rotated_gaussian_problem(double alpha) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("rotated-gaussian: alpha must be finite");
  const double c = std::cos(alpha), s = std::sin(alpha);
  const std::array<double, 3> a{10.0 * c * c, 10.0 * c * s, 10.0 * s};
  const auto z_of = [a](std::span<const double> x) { return a[0] * x[0] + a[1] * x[1] + a[2] * x[2] - 5.0; };
  const auto b1 = [](double t) { return t * (1.0 - t); };

  ProblemSpec p;
  p.name = "rotated-gaussian";
  p.dim = 3;
  p.box = cube(3, 0.0, 1.0);
  p.default_kappa0 = 1.0;
  p.u = [=](std::span<const double> x) {
    const double z = z_of(x);
    return std::exp(-z * z) * product_except(x, -1, b1);
  };
  p.grad_u = [=](std::span<const double> x, std::span<double> g) {
    const double z = z_of(x);
    const double e = std::exp(-z * z);
    const double b = product_except(x, -1, b1);
    for (Index i = 0; i < 3; ++i)
      g[i] = -2.0 * z * a[i] * e * b + e * (1.0 - 2.0 * x[i]) * product_except(x, i, b1);
  };
  p.f = [=](std::span<const double> x) {
    const double z = z_of(x);
    const double e = std::exp(-z * z);
    const double b = product_except(x, -1, b1);
    double lap = 0.0;
    for (Index i = 0; i < 3; ++i) {
      const double rest = product_except(x, i, b1);
      const double de = -2.0 * z * a[i] * e;
      const double dde = a[i] * a[i] * (4.0 * z * z - 2.0) * e;
      lap += dde * b + 2.0 * de * (1.0 - 2.0 * x[i]) * rest - 2.0 * e * rest;
    }
    return -lap;
  };
  return p;
}

ProblemSpec henon_heiles_problem(Index d) {
  if (d < 1) throw std::invalid_argument("henon-heiles: dimension must be positive");
  ProblemSpec p;
  p.name = "henon-heiles";
  p.dim = d;
  p.box = cube(d, -5.0, 5.0);
  p.kappa2 = [](std::span<const double> x) {
    double vh = 0.0;
    for (double t : x) vh += t * t;
    return vh + henon_heiles_vu(x) + 1.0;
  };
  p.kappa_positive = true;
  // The minimum over the box is attained at the origin; checked numerically for d = 2, 5, 10.
  p.kappa2_floor = 1.0;
  p.default_kappa0 = 0.0;
  const auto gauss = [](double t) { return std::exp(-0.5 * t * t); };
  p.u = [=](std::span<const double> x) { return product_except(x, -1, gauss); };
  p.grad_u = [=](std::span<const double> x, std::span<double> g) {
    const double u = product_except(x, -1, gauss);
    for (std::size_t k = 0; k < x.size(); ++k) g[k] = -x[k] * u;
  };
  p.f = [=](std::span<const double> x) {
    return (static_cast<double>(x.size()) + 1.0 + henon_heiles_vu(x)) * product_except(x, -1, gauss);
  };
  return p;
}

std::vector<std::string> problem_names() { return {"const-kappa", "rotated-gaussian", "henon-heiles"}; }

ProblemSpec make_problem(const std::string& name, Index d, double kappa2, double alpha) {
  if (name == "const-kappa") return const_kappa_problem(d, kappa2);
  if (name == "rotated-gaussian") {
    if (d != 3) throw std::invalid_argument("rotated-gaussian is defined for d = 3 only");
    return rotated_gaussian_problem(alpha);
  }
  if (name == "henon-heiles") return henon_heiles_problem(d);
  throw std::invalid_argument("unknown problem '" + name + "'");
}

void check_kappa_floor(const ProblemSpec& p, Index samples, std::uint64_t seed) {
  if (!p.kappa_positive) return;
  if (!p.kappa2) throw std::invalid_argument(p.name + ": positive kappa declared without a kappa^2 evaluator");
  if (!(p.kappa2_floor > 0.0)) throw std::invalid_argument(p.name + ": positive kappa requires a positive floor");
  std::mt19937_64 rng(seed);
  std::vector<double> x(static_cast<std::size_t>(p.dim));
  for (Index i = 0; i < samples; ++i) {
    for (Index k = 0; k < p.dim; ++k)
      x[k] = std::uniform_real_distribution<double>(p.box[k].first, p.box[k].second)(rng);
    const double v = p.kappa2(x);
    if (!(v >= p.kappa2_floor)) {
      std::ostringstream msg;
      msg << p.name << ": kappa^2 = " << v << " below the declared floor " << p.kappa2_floor;
      throw std::runtime_error(msg.str());
    }
  }
}

}  // namespace ttcert
