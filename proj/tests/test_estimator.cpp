#include "oracle/dense_oracle.hpp"
#include "ttcert/estimator.hpp"
#include "ttcert/primal_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace ttcert;

namespace {

using Box = std::vector<std::pair<double, double>>;
using Fn1 = std::function<double(double)>;

TtVector separable(const QuadratureGrid& quad, const std::vector<Fn1>& fs) {
  std::vector<Vector> factors;
  for (Index k = 0; k < quad.dim(); ++k) {
    const Vector& x = quad.axis(k).nodes();
    Vector v(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) v[i] = fs[k](x[i]);
    factors.push_back(v);
  }
  return tt_from_rank1(factors);
}

TtVector constant(const QuadratureGrid& quad, double c) {
  return tt_scale(separable(quad, std::vector<Fn1>(quad.dim(), [](double) { return 1.0; })), c);
}

double bubble(double x) { return 4.0 * x * (1.0 - x); }
double bubble_dx(double x) { return 4.0 - 8.0 * x; }

/// Data of u = prod 4 x (1 - x) in 2D with constant kappa^2.
struct Poly2d {
  double kappa2;
  double u(double x, double y) const { return bubble(x) * bubble(y); }
  double ux(double x, double y) const { return bubble_dx(x) * bubble(y); }
  double uy(double x, double y) const { return bubble(x) * bubble_dx(y); }
  double f(double x, double y) const { return 8.0 * (bubble(x) + bubble(y)) + kappa2 * u(x, y); }
  TtVector f_tt(const QuadratureGrid& q) const {
    const Fn1 one = [](double) { return 1.0; }, b = bubble;
    return tt_add(tt_add(tt_scale(separable(q, {b, one}), 8.0), tt_scale(separable(q, {one, b}), 8.0)),
                  tt_scale(separable(q, {b, b}), kappa2));
  }
  TtVector u_tt(const QuadratureGrid& q) const { return separable(q, {bubble, bubble}); }
  std::vector<TtVector> grad_tt(const QuadratureGrid& q) const {
    return {separable(q, {bubble_dx, bubble}), separable(q, {bubble, bubble_dx})};
  }
};

Matrix dense_uh(const TtVector& uh) {
  const Vector full = tt_full(uh);
  const Index n0 = uh.mode_sizes()[0], n1 = uh.mode_sizes()[1];
  Matrix out(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(n1));
  for (Index i = 0; i < n0; ++i)
    for (Index j = 0; j < n1; ++j) out(Eigen::Index(i), Eigen::Index(j)) = full[Eigen::Index(i * n1 + j)];
  return out;
}

Vector dense_tau(const BlockTtVector& tau) {
  std::vector<Vector> parts;
  Eigen::Index total = 0;
  for (Index s = 0; s < tau.components(); ++s) {
    parts.push_back(tt_full(tau.component(s)));
    total += parts.back().size();
  }
  Vector out(total);
  Eigen::Index off = 0;
  for (const Vector& p : parts) {
    out.segment(off, p.size()) = p;
    off += p.size();
  }
  return out;
}

TtVector random_uh(Index n, Index d, std::uint64_t seed) {
  return pad_boundary(restrict_interior(tt_random(std::vector<Index>(d, n + 1), 2, seed)));
}

QuadratureGrid unit_quad(Index d, Index n) { return QuadratureGrid(CartesianGrid::uniform(Box(d, {0.0, 1.0}), n), 4); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Poincare, KnownValues) {
  EXPECT_NEAR(poincare_constant({1.0, 1.0, 1.0}), 1.0 / (std::numbers::pi * std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(poincare_constant({1.0}), 1.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(poincare_constant(std::vector<double>(10, 10.0)), 10.0 / (std::numbers::pi * std::sqrt(10.0)), 1e-14);
  EXPECT_THROW(poincare_constant({1.0, 0.0}), std::invalid_argument);
}

TEST(CollocateFemFields, MultilinearIsReproduced) {
  const QuadratureGrid quad = unit_quad(3, 4);
  // Hat coefficients of prod x_k are the nodal values.
  std::vector<Vector> factors;
  for (Index k = 0; k < 3; ++k) factors.push_back(Vector::LinSpaced(5, 0.0, 1.0));
  const TtVector uh = tt_from_rank1(factors);
  const BlockTtVector tau = BlockTtVector::random(std::vector<Index>(3, 9), 1, 3, 0, 1);
  const FemFieldValues v = collocate_fem_fields(uh, tau, quad);
  const TtVector ref = separable(quad, {[](double x) { return x; }, [](double x) { return x; }, [](double x) { return x; }});
  EXPECT_LT((tt_full(v.u) - tt_full(ref)).cwiseAbs().maxCoeff(), 1e-13);
  const TtVector gref = separable(quad, {[](double) { return 1.0; }, [](double x) { return x; }, [](double x) { return x; }});
  EXPECT_LT((tt_full(v.grad_u[0]) - tt_full(gref)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CollocateFemFields, DivergenceOfQuadraticFlux) {
  // tau_0 = x^2 (P2 nodal values) times 1 in y (broken P1 coefficients 1), tau_1 = 0.
  const Index n = 3;
  const QuadratureGrid quad = unit_quad(2, n);
  Vector p2(2 * n + 1), br = Vector::Ones(2 * n + 1);
  for (Index i = 0; i <= 2 * n; ++i) p2[Eigen::Index(i)] = std::pow(double(i) / double(2 * n), 2);
  br[0] = 0.0;
  std::vector<Core3> cores{Core3(1, 2 * n + 1, 2), Core3(1, 2 * n + 1, 1)};
  for (Index i = 0; i <= 2 * n; ++i) cores[0](0, i, 0) = p2[Eigen::Index(i)];  // component 1 slice stays zero
  for (Index i = 0; i <= 2 * n; ++i) cores[1](0, i, 0) = br[Eigen::Index(i)];
  const BlockTtVector tau(cores, 0, 2);
  const FemFieldValues v = collocate_fem_fields(tt_zeros({n + 1, n + 1}), tau, quad);
  const TtVector ref = separable(quad, {[](double x) { return 2.0 * x; }, [](double) { return 1.0; }});
  EXPECT_LT((tt_full(v.div_tau) - tt_full(ref)).cwiseAbs().maxCoeff(), 1e-12);
  const TtVector tref = separable(quad, {[](double x) { return x * x; }, [](double) { return 1.0; }});
  EXPECT_LT((tt_full(v.tau[0]) - tt_full(tref)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CollocateFemFields, ZeroInputsGiveZero) {
  const QuadratureGrid quad = unit_quad(2, 3);
  std::vector<Core3> cores{Core3(1, 7, 2), Core3(1, 7, 1)};
  const FemFieldValues v = collocate_fem_fields(tt_zeros({4, 4}), BlockTtVector(cores, 0, 2), quad);
  EXPECT_EQ(tt_norm(v.u), 0.0);
  EXPECT_EQ(tt_norm(v.div_tau), 0.0);
  EXPECT_EQ(tt_norm(v.tau[1]), 0.0);
  EXPECT_THROW(collocate_fem_fields(tt_zeros({5, 4}), BlockTtVector(cores, 0, 2), quad), std::invalid_argument);
}

TEST(EtaTerms, MatchDenseQuadratureOracle) {
  const Index n = 4;
  const QuadratureGrid quad = unit_quad(2, n);
  const Poly2d p{2.0};
  const double kt = 1.0 / (std::sqrt(2.0) + 0.3);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const TtVector uh = random_uh(n, 2, seed);
    const BlockTtVector tau = BlockTtVector::random({9, 9}, 2, 2, 0, seed + 10);
    const TtVector kappa2 = constant(quad, p.kappa2);
    EstimatorInputs in{p.f_tt(quad), kappa2, constant(quad, kt), p.kappa2, 0.3};
    const ErrorCertificate c = certify(uh, tau, in, quad);
    const std::vector<double> xs{0.0, 0.25, 0.5, 0.75, 1.0};
    const oracle::EstimatorSquares ref = oracle::estimator_squares_2d(
        xs, xs, dense_uh(uh), dense_tau(tau), [&](double x, double y) { return p.f(x, y); },
        [&](double, double) { return p.kappa2; }, [&](double, double) { return kt; },
        [&](double x, double y) { return p.u(x, y); }, [&](double x, double y) { return p.ux(x, y); },
        [&](double x, double y) { return p.uy(x, y); });
    EXPECT_LT(rel(c.eta1_norm, std::sqrt(ref.eta1)), 1e-12);
    EXPECT_LT(rel(c.eta2_norm, std::sqrt(ref.eta2)), 1e-12);
    EXPECT_LT(rel(c.osc_bound, c.osc_constant * std::sqrt(ref.osc)), 1e-10);
    const std::vector<TtVector> grad = p.grad_tt(quad);
    EXPECT_LT(rel(energy_error(p.u_tt(quad), grad, &kappa2, uh, quad), std::sqrt(ref.energy)), 1e-12);
  }
}

TEST(EtaTerms, Eta1IsWeightedFluxNormWithoutData) {
  const QuadratureGrid quad = unit_quad(2, 4);
  const BlockTtVector tau = BlockTtVector::random({9, 9}, 3, 2, 0, 4);
  const FemFieldValues v = collocate_fem_fields(tt_zeros({5, 5}), tau, quad);
  const EtaTerms e = eta_terms(v, constant(quad, 1.0), tt_zeros(quad.mode_sizes()), quad);
  const std::vector<double> xs{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto zero = [](double, double) { return 0.0; };
  const oracle::EstimatorSquares ref = oracle::estimator_squares_2d(
      xs, xs, Matrix::Zero(5, 5), dense_tau(tau), zero, zero, [](double, double) { return 1.0; }, zero, zero, zero);
  EXPECT_LT(rel(e.eta1_norm(), std::sqrt(ref.eta1)), 1e-12);
  EXPECT_LT(rel(e.eta2_norm(), std::sqrt(ref.eta2)), 1e-12);
  EXPECT_NEAR(tt_norm(e.eta2()), e.eta2_norm(), 1e-12 * e.eta2_norm());
}

TEST(Oscillation, VanishesForMultilinearResidual) {
  const QuadratureGrid quad = unit_quad(3, 4);
  const TtVector r = tt_add(constant(quad, 1.0), separable(quad, {[](double x) { return x; }, [](double y) { return 2.0 * y; },
                                                                  [](double z) { return 1.0 - z; }}));
  EXPECT_LT(oscillation_bound(r, quad, 0.0), 1e-14);
  const CartesianGrid g = CartesianGrid::uniform(Box(3, {0.0, 1.0}), 4);
  EXPECT_DOUBLE_EQ(oscillation_constant(g, 0.0), 0.25 / std::numbers::pi);
  EXPECT_DOUBLE_EQ(oscillation_constant(g, 1e4), 1e-2);
}

TEST(Certify, ZeroProblemGivesZeroBound) {
  const QuadratureGrid quad = unit_quad(2, 3);
  std::vector<Core3> cores{Core3(1, 7, 2), Core3(1, 7, 1)};
  EstimatorInputs in{constant(quad, 0.0), std::nullopt, constant(quad, 10.0), 0.0, 0.1};
  const ErrorCertificate c = certify(tt_zeros({4, 4}), BlockTtVector(cores, 0, 2), in, quad);
  EXPECT_EQ(c.total_bound, 0.0);
  EXPECT_EQ(c.eta1_norm + c.eta2_norm + c.osc_bound + c.shift_term, 0.0);
}

TEST(Certify, ArithmeticIdentityAndArguments) {
  const Index n = 4;
  const QuadratureGrid quad = unit_quad(2, n);
  const Poly2d p{0.0};
  EstimatorInputs in{p.f_tt(quad), std::nullopt, constant(quad, 10.0), 0.0, 0.1};
  const ErrorCertificate c = certify(random_uh(n, 2, 3), BlockTtVector::random({9, 9}, 2, 2, 0, 3), in, quad);
  EXPECT_EQ(c.total_bound,
            std::sqrt(c.eta1_norm * c.eta1_norm + c.eta2_norm * c.eta2_norm) + c.osc_bound + c.shift_term);
  EXPECT_EQ(c.shift_term, 0.1 * c.poincare_cp * c.eta2_norm);
  EXPECT_GE(c.osc_bound, 0.0);
  in.kappa0 = 0.0;
  EXPECT_THROW(certify(random_uh(n, 2, 3), BlockTtVector::random({9, 9}, 2, 2, 0, 3), in, quad), std::invalid_argument);
}

TEST(Certify, GuaranteeHoldsForRandomPairs) {
  const Index n = 8;
  const QuadratureGrid quad = unit_quad(2, n);
  for (double k2 : {0.0, 1.0, 100.0}) {
    const Poly2d p{k2};
    const double k0 = k2 > 0.0 ? 0.0 : 0.1;
    const double kt = 1.0 / (std::sqrt(k2) + k0);
    std::optional<TtVector> kappa2;
    if (k2 > 0.0) kappa2 = constant(quad, k2);
    const EstimatorInputs in{p.f_tt(quad), kappa2, constant(quad, kt), k2, k0};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const TtVector uh = tt_scale(random_uh(n, 2, seed), 0.1);
      const BlockTtVector tau = BlockTtVector::random({17, 17}, 2, 2, 0, 100 + seed);
      const ErrorCertificate c = certify(uh, tau, in, quad);
      const double err = energy_error(p.u_tt(quad), p.grad_tt(quad), kappa2 ? &*kappa2 : nullptr, uh, quad);
      EXPECT_GE(c.total_bound, err * (1.0 - 1e-10)) << "kappa2 " << k2 << " seed " << seed;
    }
  }
}

TEST(Certify, ScalesLinearly) {
  const Index n = 4;
  const QuadratureGrid quad = unit_quad(2, n);
  const Poly2d p{1.0};
  const TtVector uh = random_uh(n, 2, 9);
  const BlockTtVector tau = BlockTtVector::random({9, 9}, 2, 2, 0, 9);
  const EstimatorInputs a{p.f_tt(quad), constant(quad, 1.0), constant(quad, 0.5), 1.0, 1.0};
  EstimatorInputs b = a;
  b.f = tt_scale(a.f, 3.0);
  std::vector<Core3> cores = tau.cores();
  for (double& v : cores[0].storage()) v *= 3.0;
  const ErrorCertificate ca = certify(uh, tau, a, quad);
  const ErrorCertificate cb = certify(tt_scale(uh, 3.0), BlockTtVector(cores, 0, 2), b, quad);
  EXPECT_NEAR(cb.eta1_norm, 3.0 * ca.eta1_norm, 1e-12 * cb.eta1_norm);
  EXPECT_NEAR(cb.eta2_norm, 3.0 * ca.eta2_norm, 1e-12 * cb.eta2_norm);
  EXPECT_NEAR(cb.osc_bound, 3.0 * ca.osc_bound, 1e-12 * cb.osc_bound);
  EXPECT_NEAR(cb.total_bound, 3.0 * ca.total_bound, 1e-12 * cb.total_bound);
}

TEST(EnergyError, SineInOneDimension) {
  const QuadratureGrid quad = unit_quad(1, 16);
  const TtVector u = separable(quad, {[](double x) { return std::sin(std::numbers::pi * x); }});
  const TtVector ux = separable(quad, {[](double x) { return std::numbers::pi * std::cos(std::numbers::pi * x); }});
  EXPECT_NEAR(energy_error(u, {ux}, nullptr, tt_zeros({17}), quad), std::numbers::pi / std::sqrt(2.0), 1e-10);
}

TEST(EnergyError, InterpolantOfMultilinearIsExact) {
  const QuadratureGrid quad = unit_quad(2, 4);
  std::vector<Vector> factors{Vector::LinSpaced(5, 0.0, 1.0), Vector::LinSpaced(5, 0.0, 1.0)};
  const TtVector uh = tt_from_rank1(factors);
  const TtVector u = separable(quad, {[](double x) { return x; }, [](double y) { return y; }});
  const std::vector<TtVector> g{separable(quad, {[](double) { return 1.0; }, [](double y) { return y; }}),
                                separable(quad, {[](double x) { return x; }, [](double) { return 1.0; }})};
  EXPECT_LT(energy_error(u, g, nullptr, uh, quad), 1e-13);
  EXPECT_THROW(energy_error(u, {g[0]}, nullptr, uh, quad), std::invalid_argument);
}

TEST(Certify, SquaredWeightMatchesSquaredInverse) {
  const Index n = 4;
  const QuadratureGrid quad = unit_quad(2, n);
  const Poly2d p{1.0};
  const TtVector uh = random_uh(n, 2, 5);
  const BlockTtVector tau = BlockTtVector::random({9, 9}, 2, 2, 0, 5);
  const Fn1 one = [](double) { return 1.0; }, bump = [](double x) { return 1.0 / (1.0 + x * x); };
  const TtVector kt = tt_add(separable(quad, {bump, one}), constant(quad, 0.5));
  EstimatorInputs in{p.f_tt(quad), constant(quad, 1.0), kt, 1.0, 0.0};
  const ErrorCertificate plain = certify(uh, tau, in, quad);
  in.kappa_tilde_inv_sq = tt_hadamard(kt, kt);
  const ErrorCertificate squared = certify(uh, tau, in, quad);
  EXPECT_LT(rel(squared.eta2_norm, plain.eta2_norm), 1e-12);
  EXPECT_EQ(squared.eta1_norm, plain.eta1_norm);
  in.kappa_tilde_inv_sq = constant(unit_quad(2, 3), 1.0);
  EXPECT_THROW(certify(uh, tau, in, quad), std::invalid_argument);
}
