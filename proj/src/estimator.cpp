#include "ttcert/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ttcert {

double poincare_constant(const std::vector<double>& side_lengths) {
  if (side_lengths.empty()) throw std::invalid_argument("poincare_constant: no sides");
  double s = 0.0;
  for (double l : side_lengths) {
    if (!(l > 0.0)) throw std::invalid_argument("poincare_constant: non-positive side length");
    s += 1.0 / (l * l);
  }
  return 1.0 / (std::numbers::pi * std::sqrt(s));
}

double poincare_constant(const CartesianGrid& grid) { return poincare_constant(grid.side_lengths()); }

FemFieldValues collocate_fem_fields(const TtVector& u_h, const BlockTtVector& tau, const QuadratureGrid& quad) {
  const Index d = quad.dim();
  std::vector<Index> hat_modes, rt_modes;
  for (Index k = 0; k < d; ++k) {
    hat_modes.push_back(quad.axis(k).grid().n() + 1);
    rt_modes.push_back(2 * quad.axis(k).grid().n() + 1);
  }
  if (u_h.mode_sizes() != hat_modes || tau.mode_sizes() != rt_modes || tau.components() != d)
    throw std::invalid_argument("collocate_fem_fields: grid mismatch");
  FemFieldValues out;
  out.u = q1_values(u_h, quad);
  for (Index s = 0; s < d; ++s) {
    out.grad_u.push_back(q1_values(u_h, quad, s));
    const TtVector ts = tau.component(s);
    out.tau.push_back(tt_apply_modes(ts, rt1_component_maps(quad, s, false)));
    const TtVector ds = tt_apply_modes(ts, rt1_component_maps(quad, s, true));
    out.div_tau = s == 0 ? ds : tt_add(out.div_tau, ds);
  }
  return out;
}

double EtaTerms::eta1_norm() const {
  double s = 0.0;
  for (const TtVector& e : eta1) {
    const double n = tt_norm(e);
    s += n * n;
  }
  return std::sqrt(s);
}

double EtaTerms::eta2_norm() const { return tt_hadamard_norm(eta2_weight, eta2_residual); }

TtVector EtaTerms::eta2() const { return tt_hadamard(eta2_weight, eta2_residual); }

EtaTerms eta_terms(const FemFieldValues& fields, const TtVector& kappa_tilde_inv, const TtVector& pi_r,
                   const QuadratureGrid& quad) {
  const std::vector<Index> modes = quad.mode_sizes();
  if (kappa_tilde_inv.mode_sizes() != modes || pi_r.mode_sizes() != modes || fields.u.mode_sizes() != modes)
    throw std::invalid_argument("eta_terms: grid mismatch");
  const TtVector sw = quad.sqrt_weights_tt();
  EtaTerms out;
  for (Index s = 0; s < fields.tau.size(); ++s)
    out.eta1.push_back(tt_hadamard(sw, tt_sub(fields.tau[s], fields.grad_u[s])));
  out.eta2_weight = tt_hadamard(sw, kappa_tilde_inv);
  // Only numerically zero singular values are dropped.
  out.eta2_residual = tt_round(tt_add(pi_r, fields.div_tau), 0.0);
  return out;
}

TtVector residual_values(const TtVector& f, const TtVector* kappa2, const TtVector& u_values) {
  if (!kappa2) return f;
  return tt_sub(f, tt_hadamard(*kappa2, u_values));
}

double oscillation_constant(const CartesianGrid& grid, double kappa2_floor) {
  const double c = grid.max_h() / std::numbers::pi;
  return kappa2_floor > 0.0 ? std::min(c, 1.0 / std::sqrt(kappa2_floor)) : c;
}

double oscillation_bound(const TtVector& r, const QuadratureGrid& quad, double kappa2_floor) {
  std::vector<Grid1D> axes;
  for (Index k = 0; k < quad.dim(); ++k) axes.push_back(quad.axis(k).grid());
  const TtVector diff = tt_sub(r, q1_project(r, quad));
  return oscillation_constant(CartesianGrid(axes), kappa2_floor) * tt_norm(tt_hadamard(quad.sqrt_weights_tt(), diff));
}

ErrorCertificate certify(const TtVector& u_h, const BlockTtVector& tau, const EstimatorInputs& in,
                         const QuadratureGrid& quad) {
  if (in.kappa0 < 0.0) throw std::invalid_argument("certify: negative kappa0");
  if (in.kappa0 == 0.0 && !(in.kappa2_floor > 0.0))
    throw std::invalid_argument("certify: kappa0 = 0 requires kappa bounded away from zero");
  const TtVector* kappa2 = in.kappa2 ? &*in.kappa2 : nullptr;
  std::vector<Grid1D> axes;
  for (Index k = 0; k < quad.dim(); ++k) axes.push_back(quad.axis(k).grid());
  const CartesianGrid grid(axes);

  const FemFieldValues fields = collocate_fem_fields(u_h, tau, quad);
  const TtVector r = residual_values(in.f, kappa2, fields.u);
  const TtVector pi_r = q1_project(r, quad);
  const EtaTerms eta = eta_terms(fields, in.kappa_tilde_inv, pi_r, quad);

  ErrorCertificate c;
  c.eta1_norm = eta.eta1_norm();
  if (in.kappa_tilde_inv_sq) {
    if (in.kappa_tilde_inv_sq->mode_sizes() != quad.mode_sizes()) throw std::invalid_argument("certify: grid mismatch");
    const TtVector g = tt_left_orthogonalize(eta.eta2_residual);
    const TtVector weight = tt_hadamard(quad.weights_tt(), *in.kappa_tilde_inv_sq);
    c.eta2_norm = std::sqrt(std::max(0.0, tt_dot_weighted(g, weight, g)));
  } else {
    c.eta2_norm = eta.eta2_norm();
  }
  c.osc_constant = oscillation_constant(grid, in.kappa2_floor);
  c.osc_bound = c.osc_constant * tt_norm(tt_hadamard(quad.sqrt_weights_tt(), tt_sub(r, pi_r)));
  c.poincare_cp = poincare_constant(grid);
  c.kappa0 = in.kappa0;
  c.shift_term = in.kappa0 * c.poincare_cp * c.eta2_norm;
  c.total_bound = std::sqrt(c.eta1_norm * c.eta1_norm + c.eta2_norm * c.eta2_norm) + c.osc_bound + c.shift_term;
  c.max_rank = std::max({r.max_rank(), eta.eta2_residual.max_rank(), eta.eta2_weight.max_rank()});
  for (const TtVector& e : eta.eta1) c.max_rank = std::max(c.max_rank, e.max_rank());
  return c;
}

double energy_error(const TtVector& u_values, const std::vector<TtVector>& grad_values, const TtVector* kappa2,
                    const TtVector& u_h, const QuadratureGrid& quad) {
  const Index d = quad.dim();
  if (grad_values.size() != d) throw std::invalid_argument("energy_error: need one gradient component per direction");
  const TtVector sw = quad.sqrt_weights_tt();
  double sum = 0.0;
  for (Index s = 0; s < d; ++s) {
    const double n = tt_norm(tt_hadamard(sw, tt_sub(grad_values[s], q1_values(u_h, quad, s))));
    sum += n * n;
  }
  if (kappa2) {
    const TtVector e = tt_sub(u_values, q1_values(u_h, quad));
    sum += tt_dot_weighted(e, tt_hadamard(quad.weights_tt(), *kappa2), e);
  }
  return std::sqrt(std::max(0.0, sum));
}

}  // namespace ttcert
