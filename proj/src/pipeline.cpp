#include "ttcert/pipeline.hpp"

#include "ttcert/complementary_solver.hpp"
#include "ttcert/primal_solver.hpp"
#include "ttcert/tt_io.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ttcert {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& what) : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

template <class F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct Fields {
  TtVector f;
  std::optional<TtVector> kappa2;
  TtVector sigma;
  TtVector kappa_tilde_inv;
  TtVector kappa_tilde_inv_sq;
  bool converged = true;
};

Fields collocate_data(const ProblemSpec& p, double kappa0, const QuadratureGrid& quad, const RunConfig& c) {
  CrossOptions opt;
  opt.rel_tol = c.cross_tol;
  opt.seed = c.seed;
  // The weight only shapes the flux, so it is resolved no finer than the flux itself.
  CrossOptions sigma_opt = opt;
  sigma_opt.rel_tol = std::max(c.cross_tol, 1e-2 * c.delta_c);

  const PointFunction kappa = [&p](std::span<const double> x) {
    return p.kappa2 ? std::sqrt(std::max(0.0, p.kappa2(x))) : 0.0;
  };
  Fields out;
  const auto take = [&out](CollocatedField cf) {
    out.converged = out.converged && cf.converged;
    return std::move(cf.values);
  };
  out.f = take(collocate(p.f, quad, opt, "f"));
  if (p.kappa2) out.kappa2 = take(collocate(p.kappa2, quad, opt, "kappa2"));
  out.sigma = take(collocate(
      [&kappa, kappa0](std::span<const double> x) {
        const double kt = kappa(x) + kappa0;
        return 1.0 / (kt * kt);
      },
      quad, sigma_opt, "sigma"));
  out.kappa_tilde_inv = take(collocate(
      [&kappa, kappa0](std::span<const double> x) { return 1.0 / (kappa(x) + kappa0); }, quad, opt,
      "kappa_tilde_inv"));
  // Same function as sigma, at the accuracy the bound needs.
  out.kappa_tilde_inv_sq = take(collocate(
      [&kappa, kappa0](std::span<const double> x) {
        const double kt = kappa(x) + kappa0;
        return 1.0 / (kt * kt);
      },
      quad, opt, "kappa_tilde_inv_sq"));
  return out;
}

void save_results(const std::string& dir, const TtVector& u_h, const BlockTtVector& tau) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_tt((base / "u_h.tt").string(), u_h);
  for (Index s = 0; s < tau.components(); ++s)
    save_tt((base / ("tau_" + std::to_string(s) + ".tt")).string(), tau.component(s));
}

void echo_config(RunRecord& r, const RunConfig& c) {
  r.problem = c.problem;
  r.dim = c.dim;
  r.n = c.n;
  r.m = c.m;
  r.kappa2 = c.kappa2;
  r.alpha = c.alpha;
  r.delta_p = c.delta_p;
  r.delta_c = c.delta_c;
  r.kappa0 = c.kappa0.value_or(std::numeric_limits<double>::quiet_NaN());
  r.seed = c.seed;
  r.max_rank_cap = c.max_rank;
}

}  // namespace

void RunConfig::validate() const {
  const auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (dim < 1) fail("dim must be >= 1");
  if (n < 2) fail("n must be >= 2");
  if (m < 1 || m > 16) fail("m must be in [1, 16]");
  if (!(delta_p > 0.0) || !(delta_c > 0.0)) fail("tolerances must be positive");
  if (!(cross_tol > 0.0)) fail("cross tolerance must be positive");
  if (!(kappa2 >= 0.0) || !std::isfinite(kappa2)) fail("kappa2 must be finite and >= 0");
  if (!std::isfinite(alpha)) fail("alpha must be finite");
  if (kappa0 && (!(*kappa0 >= 0.0) || !std::isfinite(*kappa0))) fail("kappa0 must be finite and >= 0");
  const ProblemSpec p = make_problem(problem, dim, kappa2, alpha);
  const double k0 = kappa0.value_or(p.default_kappa0);
  if (k0 == 0.0 && !p.kappa_positive) fail(problem + ": kappa may vanish, kappa0 must be positive");
}

RunRecord run(const RunConfig& config) { return run_with_artifacts(config).record; }

RunArtifacts run_with_artifacts(const RunConfig& config) {
  RunArtifacts out;
  RunRecord& r = out.record;
  echo_config(r, config);
  try {
    ProblemSpec p;
    try {
      config.validate();
      p = make_problem(config.problem, config.dim, config.kappa2, config.alpha);
      check_kappa_floor(p);
    } catch (const std::exception& e) {
      throw StageError("config", e.what());
    }
    const double kappa0 = config.kappa0.value_or(p.default_kappa0);
    r.kappa0 = kappa0;
    const QuadratureGrid quad(CartesianGrid::uniform(p.box, config.n), config.m);

    auto t0 = Clock::now();
    const Fields data = stage("collocate", [&] { return collocate_data(p, kappa0, quad, config); });
    r.converged_cross = data.converged;
    r.t_collocate = seconds_since(t0);
    const TtVector* kappa2 = data.kappa2 ? &*data.kappa2 : nullptr;

    t0 = Clock::now();
    const AlsResult primal = stage("primal", [&] {
      AlsOptions opt;
      opt.tol = config.delta_p;
      opt.max_rank = config.max_rank;
      opt.seed = config.seed;
      return solve_primal(assemble_primal(quad, kappa2, data.f), opt, config.seed);
    });
    r.t_primal = seconds_since(t0);
    r.rank_u = primal.x.max_rank();
    r.sweeps_primal = primal.report.sweeps;
    r.converged_primal = primal.report.converged;
    out.u_h = primal.x;

    t0 = Clock::now();
    const BlockAlsResult flux = stage("complementary", [&] {
      const ComplementarySystem sys =
          assemble_complementary(quad, data.sigma, primal.x, kappa2, data.f, 0.1 * config.delta_c);
      BlockAlsOptions opt;
      opt.tol = config.delta_c;
      opt.max_rank = config.max_rank;
      return block_als_solve(sys, complementary_initial_guess(sys, config.seed), opt);
    });
    r.t_compl = seconds_since(t0);
    r.rank_tau = flux.tau.max_rank();
    r.sweeps_compl = flux.report.sweeps;
    r.converged_compl = flux.report.converged;
    out.tau = flux.tau;

    t0 = Clock::now();
    const ErrorCertificate cert = stage("estimate", [&] {
      EstimatorInputs in;
      in.f = data.f;
      in.kappa2 = data.kappa2;
      in.kappa_tilde_inv = data.kappa_tilde_inv;
      in.kappa_tilde_inv_sq = data.kappa_tilde_inv_sq;
      in.kappa2_floor = p.kappa_positive ? p.kappa2_floor : 0.0;
      in.kappa0 = kappa0;
      return certify(primal.x, flux.tau, in, quad);
    });
    r.t_estimate = seconds_since(t0);
    r.eta1 = cert.eta1_norm;
    r.eta2 = cert.eta2_norm;
    r.osc = cert.osc_bound;
    r.shift_term = cert.shift_term;
    r.bound = cert.total_bound;
    r.poincare_cp = cert.poincare_cp;
    r.osc_constant = cert.osc_constant;
    r.rank_estimator = cert.max_rank;

    if (p.has_exact_solution()) {
      stage("energy_error", [&] {
        CrossOptions opt;
        opt.rel_tol = config.cross_tol;
        opt.seed = config.seed;
        const TtVector u = collocate(p.u, quad, opt, "u").values;
        std::vector<TtVector> grad;
        for (Index s = 0; s < p.dim; ++s) {
          const PointFunction gs = [&p, s](std::span<const double> x) {
            thread_local std::vector<double> g;
            g.resize(x.size());
            p.grad_u(x, g);
            return g[s];
          };
          grad.push_back(collocate(gs, quad, opt, "grad_u").values);
        }
        const double err = energy_error(u, grad, kappa2, primal.x, quad);
        const double norm = energy_error(u, grad, kappa2, tt_zeros(primal.x.mode_sizes()), quad);
        r.energy_error = err;
        if (norm > 0.0) r.relative_energy_error = err / norm;
        if (err > 0.0) r.i_eff = cert.total_bound / err;
        return 0;
      });
    }

    if (!config.save_tt_dir.empty())
      stage("output", [&] {
        save_results(config.save_tt_dir, primal.x, flux.tau);
        return 0;
      });
  } catch (const StageError& e) {
    r.status = "failed";
    r.failed_stage = e.stage;
    r.message = e.what();
  }
  return out;
}

std::vector<std::string> sweep_axes() { return {"n", "d", "kappa2", "alpha"}; }

RunConfig with_axis(const RunConfig& base, const std::string& axis, double value) {
  RunConfig c = base;
  const auto as_index = [&](const char* what) {
    if (value != std::floor(value)) throw std::invalid_argument(std::string(what) + " values must be integers");
    return static_cast<Index>(value);
  };
  if (axis == "n")
    c.n = as_index("n");
  else if (axis == "d")
    c.dim = as_index("d");
  else if (axis == "kappa2")
    c.kappa2 = value;
  else if (axis == "alpha")
    c.alpha = value;
  else
    throw std::invalid_argument("unknown sweep axis '" + axis + "'");
  return c;
}

std::vector<RunRecord> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                             int workers) {
  std::vector<RunConfig> configs;
  for (double v : values) configs.push_back(with_axis(base, axis, v));
  std::vector<RunRecord> out(configs.size());
  if (!base.save_tt_dir.empty())
    for (std::size_t i = 0; i < configs.size(); ++i)
      configs[i].save_tt_dir = (std::filesystem::path(base.save_tt_dir) / (axis + "_" + std::to_string(i))).string();
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(configs.size())));
  if (w == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) out[i] = run(configs[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < configs.size(); i = next++) out[i] = run(configs[i]);
    });
  for (std::thread& t : pool) t.join();
  return out;
}

std::optional<double> effectivity_slope(const std::vector<RunRecord>& records) {
  std::vector<double> xs, ys;
  for (const RunRecord& r : records)
    if (r.ok() && r.i_eff && *r.i_eff > 1.0) {
      xs.push_back(std::log(static_cast<double>(r.n)));
      ys.push_back(std::log(*r.i_eff - 1.0));
    }
  if (xs.size() < 2) return std::nullopt;
  const double k = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = k * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (k * sxy - sx * sy) / den;
}

namespace {

nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nullptr; };
  j["problem"] = r.problem;
  j["dim"] = r.dim;
  j["n"] = r.n;
  j["m"] = r.m;
  j["kappa2"] = r.kappa2;
  j["alpha"] = r.alpha;
  j["delta_p"] = r.delta_p;
  j["delta_c"] = r.delta_c;
  j["kappa0"] = r.kappa0;
  j["seed"] = r.seed;
  j["max_rank_cap"] = r.max_rank_cap;
  j["eta1"] = r.eta1;
  j["eta2"] = r.eta2;
  j["osc"] = r.osc;
  j["shift_term"] = r.shift_term;
  j["bound"] = r.bound;
  j["poincare_cp"] = r.poincare_cp;
  j["osc_constant"] = r.osc_constant;
  j["energy_error"] = opt(r.energy_error);
  j["relative_energy_error"] = opt(r.relative_energy_error);
  j["i_eff"] = opt(r.i_eff);
  j["t_collocate"] = r.t_collocate;
  j["t_primal"] = r.t_primal;
  j["t_compl"] = r.t_compl;
  j["t_estimate"] = r.t_estimate;
  j["rank_u"] = r.rank_u;
  j["rank_tau"] = r.rank_tau;
  j["rank_estimator"] = r.rank_estimator;
  j["sweeps_primal"] = r.sweeps_primal;
  j["sweeps_compl"] = r.sweeps_compl;
  j["converged_cross"] = r.converged_cross;
  j["converged_primal"] = r.converged_primal;
  j["converged_compl"] = r.converged_compl;
  j["status"] = r.status;
  j["failed_stage"] = r.failed_stage;
  j["message"] = r.message;
  return j;
}

std::string csv_cell(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(17) << v.get<double>();
    return os.str();
  }
  return v.dump();
}

}  // namespace

std::vector<std::string> record_fields() {
  std::vector<std::string> out;
  const nlohmann::ordered_json j = to_json(RunRecord{});
  for (const auto& item : j.items()) out.push_back(item.key());
  return out;
}

std::string csv_header() {
  std::string h;
  for (const std::string& f : record_fields()) h += (h.empty() ? "" : ",") + f;
  return h;
}

std::string csv_row(const RunRecord& r) {
  std::string row;
  bool first = true;
  const nlohmann::ordered_json j = to_json(r);
  for (const auto& item : j.items()) {
    if (!first) row += ',';
    row += csv_cell(item.value());
    first = false;
  }
  return row;
}

std::string json_line(const RunRecord& r) { return to_json(r).dump(); }

void write_records(std::ostream& out, const std::vector<RunRecord>& records, const std::string& format) {
  if (format == "csv") {
    out << csv_header() << '\n';
    for (const RunRecord& r : records) out << csv_row(r) << '\n';
  } else if (format == "json") {
    for (const RunRecord& r : records) out << json_line(r) << '\n';
  } else {
    throw std::invalid_argument("unknown output format '" + format + "'");
  }
}

}  // namespace ttcert
