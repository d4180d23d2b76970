#include "bilayer/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "bilayer/bounds.hpp"
#include "bilayer/error.hpp"
#include "bilayer/fermi.hpp"
#include "bilayer/oscillatory.hpp"
#include "bilayer/parallel.hpp"

#ifndef BILAYER_GIT_DESCRIBE
#define BILAYER_GIT_DESCRIBE "v0.1.0"
#endif

namespace bilayer {

std::string_view version_string() { return BILAYER_GIT_DESCRIBE; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "critical-points", "fermi", "ft-decay", "cancellation", "bs-norm",
      "eig", "verify-thm1", "verify-thm2", "schatten-sweep"};
  return names;
}

namespace {

using json = nlohmann::json;

Column real_col(std::string name) { return {std::move(name), ColumnType::real}; }
Column int_col(std::string name) { return {std::move(name), ColumnType::integer}; }
Column text_col(std::string name) { return {std::move(name), ColumnType::text}; }

std::vector<Column> with_hash(std::vector<Column> cols) {
  cols.push_back(text_col("config_hash"));
  return cols;
}

std::vector<Column> schema_of(std::string_view command, const ExperimentConfig& c) {
  if (command == "critical-points")
    return with_hash({real_col("x"), real_col("y"), real_col("value"), text_col("class"),
                      real_col("hess_min"), real_col("hess_max"), real_col("grad_norm")});
  if (command == "fermi")
    return with_hash({int_col("component"), int_col("vertex"), real_col("x"), real_col("y"),
                      real_col("s"), real_col("kappa"), real_col("lambda"), int_col("n_components")});
  if (command == "ft-decay")
    return with_hash({real_col("radius"), real_col("sup_ft"), real_col("fit"), real_col("exponent"),
                      real_col("residual")});
  if (command == "cancellation")
    return with_hash({real_col("rho"), real_col("value"), real_col("abs_value"), real_col("error")});
  if (command == "bs-norm")
    return with_hash({real_col("re_z"), real_col("im_z"), real_col("bs_norm"), int_col("iterations"),
                      int_col("converged")});
  if (command == "eig")
    return with_hash({real_col("re_z"), real_col("im_z"), real_col("residual"), real_col("localization"),
                      real_col(c.model == Model::bilayer ? "thm1_lhs" : "thm2_lhs"), real_col("vq_norm"),
                      real_col("ratio")});
  if (command == "verify-thm1")
    return with_hash({real_col("lambda"), real_col("grid_l"), real_col("re_z"), real_col("im_z"),
                      real_col("residual"), real_col("localization"), real_col("thm1_lhs"),
                      real_col("vq_norm"), real_col("ratio")});
  if (command == "verify-thm2")
    return with_hash({real_col("re_z"), real_col("im_z"), real_col("residual"), real_col("localization"),
                      real_col("lhs_i"), real_col("lhs_ii_origin"), real_col("lhs_ii_critical"),
                      real_col("vq_norm"), real_col("v1_norm"), int_col("member_i"), int_col("member_ii"),
                      int_col("member_iii")});
  if (command == "schatten-sweep")
    return with_hash({real_col("t"), real_col("re_z"), real_col("im_z"), real_col("schatten"),
                      real_col("op_norm"), real_col("v_norm"), real_col("ratio"), real_col("alpha")});
  throw Error(Errc::config, "command: unknown command '" + std::string(command) + "'");
}

struct Context {
  const ExperimentConfig& c;
  Table table;
  json summary = json::object();

  void add(Row row) {
    row.emplace_back(c.hash);
    table.add(std::move(row));
  }
};

Grid config_grid(const ExperimentConfig& c, double lambda = 1.0) {
  return build_grid(c.grid_n, c.grid_l / lambda);
}

bool keep(const Eigenvalue& e, const ExperimentConfig& c) {
  return e.localization >= c.localization_min && std::abs(e.z.imag()) >= c.im_floor;
}

void require_dense_size(const ExperimentConfig& c) {
  if (c.eig_method == "dense" && 2 * c.grid_n * c.grid_n > 4608)
    throw Error(Errc::config, "grid.n: dense eigensolves need 2 N^2 <= 4608");
}

std::vector<Eigenvalue> compute_eigenvalues(const ExperimentConfig& c, const PotentialField& v) {
  require_dense_size(c);
  const auto kind = symbol_kind(c.model);
  if (c.eig_method == "dense") return eigenvalues_dense(kind, c.m, v);
  if (c.eig_method == "bs-scan") return eigenvalues_bs_scan(kind, c.m, v, c.window);
  throw Error(Errc::config, "eig.method: must be 'dense' or 'bs-scan'");
}

void critical_points(Context& ctx) {
  const auto pts = find_critical_points(ctx.c.critical_tol);
  int minima = 0, saddles = 0;
  for (const auto& p : pts) {
    const char* cls = p.kind == CriticalClass::minimum ? "minimum"
                      : p.kind == CriticalClass::saddle ? "saddle"
                                                        : "maximum";
    minima += p.kind == CriticalClass::minimum;
    saddles += p.kind == CriticalClass::saddle;
    ctx.add({p.location.x(), p.location.y(), p.value, std::string(cls), p.hessian_eigs.x(),
             p.hessian_eigs.y(), eval_P_derivatives(p.location).gradient.norm()});
  }
  ctx.summary["count"] = pts.size();
  ctx.summary["minima"] = minima;
  ctx.summary["saddles"] = saddles;
}

void fermi(Context& ctx) {
  const auto curve = trace_level_set(ctx.c.fermi_lambda, ctx.c.fermi_step);
  const auto n = static_cast<std::int64_t>(curve.components.size());
  double level_residual = 0.0, kmin = INFINITY, kmax = -INFINITY;
  json lengths = json::array();
  for (std::size_t ic = 0; ic < curve.components.size(); ++ic) {
    const auto& comp = curve.components[ic];
    lengths.push_back(comp.length);
    for (std::size_t i = 0; i < comp.points.size(); ++i) {
      level_residual = std::max(level_residual, std::abs(eval_P(comp.points[i]) - curve.lambda));
      kmin = std::min(kmin, comp.curvature[i]);
      kmax = std::max(kmax, comp.curvature[i]);
      ctx.add({static_cast<std::int64_t>(ic), static_cast<std::int64_t>(i), comp.points[i].x(),
               comp.points[i].y(), comp.arclength[i], comp.curvature[i], curve.lambda, n});
    }
  }
  ctx.summary["n_components"] = n;
  ctx.summary["lengths"] = lengths;
  ctx.summary["kappa_min"] = kmin;
  ctx.summary["kappa_max"] = kmax;
  ctx.summary["max_level_residual"] = level_residual;
}

void ft_decay(Context& ctx) {
  const auto& c = ctx.c;
  LevelCurve curve;
  Weight cutoff;
  if (c.decay_curve == "circle") {
    curve = trace_level_set(Quartic::radial_square(), 1.0);
  } else if (c.decay_center == "degenerate") {
    const auto d = find_degenerate_lambda();
    curve = trace_level_set(d.lambda);
    const Vec2d center = d.xi;
    const double w = c.decay_cutoff_width;
    cutoff = [center, w](const Vec2d& xi) { return 1.0 - smooth_step(((xi - center).norm() - w) / w); };
    ctx.summary["lambda_star"] = d.lambda;
    ctx.summary["xi_star"] = {d.xi.x(), d.xi.y()};
  } else {
    curve = trace_level_set(c.decay_lambda);
  }
  DecayOptions opts;
  opts.n_directions = c.decay_directions;
  const auto fit = decay_exponent(curve, cutoff, log_grid(c.decay_r_min, c.decay_r_max, c.decay_n_radii), opts);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < fit.radii.size(); ++i) {
    mx += std::log(fit.radii[i]);
    my += std::log(fit.sup_values[i]);
  }
  mx /= static_cast<double>(fit.radii.size());
  my /= static_cast<double>(fit.radii.size());
  const double intercept = my + fit.exponent * mx;
  for (std::size_t i = 0; i < fit.radii.size(); ++i)
    ctx.add({fit.radii[i], fit.sup_values[i], std::exp(intercept - fit.exponent * std::log(fit.radii[i])),
             fit.exponent, fit.residual});
  ctx.summary["exponent"] = fit.exponent;
  ctx.summary["residual"] = fit.residual;
}

// Non-increasing over the last decade of the grid, to within the quadrature
// tolerance of the kernel.
bool monotone_tail(const CancellationSup& s) {
  const double start = s.rho.back() / 10.0;
  for (std::size_t i = 1; i < s.rho.size(); ++i)
    if (s.rho[i - 1] >= start * (1.0 - 1e-12) && std::abs(s.values[i]) > std::abs(s.values[i - 1]) + 1e-6)
      return false;
  return true;
}

void cancellation(Context& ctx) {
  const auto& c = ctx.c;
  const auto s = cancellation_sup(log_grid(c.rho_min, c.rho_max, c.rho_n));
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    const auto kv = cancellation_kernel_detail(s.rho[i]);
    ctx.add({s.rho[i], kv.value, std::abs(kv.value), kv.error});
  }
  const auto refined = cancellation_sup(log_grid(c.rho_min, c.rho_max, 2 * c.rho_n - 1));
  ctx.summary["sup"] = s.sup;
  ctx.summary["argmax"] = s.argmax;
  ctx.summary["refined_sup"] = refined.sup;
  ctx.summary["refinement_change"] = std::abs(refined.sup - s.sup) / s.sup;
  ctx.summary["monotone_tail"] = monotone_tail(s);
}

BsOptions bs_options(const ExperimentConfig& c) {
  BsOptions o;
  if (c.bs_localize == "none") return o;
  std::vector<Vec2d> centers;
  for (const auto& p : find_critical_points())
    if (c.bs_localize == "critical" || p.kind == CriticalClass::saddle) centers.push_back(p.location);
  const auto part = frequency_cutoffs(c.bs_delta, std::move(centers));
  o.frequency_weight = [part](const Vec2d& xi) { return part.chi1(xi); };
  return o;
}

void bs_norm_sweep(Context& ctx) {
  const auto& c = ctx.c;
  const auto v = make_potential(config_grid(c), c.potential);
  const auto opts = bs_options(c);
  const auto& w = c.window;
  const auto total = static_cast<std::size_t>(w.n_re) * w.n_im;
  auto node = [&](std::size_t idx) {
    const int i = static_cast<int>(idx % w.n_re), j = static_cast<int>(idx / w.n_re);
    const double im = w.n_im > 1 ? w.im_min + j * (w.im_max - w.im_min) / (w.n_im - 1) : w.im_min;
    return cd(w.re_min + i * (w.re_max - w.re_min) / (w.n_re - 1), im);
  };
  const auto norms = parallel_map(total, [&](std::size_t idx) {
    return bs_norm(symbol_kind(c.model), node(idx), c.m, v, opts);
  });
  double mx = 0.0;
  int unconverged = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const cd z = node(idx);
    mx = std::max(mx, norms[idx].value);
    unconverged += !norms[idx].converged;
    ctx.add({z.real(), z.imag(), norms[idx].value, static_cast<std::int64_t>(norms[idx].iterations),
             static_cast<std::int64_t>(norms[idx].converged)});
  }
  ctx.summary["max_bs_norm"] = mx;
  ctx.summary["unconverged"] = unconverged;
}

double model_lhs(const ExperimentConfig& c, cd z) {
  if (c.model == Model::bilayer) return thm1_lhs(z, c.m, c.q);
  return std::pow(std::abs(z), c.q - 1.0);
}

void eig(Context& ctx) {
  const auto& c = ctx.c;
  if (c.model == Model::bilayer && !(c.q > 1.0)) throw Error(Errc::config, "q: eig on bilayer needs q in (1, 3/2]");
  const auto v = make_potential(config_grid(c), c.potential);
  const double vq = lq_norm(v, c.q);
  const auto ev = compute_eigenvalues(c, v);
  double best = 0.0;
  int kept = 0;
  for (const auto& e : ev) {
    const double lhs = model_lhs(c, e.z);
    const double ratio = lhs / vq;
    // bs-scan roots carry no eigenvector, so no localization filter applies
    const bool counted = c.eig_method == "bs-scan" ? std::abs(e.z.imag()) >= c.im_floor : keep(e, c);
    if (counted) {
      best = std::max(best, ratio);
      ++kept;
    }
    ctx.add({e.z.real(), e.z.imag(), e.residual, std::isnan(e.localization) ? -1.0 : e.localization, lhs, vq, ratio});
  }
  ctx.summary["eigenvalues"] = ev.size();
  ctx.summary["counted"] = kept;
  ctx.summary["vq_norm"] = vq;
  ctx.summary["empirical_constant"] = best;
}

void verify_thm1(Context& ctx) {
  const auto& c = ctx.c;
  if (c.model != Model::bilayer) throw Error(Errc::config, "model: verify-thm1 requires model = bilayer");
  if (!(c.q > 1.0)) throw Error(Errc::config, "q: verify-thm1 needs q in (1, 3/2]");
  if (c.eig_method != "dense") throw Error(Errc::config, "eig.method: verify-thm1 uses dense eigensolves");
  require_dense_size(c);
  for (double lam : c.lambdas)
    if (!(c.grid_l / lam >= 4.0 && c.grid_l / lam <= 64.0))
      throw Error(Errc::config, "sweep.lambdas: grid.l / lambda must stay in [4, 64]");
  json per_lambda = json::array();
  std::vector<std::vector<cd>> scaled;
  std::vector<std::vector<double>> ratios;
  double cmin = INFINITY, cmax = 0.0;
  for (double lam : c.lambdas) {
    const Grid g = config_grid(c, lam);
    const double m = c.m * lam * lam;
    const auto v = make_potential(g, dilated(c.potential, lam));
    const double vq = lq_norm(v, c.q);
    const auto ev = eigenvalues_dense(SymbolKind::bilayer_mass, m, v);
    std::vector<BoundReport> reports;
    scaled.emplace_back();
    ratios.emplace_back();
    for (const auto& e : ev) {
      if (!keep(e, c)) continue;
      const auto r = thm1_report(e.z, m, c.q, vq, c.constant);
      reports.push_back(r);
      scaled.back().push_back(e.z / (lam * lam));
      ratios.back().push_back(r.ratio);
      ctx.add({lam, g.half_width, e.z.real(), e.z.imag(), e.residual, e.localization, r.lhs, vq, r.ratio});
    }
    const double chat = reports.empty() ? 0.0 : empirical_constant(reports);
    cmin = std::min(cmin, chat);
    cmax = std::max(cmax, chat);
    per_lambda.push_back({{"lambda", lam}, {"eigenvalues", reports.size()}, {"empirical_constant", chat}, {"vq_norm", vq}});
  }
  // ratio deviation at corresponding eigenvalues (matched after undoing the dilation)
  double worst = 0.0;
  bool matched = true;
  for (std::size_t l = 1; l < scaled.size(); ++l) {
    if (scaled[l].size() != scaled[0].size()) matched = false;
    for (std::size_t i = 0; i < scaled[l].size(); ++i) {
      std::size_t best = 0;
      double dist = INFINITY;
      for (std::size_t j = 0; j < scaled[0].size(); ++j)
        if (std::abs(scaled[l][i] - scaled[0][j]) < dist) {
          dist = std::abs(scaled[l][i] - scaled[0][j]);
          best = j;
        }
      if (scaled[0].empty()) break;
      worst = std::max(worst, std::abs(ratios[l][i] / ratios[0][best] - 1.0));
    }
  }
  ctx.summary["per_lambda"] = per_lambda;
  ctx.summary["empirical_constant"] = cmax;
  ctx.summary["spread"] = cmin > 0.0 ? cmax / cmin - 1.0 : INFINITY;
  ctx.summary["max_ratio_deviation"] = worst;
  ctx.summary["counts_match"] = matched;
}

void verify_thm2(Context& ctx) {
  const auto& c = ctx.c;
  if (c.model != Model::trig) throw Error(Errc::config, "model: verify-thm2 requires model = trig");
  const auto v = make_potential(config_grid(c), c.potential);
  const double vq = lq_norm(v, c.q);
  const double v1 = lq_norm(v, 1.0);
  const auto ev = compute_eigenvalues(c, v);
  double c_i = 0.0, c_ii = 0.0;
  int kept = 0;
  for (const auto& e : ev) {
    auto mem = thm2_regions(e.z, c.q, vq, v1, c.constant);
    mem.iii = thm2_regions(e.z, c.q, vq, v1, c.v1_constant).iii;
    const double lhs_i = std::pow(std::abs(e.z), c.q - 1.0);
    const double lhs_o = lhs_i;
    const double lhs_c = std::pow(std::abs(e.z - 1.0 / 16.0), c.q - 1.0);
    auto flag = [](const std::optional<bool>& b) -> std::int64_t { return b ? (*b ? 1 : 0) : -1; };
    const bool counted = c.eig_method == "bs-scan" ? std::abs(e.z.imag()) >= c.im_floor : keep(e, c);
    if (counted) {
      ++kept;
      c_i = std::max(c_i, lhs_i / (1.0 + vq));
      if (c.q > 1.0) c_ii = std::max(c_ii, std::min(lhs_o, lhs_c) / vq);
    }
    ctx.add({e.z.real(), e.z.imag(), e.residual, std::isnan(e.localization) ? -1.0 : e.localization, lhs_i,
             lhs_o, lhs_c, vq, v1, flag(mem.i), flag(mem.ii), flag(mem.iii)});
  }
  ctx.summary["counted"] = kept;
  ctx.summary["vq_norm"] = vq;
  ctx.summary["v1_norm"] = v1;
  ctx.summary["q0"] = std::min(c.q, 1.25);
  ctx.summary["empirical_constant_i"] = c_i;
  if (c.q > 1.0) ctx.summary["empirical_constant_ii"] = c_ii;
}

void schatten_sweep(Context& ctx) {
  const auto& c = ctx.c;
  if (c.model != Model::bilayer) throw Error(Errc::config, "model: schatten-sweep requires model = bilayer");
  const double alpha = c.alpha > 0.0 ? c.alpha : alpha_qrd(c.q, 0.5, 2.0, c.epsilon);
  const auto v = make_potential(config_grid(c), c.potential);
  const double vnorm = std::pow(lq_norm(v, c.q), 1.0 / c.q);
  const auto ts = log_grid(c.t_min, c.t_max, c.n_t);
  double lo = INFINITY, hi = 0.0;
  for (double t : ts) {
    // |k(z)| = 1: z^2 - m^2 = (sqrt(1 - t^2) + i t)^2
    const cd w(std::sqrt(1.0 - t * t), t);
    const cd z = std::sqrt(c.m * c.m + w * w);
    const auto k = bs_matrix(SymbolKind::bilayer_mass, z, c.m, v).k;
    const double s = schatten_norm(k, alpha);
    const double op = power_norm(k).value;
    lo = std::min(lo, s / vnorm);
    hi = std::max(hi, s / vnorm);
    ctx.add({t, z.real(), z.imag(), s, op, vnorm, s / vnorm, alpha});
  }
  ctx.summary["alpha"] = alpha;
  ctx.summary["ratio_min"] = lo;
  ctx.summary["ratio_max"] = hi;
  ctx.summary["spread_factor"] = hi / lo;
}

}  // namespace

std::vector<Column> command_schema(std::string_view command, const ExperimentConfig& config) {
  return schema_of(command, config);
}

RunResult run(std::string_view command, const ExperimentConfig& config) {
  Context ctx{config, Table{schema_of(command, config), {}}};
  if (command == "critical-points") critical_points(ctx);
  else if (command == "fermi") fermi(ctx);
  else if (command == "ft-decay") ft_decay(ctx);
  else if (command == "cancellation") cancellation(ctx);
  else if (command == "bs-norm") bs_norm_sweep(ctx);
  else if (command == "eig") eig(ctx);
  else if (command == "verify-thm1") verify_thm1(ctx);
  else if (command == "verify-thm2") verify_thm2(ctx);
  else if (command == "schatten-sweep") schatten_sweep(ctx);
  return {std::string(command), std::move(ctx.table), std::move(ctx.summary)};
}

nlohmann::json summary_document(const RunResult& result, const ExperimentConfig& config) {
  json doc;
  doc["schema"] = kConfigSchema;
  doc["version"] = std::string(version_string());
  doc["command"] = result.command;
  doc["config"] = config.raw;
  doc["config_hash"] = config.hash;
  doc["rows"] = result.table.rows.size();
  doc["summary"] = result.summary;
  return doc;
}

}  // namespace bilayer
