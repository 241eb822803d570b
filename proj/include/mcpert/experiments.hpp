#pragma once

// Experiment drivers behind the command-line tool: theta sweeps over a model
// pair (P, R), the queue experiments, model dumps, stability certificates,
// and CSV / SVG serialization. Every driver is deterministic in its config.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcpert/bounds.hpp"
#include "mcpert/core.hpp"
#include "mcpert/models.hpp"
#include "mcpert/stationary.hpp"

namespace mcpert {

// ---------------------------------------------------------------------------
// Tables and CSV
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    fail(ErrorKind::InvalidInput, "no column named '" + name + "'");
  }

  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[c]);
    return out;
  }
};

/// 17 significant digits, '.' separator, literal inf / -inf / nan.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

inline void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_number(const std::string& cell) {
  if (cell == "inf") return kInfinity;
  if (cell == "-inf") return -kInfinity;
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == cell.size() && !cell.empty(), ErrorKind::InvalidInput, "not a number: '" + cell + "'");
  return value;
}

inline Table read_csv(std::istream& in) {
  Table table;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::InvalidInput, "CSV is empty");
  table.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    require(cells.size() == table.header.size(), ErrorKind::InvalidInput, "CSV row width differs from header");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(parse_number(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ModelConfig {
  std::string kind = "random";  // two-state | ring | star | random | mg1
  Index n = 40;
  std::uint64_t seed = 1;
  double p = 0.3, q = 0.2, p_tilde = 0.4, q_tilde = 0.1;
  double b = 0.25, b_tilde = 0.2;
  double beta = 0.5, gamma = 0.5, beta_tilde = 0.6, gamma_tilde = 0.4;
  double lambda = 0.5, mu = 1.0, r = 1.0;
  Index N = 50;
};

struct ThetaGrid {
  double lo = 0.01;
  double hi = 1.0;
  std::size_t steps = 100;

  std::vector<double> points() const {
    require(std::isfinite(lo) && std::isfinite(hi) && 0.0 <= lo && lo <= hi && hi <= 1.0, ErrorKind::InvalidInput,
            "theta grid must satisfy 0 <= lo <= hi <= 1");
    require(steps >= 2, ErrorKind::InvalidInput, "theta grid needs at least two points");
    std::vector<double> out(steps);
    for (std::size_t s = 0; s < steps; ++s) {
      out[s] = s + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(steps - 1);
    }
    return out;
  }
};

/// Norm by name: one | inf | v (the latter with weight base alpha).
inline NormKind parse_norm(const std::string& name, double alpha) {
  if (name == "one") return NormKind::one();
  if (name == "inf") return NormKind::infinity();
  if (name == "v") return NormKind::v(alpha);
  fail(ErrorKind::InvalidInput, "unknown norm '" + name + "' (expected one|inf|v)");
}

/// sup of ||m^T|| over distributions m on n states: 1 for One/Infinity,
/// alpha^(n-1) for the v-norm.
inline CBound default_c_bound(NormKind k, Index n) {
  if (!k.is_v()) return CBound::defaults_for(k);
  return CBound(std::pow(k.alpha(), static_cast<double>(n - 1)));
}

inline QueueSpec exponential_queue(const ModelConfig& m) { return {m.lambda, Exponential{m.mu}, m.r, m.N}; }

inline PerturbationPair build_pair(const ModelConfig& m, NormKind k) {
  if (m.kind == "two-state") return {two_state_kernel(m.p, m.q), two_state_kernel(m.p_tilde, m.q_tilde), k};
  if (m.kind == "ring") return {ring_kernel(m.n, m.b), ring_kernel(m.n, m.b_tilde), k};
  if (m.kind == "star") return {star_kernel(m.n, m.beta, m.gamma), star_kernel(m.n, m.beta_tilde, m.gamma_tilde), k};
  if (m.kind == "random") return {random_chain(m.n, m.seed), random_chain(m.n, m.seed + 1), k};
  if (m.kind == "mg1") {
    QueueKernels q = mg1_kernels(exponential_queue(m));
    return {std::move(q.p0), std::move(q.p1), k};
  }
  fail(ErrorKind::InvalidInput, "unknown model '" + m.kind + "' (expected two-state|ring|star|random|mg1)");
}

// ---------------------------------------------------------------------------
// Theta sweep
// ---------------------------------------------------------------------------

struct ColumnTaboo {
  Index column = -1;
  Matrix kernel;
  double norm = kInfinity;
};

/// Column removal with the smallest k-norm (lowest index on ties).
inline ColumnTaboo best_column_taboo(const StochasticMatrix& p, NormKind k) {
  ColumnTaboo best;
  for (Index i = 0; i < p.size(); ++i) {
    Matrix t = remove_column(p, i);
    const double norm = operator_norm(t, k);
    if (norm < best.norm) best = {i, std::move(t), norm};
  }
  return best;
}

struct SweepConfig {
  ModelConfig model;
  ThetaGrid grid;
  NormKind norm = NormKind::infinity();
  std::optional<double> c;  // v-norm c-bound override
  std::vector<int> orders{1, 2, 3};
};

/// Column layout: theta, true_diff, cnb_k3, cnb_k6, cnb_update, ssb, db,
/// seb_K..., eta_cnb_k6, eta_ssb, eta_db, eta_seb_K..., one *_ok flag per
/// bound column, then cnb_norm, cnb_norm_ok, true_diff_one, true_diff_inf.
/// true_diff, ssb, db, seb and cnb_norm use the configured norm; cnb_k3
/// targets the One norm; cnb_k6 / cnb_update target the Infinity norm.
inline Table run_sweep(const SweepConfig& config) {
  const NormKind k = config.norm;
  const PerturbationPair pair = build_pair(config.model, k);
  const StochasticMatrix& p = pair.p();
  require(validate_unichain(p).unichain, ErrorKind::NotUnichain, "P must be unichain");
  const ErgodicDecomposition ed = ergodic_decomposition(p);
  const CBound c = config.c ? CBound(*config.c) : default_c_bound(k, p.size());

  const double k3 = kappa3(ed.deviation);
  const double k6 = kappa6(ed.deviation);
  const double kn = kappa_norm(ed.deviation, k, c);
  const ColumnTaboo taboo_inf = best_column_taboo(p, NormKind::infinity());
  const double k_update = taboo_inf.norm < 1.0 ? cnb_update(p, taboo_inf.kernel) : kInfinity;
  const ColumnTaboo taboo_k = best_column_taboo(p, k);
  const double pi_norm = projector_norm(ed.pi, k);

  Table table;
  std::vector<std::string> bounds{"cnb_k3", "cnb_k6", "cnb_update", "ssb", "db"};
  for (int order : config.orders) bounds.push_back("seb_" + std::to_string(order));
  table.header = {"theta", "true_diff"};
  for (const auto& b : bounds) table.header.push_back(b);
  for (const auto& b : bounds) {
    if (b != "cnb_k3" && b != "cnb_update") table.header.push_back("eta_" + b);
  }
  for (const auto& b : bounds) table.header.push_back(b + "_ok");
  for (const char* extra : {"cnb_norm", "cnb_norm_ok", "true_diff_one", "true_diff_inf"}) table.header.push_back(extra);

  for (const double theta : config.grid.points()) {
    const ScaledPerturbation pert(pair, theta);
    const RowVector diff = stationary_distribution(pert.kernel()).values() - ed.pi.values();

    std::vector<BoundReport> reports;
    reports.push_back(cnb_bound(k3, BoundFamily::CnbKappa3, pert));
    reports.push_back(cnb_bound(k6, BoundFamily::CnbKappa6, pert));
    reports.push_back(std::isfinite(k_update) ? cnb_bound(k_update, BoundFamily::CnbUpdate, pert)
                                              : BoundReport::inapplicable(BoundFamily::CnbUpdate,
                                                                          NormKind::infinity(), 1.0 - taboo_inf.norm,
                                                                          0.0));
    reports.push_back(taboo_k.norm < 1.0 ? ssb(pert, taboo_k.kernel, pi_norm)
                                         : BoundReport::inapplicable(BoundFamily::Ssb, k, 1.0 - taboo_k.norm, 0.0));
    reports.push_back(direct_bound(pert, ed));
    for (int order : config.orders) reports.push_back(seb(pert, ed, order, c));
    const BoundReport norm_report = cnb_bound(kn, BoundFamily::CnbNorm, pert);

    std::vector<double> row{theta, measure_norm(diff, k)};
    for (const auto& r : reports) row.push_back(r.value);
    for (const auto& r : reports) {
      if (r.family == BoundFamily::CnbKappa3 || r.family == BoundFamily::CnbUpdate) continue;
      const double truth = measure_norm(diff, r.target);
      row.push_back(truth > 0.0 ? (r.applicable ? (r.value - truth) / truth : kInfinity)
                                : std::numeric_limits<double>::quiet_NaN());
    }
    for (const auto& r : reports) row.push_back(r.applicable ? 1.0 : 0.0);
    row.push_back(norm_report.value);
    row.push_back(1.0);
    row.push_back(measure_norm(diff, NormKind::one()));
    row.push_back(measure_norm(diff, NormKind::infinity()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Queue experiments
// ---------------------------------------------------------------------------

struct QueueSsbConfig {
  double lambda = 0.5, mu = 1.0, r = 1.0;
  Index N = 200;
  ThetaGrid grid{0.0, 0.01, 100};
  std::size_t alpha_grid = 1001;
  Index threshold = 2;  // f(s) = 1{s > threshold}
};

/// theta, alpha_opt, ssb_bound, true_value, ssb_ok. ssb_bound is
/// min over alpha of SSB_v(alpha) * ||f||_v with ||f||_v = alpha^-(threshold+1);
/// true_value = |pi_theta f - pi_0 f| on the chain truncated at N.
inline Table run_queue_ssb(const QueueSsbConfig& config) {
  const QueueSpec spec{config.lambda, Exponential{config.mu}, config.r, config.N};
  const QueueKernels kernels = mg1_kernels(spec);
  const Vector f = queue_indicator(spec.N + 1, config.threshold);
  const RowVector pi0 = stationary_distribution(kernels.p0).values();
  const double ceiling = std::min(mg1_feasibility_ceiling(config.lambda, config.mu),
                                  (config.mu + config.lambda) / config.lambda);

  Table table;
  table.header = {"theta", "alpha_opt", "ssb_bound", "true_value", "ssb_ok"};
  for (const double theta : config.grid.points()) {
    const AlphaOptimum best = optimize_alpha(
        [&](double alpha) {
          if (!(alpha < ceiling)) return kInfinity;
          const BoundReport report = mg1_ssb_bound(config.lambda, config.mu, config.r, alpha, theta);
          return report.value * function_norm(f, NormKind::v(alpha));
        },
        1.0, ceiling, config.alpha_grid);
    const StochasticMatrix p_theta((1.0 - theta) * kernels.p0.matrix() + theta * kernels.p1.matrix());
    const double truth = std::abs((stationary_distribution(p_theta).values() - pi0).dot(f.transpose()));
    table.rows.push_back({theta, best.alpha, best.value, truth, 1.0});
  }
  return table;
}

struct QueueSebConfig {
  double lambda = 0.5, mu = 1.0, r = 1.0;
  Index N = 50;
  double theta0 = 0.1;
  std::size_t steps = 100;
  std::vector<int> orders{1, 2, 3};
  double alpha = 1.0;
  std::optional<double> c;
  Index threshold = 2;
};

/// ||(P1 - P0) D0||_v for the truncated queue.
inline double queue_x_norm(const QueueKernels& kernels, const ErgodicDecomposition& ed, NormKind k) {
  return operator_norm((kernels.p1.matrix() - kernels.p0.matrix()) * ed.deviation, k);
}

/// theta, true_value, seb_K..., rel_err_seb_K..., x_norm for theta in
/// (0, theta0]. SEB(K) bounds |pi_theta f - pi_0 f| through ||f||_v.
inline Table run_queue_seb(const QueueSebConfig& config) {
  const QueueSpec spec{config.lambda, Exponential{config.mu}, config.r, config.N};
  const NormKind k = NormKind::v(config.alpha);
  const QueueKernels kernels = mg1_kernels(spec);
  const ErgodicDecomposition ed = ergodic_decomposition(kernels.p0);
  const double x_norm = queue_x_norm(kernels, ed, k);
  require(std::isfinite(config.theta0) && config.theta0 > 0.0 && config.theta0 <= 1.0, ErrorKind::InvalidInput,
          "theta0 must lie in (0, 1]");
  require(config.steps >= 1, ErrorKind::InvalidInput, "need at least one theta point");
  require(config.theta0 * x_norm < 1.0, ErrorKind::OutOfDomain,
          "theta0 * ||(P1 - P0) D0||_v = " + format_number(config.theta0 * x_norm) + " >= 1");

  const CBound c = config.c ? CBound(*config.c) : default_c_bound(k, spec.N + 1);
  const Vector f = queue_indicator(spec.N + 1, config.threshold);
  const double f_norm = function_norm(f, k);
  const PerturbationPair pair(kernels.p0, kernels.p1, k);

  Table table;
  table.header = {"theta", "true_value"};
  for (int order : config.orders) table.header.push_back("seb_" + std::to_string(order));
  for (int order : config.orders) table.header.push_back("rel_err_seb_" + std::to_string(order));
  table.header.push_back("x_norm");

  for (std::size_t s = 1; s <= config.steps; ++s) {
    const double theta = config.theta0 * static_cast<double>(s) / static_cast<double>(config.steps);
    const ScaledPerturbation pert(pair, theta);
    const double truth =
        std::abs((stationary_distribution(pert.kernel()).values() - ed.pi.values()).dot(f.transpose()));
    std::vector<double> row{theta, truth};
    std::vector<double> values;
    for (int order : config.orders) values.push_back(seb(pert, ed, order, c).value * f_norm);
    for (double v : values) row.push_back(v);
    for (double v : values) row.push_back(truth > 0.0 ? (v - truth) / truth : kInfinity);
    row.push_back(x_norm);
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Model dump and stability certificate
// ---------------------------------------------------------------------------

inline void print_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << name << " (" << m.rows() << "x" << m.cols() << ")\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "  ") << format_number(m(i, j));
    out << '\n';
  }
}

/// Kernel, pi, D, kappa3, kappa6 and both taboo norms of P, followed by the
/// closed-form values where the model has them.
inline void dump_model(std::ostream& out, const ModelConfig& model, NormKind k) {
  const PerturbationPair pair = build_pair(model, k);
  const StochasticMatrix& p = pair.p();
  const ErgodicDecomposition ed = ergodic_decomposition(p);
  const TabooNorms taboo = taboo_norms(p, k);

  out << "model " << model.kind << "\nnorm " << k.name() << '\n';
  print_matrix(out, "P", p.matrix());
  print_matrix(out, "pi", ed.pi.values());
  print_matrix(out, "D", ed.deviation);
  out << "kappa3 " << format_number(kappa3(ed.deviation)) << '\n';
  out << "kappa6 " << format_number(kappa6(ed.deviation)) << '\n';
  out << "taboo_first_column " << format_number(taboo.first_column) << '\n';
  out << "taboo_first_row " << format_number(taboo.first_row) << '\n';

  if (model.kind == "two-state") {
    const TwoStateClosedForms cf = two_state_closed_forms(model.p, model.q, k.is_v() ? k.alpha() : 1.0);
    out << "closed_form kappa3 " << format_number(cf.kappa3) << "\nclosed_form kappa6 " << format_number(cf.kappa6)
        << '\n';
  } else if (model.kind == "ring") {
    out << "closed_form kappa3 " << format_number(ring_kappa3(model.n, model.b)) << '\n';
  } else if (model.kind == "star") {
    const StarClosedForms cf = star_closed_forms(model.n, model.beta, model.gamma);
    out << "closed_form kappa3 " << format_number(cf.kappa3) << "\nclosed_form kappa6 " << format_number(cf.kappa6)
        << "\nclosed_form taboo_one_first_column " << format_number(cf.taboo_one.first_column)
        << "\nclosed_form taboo_one_first_row " << format_number(cf.taboo_one.first_row) << '\n';
  }
}

struct StabilityResult {
  double theta_bound;
  double alpha;  // weight base used (maximizer for the analytic queue bound)
};

/// (1 - ||_iP||) / ||R - P|| for the model pair; for mg1 the analytic
/// alpha-optimized bound of the infinite queue.
inline StabilityResult stability_certificate(const ModelConfig& model, NormKind k, Index state) {
  if (model.kind == "mg1") {
    const AlphaOptimum best = mg1_stability_lower_bound(model.lambda, model.mu, model.r);
    return {best.value, best.alpha};
  }
  const PerturbationPair pair = build_pair(model, k);
  return {stability_domain(pair, state), k.is_v() ? k.alpha() : 1.0};
}

// ---------------------------------------------------------------------------
// SVG line chart
// ---------------------------------------------------------------------------

/// One polyline per y column against the x column. Non-finite points (and
/// non-positive ones on log axes) are skipped.
inline std::string render_svg(const Table& table, const std::string& x_name, const std::vector<std::string>& y_names,
                              bool log_x, bool log_y) {
  require(!table.rows.empty(), ErrorKind::InvalidInput, "CSV has no data rows");
  require(!y_names.empty(), ErrorKind::InvalidInput, "no columns to plot");
  const std::size_t xc = table.column(x_name);
  std::vector<std::size_t> ycs;
  for (const auto& name : y_names) ycs.push_back(table.column(name));

  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  auto usable = [](double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); };

  double x_lo = kInfinity, x_hi = -kInfinity, y_lo = kInfinity, y_hi = -kInfinity;
  for (const auto& row : table.rows) {
    if (!usable(row[xc], log_x)) continue;
    for (std::size_t yc : ycs) {
      if (!usable(row[yc], log_y)) continue;
      x_lo = std::min(x_lo, tx(row[xc]));
      x_hi = std::max(x_hi, tx(row[xc]));
      y_lo = std::min(y_lo, ty(row[yc]));
      y_hi = std::max(y_hi, ty(row[yc]));
    }
  }
  require(std::isfinite(x_lo) && std::isfinite(y_lo), ErrorKind::InvalidInput, "no finite points to plot");
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  constexpr double kWidth = 720, kHeight = 480, kMargin = 60;
  auto px = [&](double v) { return kMargin + (tx(v) - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
  auto py = [&](double v) { return kHeight - kMargin - (ty(v) - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream svg;
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
      << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double value, bool log) { return format_number(log ? std::pow(10.0, value) : value); };
  svg << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin / 3 << "\" font-size=\"12\">" << x_name << ": "
      << label(x_lo, log_x) << " .. " << label(x_hi, log_x) << (log_x ? " (log)" : "") << "</text>\n";
  svg << "<text x=\"" << kMargin << "\" y=\"" << kMargin / 2 << "\" font-size=\"12\">y: " << label(y_lo, log_y)
      << " .. " << label(y_hi, log_y) << (log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t s = 0; s < ycs.size(); ++s) {
    const char* color = kColors[s % (sizeof kColors / sizeof *kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& row : table.rows) {
      if (usable(row[xc], log_x) && usable(row[ycs[s]], log_y)) svg << px(row[xc]) << ',' << py(row[ycs[s]]) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\"" << kMargin + 14 * static_cast<double>(s + 1)
        << "\" font-size=\"11\" fill=\"" << color << "\">" << y_names[s] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mcpert
