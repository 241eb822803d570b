// Command-line front end: theta sweeps, queue experiments, model dumps,
// stability certificates and SVG plots. Exit code 0 iff every requested
// output was written.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mcpert/mcpert.hpp"

namespace {

using namespace mcpert;

struct CommonOptions {
  std::string norm = "inf";
  double alpha = 1.0;
  std::uint64_t seed = 1;
  std::string out;
  double theta_lo = kInfinity;  // +inf means "use the subcommand default"
  double theta_hi = kInfinity;
  std::size_t theta_steps = 100;
  std::string orders = "1,2,3";
  std::optional<double> c;
};

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> out;
  for (const auto& cell : split(text, ',')) {
    const double v = parse_number(cell);
    require(v >= 0.0 && v == static_cast<int>(v), ErrorKind::InvalidInput, "orders must be nonnegative integers");
    out.push_back(static_cast<int>(v));
  }
  require(!out.empty(), ErrorKind::InvalidInput, "at least one order is required");
  return out;
}

ThetaGrid grid_from(const CommonOptions& o, ThetaGrid defaults) {
  if (std::isfinite(o.theta_lo)) defaults.lo = o.theta_lo;
  if (std::isfinite(o.theta_hi)) defaults.hi = o.theta_hi;
  defaults.steps = o.theta_steps;
  return defaults;
}

/// Writes to --out when given, otherwise stdout. The file is only created
/// once the content is complete.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  require(static_cast<bool>(file), ErrorKind::InvalidInput, "cannot open '" + path + "' for writing");
  file << content;
  file.close();
  require(static_cast<bool>(file), ErrorKind::InvalidInput, "failed writing '" + path + "'");
}

std::string csv_string(const Table& table) {
  std::ostringstream s;
  write_csv(s, table);
  return s.str();
}

void add_common(CLI::App* cmd, CommonOptions& o, bool grid, bool orders) {
  cmd->add_option("--norm", o.norm, "one | inf | v")->check(CLI::IsMember({"one", "inf", "v"}));
  cmd->add_option("--alpha", o.alpha, "v-norm weight base (>= 1)");
  cmd->add_option("--seed", o.seed, "seed for random models");
  cmd->add_option("--out", o.out, "output path (stdout when omitted)");
  cmd->add_option("--c", o.c, "c-bound for the v-norm");
  if (grid) {
    cmd->add_option("--theta-lo", o.theta_lo, "first theta");
    cmd->add_option("--theta-hi", o.theta_hi, "last theta");
    cmd->add_option("--theta-steps", o.theta_steps, "number of theta points");
  }
  if (orders) cmd->add_option("--orders", o.orders, "comma-separated SEB orders");
}

void add_model(CLI::App* cmd, ModelConfig& m) {
  cmd->add_option("--model", m.kind, "two-state | ring | star | random | mg1")
      ->check(CLI::IsMember({"two-state", "ring", "star", "random", "mg1"}));
  cmd->add_option("--n", m.n, "number of states (ring, star, random)");
  cmd->add_option("--p", m.p);
  cmd->add_option("--q", m.q);
  cmd->add_option("--p-tilde", m.p_tilde);
  cmd->add_option("--q-tilde", m.q_tilde);
  cmd->add_option("--b", m.b, "ring step probability");
  cmd->add_option("--b-tilde", m.b_tilde);
  cmd->add_option("--beta", m.beta, "star hub leaving probability");
  cmd->add_option("--gamma", m.gamma, "star leaf holding probability");
  cmd->add_option("--beta-tilde", m.beta_tilde);
  cmd->add_option("--gamma-tilde", m.gamma_tilde);
  cmd->add_option("--lambda", m.lambda, "arrival rate");
  cmd->add_option("--mu", m.mu, "service rate");
  cmd->add_option("--r", m.r, "repair rate");
  cmd->add_option("--N", m.N, "queue truncation level");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbation bounds for stationary distributions of Markov chains"};
  app.set_config("--config", "", "key = value config file; flags override it");
  app.require_subcommand(1);

  CommonOptions common;
  ModelConfig model;

  auto* sweep = app.add_subcommand("sweep", "theta sweep of all bound families (CSV)");
  add_common(sweep, common, true, true);
  add_model(sweep, model);

  auto* queue_ssb = app.add_subcommand("queue-ssb", "alpha-optimized SSB for the breakdown queue (CSV)");
  add_common(queue_ssb, common, true, false);
  add_model(queue_ssb, model);
  std::size_t alpha_grid = 1001;
  queue_ssb->add_option("--alpha-grid", alpha_grid, "alpha grid size");

  auto* queue_seb = app.add_subcommand("queue-seb", "SEB(K) for the truncated breakdown queue (CSV)");
  add_common(queue_seb, common, false, true);
  add_model(queue_seb, model);
  double theta0 = 0.1;
  std::size_t seb_steps = 100;
  queue_seb->add_option("--theta0", theta0, "largest theta");
  queue_seb->add_option("--theta-steps", seb_steps, "number of theta points in (0, theta0]");

  auto* model_cmd = app.add_subcommand("model", "dump kernel, pi, D, condition numbers and taboo norms");
  add_common(model_cmd, common, false, false);
  add_model(model_cmd, model);

  auto* stability = app.add_subcommand("stability", "certified lower bound on the stability domain in theta");
  add_common(stability, common, false, false);
  add_model(stability, model);
  Index state = 0;
  stability->add_option("--state", state, "state i of the taboo kernel _iP");

  auto* plot = app.add_subcommand("plot", "render CSV columns as an SVG line chart");
  std::string csv_path, x_column = "theta", columns, plot_out;
  bool log_x = false, log_y = false;
  plot->add_option("--csv", csv_path, "input CSV")->required();
  plot->add_option("--x", x_column, "x column");
  plot->add_option("--columns", columns, "comma-separated y columns")->required();
  plot->add_option("--out", plot_out, "output SVG")->required();
  plot->add_flag("--log-x", log_x);
  plot->add_flag("--log-y", log_y);
  plot->add_flag("--log-log", [&](std::int64_t) { log_x = log_y = true; }, "log scale on both axes");

  CLI11_PARSE(app, argc, argv);

  try {
    const NormKind k = parse_norm(common.norm, common.alpha);
    model.seed = common.seed;

    if (sweep->parsed()) {
      SweepConfig config{model, grid_from(common, ThetaGrid{}), k, common.c, parse_orders(common.orders)};
      emit(common.out, csv_string(run_sweep(config)));
    } else if (queue_ssb->parsed()) {
      QueueSsbConfig config;
      config.lambda = model.lambda;
      config.mu = model.mu;
      config.r = model.r;
      if (queue_ssb->count("--N") > 0) config.N = model.N;
      config.grid = grid_from(common, config.grid);
      config.alpha_grid = alpha_grid;
      emit(common.out, csv_string(run_queue_ssb(config)));
    } else if (queue_seb->parsed()) {
      QueueSebConfig config;
      config.lambda = model.lambda;
      config.mu = model.mu;
      config.r = model.r;
      config.N = model.N;
      config.theta0 = theta0;
      config.steps = seb_steps;
      config.orders = parse_orders(common.orders);
      config.alpha = common.alpha;
      config.c = common.c;
      const Table table = run_queue_seb(config);
      std::cerr << "||(P1 - P0) D0||_v = " << format_number(table.rows.front().back()) << '\n';
      emit(common.out, csv_string(table));
    } else if (model_cmd->parsed()) {
      std::ostringstream s;
      dump_model(s, model, k);
      emit(common.out, s.str());
    } else if (stability->parsed()) {
      const StabilityResult result = stability_certificate(model, k, state);
      emit(common.out, "theta_bound " + format_number(result.theta_bound) + "\nalpha " + format_number(result.alpha) +
                           "\n");
    } else if (plot->parsed()) {
      std::ifstream in(csv_path);
      require(static_cast<bool>(in), ErrorKind::InvalidInput, "cannot open '" + csv_path + "'");
      const Table table = read_csv(in);
      emit(plot_out, render_svg(table, x_column, split(columns, ','), log_x, log_y));
    }
  } catch (const Error& e) {
    std::cerr << "mcpert: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mcpert: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
