#pragma once

// Example chains with closed-form stationary data, random chains, the
// M/G/1 queue with server breakdowns (truncated at N), analytic strong
// stability coefficients for that queue, and two-state bound oracles.

#include <cmath>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "mcpert/bounds.hpp"
#include "mcpert/core.hpp"
#include "mcpert/rng.hpp"
#include "mcpert/stationary.hpp"

namespace mcpert {

namespace detail {

inline void require_open_unit(double x, const char* name) {
  require(std::isfinite(x) && x > 0.0 && x < 1.0, ErrorKind::InvalidInput, std::string(name) + " must lie in (0, 1)");
}

}  // namespace detail

/// Norms of the two taboo kernels obtained by deleting the first column
/// (never enter state 0) or the first row (never leave state 0).
struct TabooNorms {
  double first_column;
  double first_row;
};

inline TabooNorms taboo_norms(const StochasticMatrix& p, NormKind k) {
  return {operator_norm(remove_column(p, 0), k), operator_norm(remove_row(p, 0), k)};
}

// ---------------------------------------------------------------------------
// Two-state chain
// ---------------------------------------------------------------------------

struct TwoStateParams {
  double p;
  double q;
  double p_tilde;
  double q_tilde;

  void validate() const {
    detail::require_open_unit(p, "p");
    detail::require_open_unit(q, "q");
    detail::require_open_unit(p_tilde, "p~");
    detail::require_open_unit(q_tilde, "q~");
  }
};

/// [[1-p, p], [q, 1-q]]
inline StochasticMatrix two_state_kernel(double p, double q) {
  detail::require_open_unit(p, "p");
  detail::require_open_unit(q, "q");
  Matrix m(2, 2);
  m << 1.0 - p, p, q, 1.0 - q;
  return StochasticMatrix(std::move(m));
}

struct TwoStateClosedForms {
  RowVector pi;
  Matrix deviation;
  double kappa3;
  double kappa6;
  TabooNorms taboo;  // in the v-norm with the requested alpha
};

inline TwoStateClosedForms two_state_closed_forms(double p, double q, double alpha = 1.0) {
  detail::require_open_unit(p, "p");
  detail::require_open_unit(q, "q");
  NormKind::v(alpha);
  const double s = p + q;
  RowVector pi(2);
  pi << q / s, p / s;
  Matrix d(2, 2);
  d << p, -p, -q, q;
  d /= s * s;
  return {pi, d, 1.0 / (2.0 * s), 1.0 / s, {std::max(alpha * p, 1.0 - q), (1.0 - alpha) * q / alpha + 1.0}};
}

// ---------------------------------------------------------------------------
// Ring network
// ---------------------------------------------------------------------------

namespace detail {

inline void require_ring(Index n, double b) {
  require(n >= 2, ErrorKind::InvalidInput, "ring needs n >= 2");
  require(std::isfinite(b) && b > 0.0 && b <= 0.5, ErrorKind::InvalidInput, "ring needs b in (0, 1/2]");
}

}  // namespace detail

/// Symmetric nearest-neighbour walk on Z_n: P(i, i +- 1) = b, P(i, i) = 1 - 2b.
/// For n = 2 both neighbours coincide and their mass adds up.
inline StochasticMatrix ring_kernel(Index n, double b) {
  detail::require_ring(n, b);
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) += 1.0 - 2.0 * b;
    m(i, (i + 1) % n) += b;
    m(i, (i + n - 1) % n) += b;
  }
  return StochasticMatrix(std::move(m));
}

/// Circulant D with D(i, j) = d_{(j - i) mod n},
/// d_i = (n-1)(n+1)/(12bn) - (n-i)i/(2bn).
inline Matrix ring_deviation(Index n, double b) {
  detail::require_ring(n, b);
  const double nn = static_cast<double>(n);
  std::vector<double> d(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double ii = static_cast<double>(i);
    d[static_cast<std::size_t>(i)] = (nn - 1.0) * (nn + 1.0) / (12.0 * b * nn) - (nn - ii) * ii / (2.0 * b * nn);
  }
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = d[static_cast<std::size_t>((j - i + n) % n)];
  }
  return out;
}

inline double ring_kappa3(Index n, double b) {
  detail::require_ring(n, b);
  const Index half = n / 2;
  return static_cast<double>(half) * static_cast<double>(n - half) / (4.0 * b * static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Star network
// ---------------------------------------------------------------------------

namespace detail {

inline void require_star(Index n, double beta, double gamma) {
  require(n >= 2, ErrorKind::InvalidInput, "star needs n >= 2");
  require(std::isfinite(beta) && beta > 0.0 && beta <= 1.0, ErrorKind::InvalidInput, "star needs beta in (0, 1]");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma < 1.0, ErrorKind::InvalidInput, "star needs gamma in [0, 1)");
}

}  // namespace detail

/// Hub 0 stays with 1 - beta and moves to each leaf with beta/(n-1); a leaf
/// stays with gamma and returns to the hub with 1 - gamma.
inline StochasticMatrix star_kernel(Index n, double beta, double gamma) {
  detail::require_star(n, beta, gamma);
  Matrix m = Matrix::Zero(n, n);
  m(0, 0) = 1.0 - beta;
  for (Index i = 1; i < n; ++i) {
    m(0, i) = beta / static_cast<double>(n - 1);
    m(i, 0) = 1.0 - gamma;
    m(i, i) = gamma;
  }
  return StochasticMatrix(std::move(m));
}

struct StarClosedForms {
  RowVector pi;
  Matrix deviation;
  double kappa3;
  double kappa6;
  TabooNorms taboo_one;  // 1-norm taboo norms
};

inline StarClosedForms star_closed_forms(Index n, double beta, double gamma) {
  detail::require_star(n, beta, gamma);
  const double m = static_cast<double>(n - 1);
  const double g = 1.0 - gamma;
  const double s = g + beta;

  RowVector pi = RowVector::Constant(n, beta / (m * s));
  pi(0) = g / s;

  Matrix d(n, n);
  d(0, 0) = beta / (s * s);
  for (Index i = 1; i < n; ++i) {
    d(0, i) = -beta / (s * s * m);
    d(i, 0) = -g / (s * s);
  }
  const double leaf = beta * (g + s) / (g * s * s * m);
  d.bottomRightCorner(n - 1, n - 1).setConstant(-leaf);
  d.bottomRightCorner(n - 1, n - 1).diagonal().array() += 1.0 / g;

  return {pi, d, 1.0 / (2.0 * g), 1.0 / g, {gamma + beta / m, std::max(gamma, m * g)}};
}

// ---------------------------------------------------------------------------
// Random chains
// ---------------------------------------------------------------------------

/// Entries uniform on (0, 1) drawn row-major, then each row normalized.
inline StochasticMatrix random_chain(Index n, std::uint64_t seed) {
  require(n >= 2, ErrorKind::InvalidInput, "random chain needs n >= 2");
  SplitMix64 rng(seed);
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m(i, j) = rng.uniform();
  }
  return StochasticMatrix::renormalized(std::move(m));
}

/// Random walk on a complete graph with symmetric uniform edge weights; its
/// stationary law is proportional to the weighted degrees, so it is reversible.
inline StochasticMatrix random_reversible_chain(Index n, std::uint64_t seed) {
  require(n >= 2, ErrorKind::InvalidInput, "random chain needs n >= 2");
  SplitMix64 rng(seed);
  Matrix w(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) w(i, j) = w(j, i) = rng.uniform();
  }
  return StochasticMatrix::renormalized(std::move(w));
}

// ---------------------------------------------------------------------------
// M/G/1 queue with breakdowns
// ---------------------------------------------------------------------------

struct Exponential {
  double mu;
};

struct AtomMixture {
  std::vector<std::pair<double, double>> atoms;  // (x_k, w_k)
};

class ServiceDistribution {
 public:
  ServiceDistribution(Exponential e) : variant_(e) {
    require(std::isfinite(e.mu) && e.mu > 0.0, ErrorKind::InvalidInput, "service rate must be > 0");
  }

  ServiceDistribution(AtomMixture a) : variant_(std::move(a)) {
    const auto& atoms = std::get<AtomMixture>(variant_).atoms;
    require(!atoms.empty(), ErrorKind::InvalidInput, "atom mixture needs at least one atom");
    double total = 0.0;
    for (const auto& [x, w] : atoms) {
      require(std::isfinite(x) && x >= 0.0, ErrorKind::InvalidInput, "atom location must be >= 0");
      require(std::isfinite(w) && w > 0.0, ErrorKind::InvalidInput, "atom weight must be > 0");
      total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorKind::InvalidInput, "atom weights must sum to 1");
  }

  bool is_exponential() const noexcept { return std::holds_alternative<Exponential>(variant_); }
  const Exponential& exponential() const { return std::get<Exponential>(variant_); }

  double mean() const {
    if (is_exponential()) return 1.0 / exponential().mu;
    double m = 0.0;
    for (const auto& [x, w] : std::get<AtomMixture>(variant_).atoms) m += w * x;
    return m;
  }

  /// a_m = int e^{-lambda x} (lambda x)^m / m! dS(x) for m = 0..count-1.
  std::vector<double> arrival_probabilities(double lambda, std::size_t count) const {
    std::vector<double> a(count, 0.0);
    if (is_exponential()) {
      const double mu = exponential().mu;
      double term = mu / (lambda + mu);
      const double ratio = lambda / (lambda + mu);
      for (std::size_t m = 0; m < count; ++m, term *= ratio) a[m] = term;
      return a;
    }
    for (const auto& [x, w] : std::get<AtomMixture>(variant_).atoms) {
      const double lx = lambda * x;
      double term = w * std::exp(-lx);
      for (std::size_t m = 0; m < count; ++m) {
        a[m] += term;
        term *= lx / static_cast<double>(m + 1);
      }
    }
    return a;
  }

 private:
  std::variant<Exponential, AtomMixture> variant_;
};

struct QueueSpec {
  double lambda;
  ServiceDistribution service;
  double r;
  Index N;

  void validate() const {
    require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::InvalidInput, "arrival rate must be > 0");
    require(std::isfinite(r) && r > 0.0, ErrorKind::InvalidInput, "repair rate must be > 0");
    require(N >= 1, ErrorKind::InvalidInput, "truncation level must be >= 1");
    require(lambda * service.mean() < 1.0, ErrorKind::InvalidInput, "queue needs load lambda E[S] < 1");
  }
};

struct QueueKernels {
  StochasticMatrix p0;  // no breakdowns
  StochasticMatrix p1;  // breakdown at every service start
};

/// P0 and P1 on {0..N}; the mass a row would send beyond N is lumped into N.
///   P0(0, j) = a_j,           P0(i, j) = a_{j-i+1}          (i >= 1)
///   P1(0, j) = g_{j-1} [j>=1], P1(i, j) = g_{j-i} [j>=i]    (i >= 1)
/// with g_m = r/(lambda+r) (lambda/(lambda+r))^m.
inline QueueKernels mg1_kernels(const QueueSpec& spec) {
  spec.validate();
  const Index n = spec.N + 1;
  const auto count = static_cast<std::size_t>(n + 1);
  const std::vector<double> a = spec.service.arrival_probabilities(spec.lambda, count);
  std::vector<double> g(count);
  {
    double term = spec.r / (spec.lambda + spec.r);
    const double ratio = spec.lambda / (spec.lambda + spec.r);
    for (std::size_t m = 0; m < count; ++m, term *= ratio) g[m] = term;
  }
  auto at = [](const std::vector<double>& v, Index m) { return v[static_cast<std::size_t>(m)]; };

  Matrix p0 = Matrix::Zero(n, n);
  Matrix p1 = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < spec.N; ++j) {
      const Index shift0 = i == 0 ? j : j - i + 1;
      const Index shift1 = i == 0 ? j - 1 : j - i;
      if (shift0 >= 0) p0(i, j) = at(a, shift0);
      if (shift1 >= 0) p1(i, j) = at(g, shift1);
    }
    p0(i, spec.N) = std::max(0.0, 1.0 - p0.row(i).head(spec.N).sum());
    p1(i, spec.N) = std::max(0.0, 1.0 - p1.row(i).head(spec.N).sum());
  }
  return {StochasticMatrix(std::move(p0)), StochasticMatrix(std::move(p1))};
}

/// P_theta = (1 - theta) P0 + theta P1.
inline StochasticMatrix mg1_breakdown_kernel(const QueueSpec& spec, double theta) {
  require(std::isfinite(theta) && theta >= 0.0 && theta <= 1.0, ErrorKind::InvalidInput, "theta must lie in [0, 1]");
  const QueueKernels k = mg1_kernels(spec);
  return StochasticMatrix((1.0 - theta) * k.p0.matrix() + theta * k.p1.matrix());
}

/// f(s) = 1{s > threshold} on {0..N}.
inline Vector queue_indicator(Index n_states, Index threshold) {
  Vector f = Vector::Zero(n_states);
  for (Index s = threshold + 1; s < n_states; ++s) f(s) = 1.0;
  return f;
}

// ---------------------------------------------------------------------------
// Strong stability coefficients for exponential service
// ---------------------------------------------------------------------------

/// Upper end (exclusive) of alpha with b1(alpha) < 1.
inline double mg1_feasibility_ceiling(double lambda, double mu) {
  return (mu + lambda) * (mu + lambda) / ((2.0 * mu + lambda) * lambda);
}

namespace detail {

inline void require_mg1_rates(double lambda, double mu, double r) {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::InvalidInput, "arrival rate must be > 0");
  require(std::isfinite(mu) && mu > lambda, ErrorKind::InvalidInput, "service rate must exceed the arrival rate");
  require(std::isfinite(r) && r > 0.0, ErrorKind::InvalidInput, "repair rate must be > 0");
}

inline double mg1_b1(double lambda, double mu, double alpha) {
  return lambda * mu * alpha / ((mu + lambda) * (mu + lambda * (1.0 - alpha)));
}

inline constexpr double kSeriesRelativeTail = 1e-12;

/// mu/(lambda+mu) + alpha sum_j alpha^j |A rho1^j - B rho2^j| with the
/// geometric tail majorant added after truncation. NaN outside the domain of
/// absolute convergence.
inline double mg1_b3_series(double lambda, double mu, double r, double alpha) {
  const double a_coef = r / (r + lambda);
  const double rho1 = lambda / (lambda + r);
  const double b_coef = mu * lambda / ((mu + lambda) * (mu + lambda));
  const double rho2 = lambda / (lambda + mu);
  const double q1 = alpha * rho1;
  const double q2 = alpha * rho2;
  if (!(q1 < 1.0 && q2 < 1.0)) return std::numeric_limits<double>::quiet_NaN();

  double sum = 0.0;
  double p1 = 1.0;  // q1^j
  double p2 = 1.0;  // q2^j
  double r1 = 1.0;  // rho1^j
  double r2 = 1.0;  // rho2^j
  double aj = 1.0;  // alpha^j
  for (int j = 0; j < 1000000; ++j) {
    sum += aj * std::abs(a_coef * r1 - b_coef * r2);
    p1 *= q1;
    p2 *= q2;
    r1 *= rho1;
    r2 *= rho2;
    aj *= alpha;
    const double tail = a_coef * p1 / (1.0 - q1) + b_coef * p2 / (1.0 - q2);
    if (tail <= kSeriesRelativeTail * sum) {
      sum += tail;
      break;
    }
  }
  return mu / (lambda + mu) + alpha * sum;
}

inline double mg1_b3(double lambda, double mu, double r, double alpha) {
  if (mu == r) {
    if (!(alpha < (mu + lambda) / lambda)) return std::numeric_limits<double>::quiet_NaN();
    return mu / (lambda + mu) * (1.0 + alpha * mu / (mu + lambda - alpha * lambda));
  }
  return mg1_b3_series(lambda, mu, r, alpha);
}

}  // namespace detail

struct Mg1SsbCoefficients {
  double alpha;
  double b1;        // bound on ||T||_v, T = P0 with column 0 removed
  double b3;        // bound on ||P1 - P0||_v
  double z_lambda;  // (mu + lambda) / lambda
  double pi0_zero;  // 1 - lambda/mu

  /// Bound on ||pi_0^T||_v given pi_0(0).
  double b2(double pi0) const { return pi0 / (1.0 - b1); }
  double b2() const { return b2(pi0_zero); }
};

inline Mg1SsbCoefficients mg1_ssb_coefficients(double lambda, double mu, double r, double alpha) {
  detail::require_mg1_rates(lambda, mu, r);
  const double z = (mu + lambda) / lambda;
  require(std::isfinite(alpha) && alpha >= 1.0 && alpha < z, ErrorKind::OutOfDomain,
          "alpha must lie in [1, (mu+lambda)/lambda)");
  const double b1 = detail::mg1_b1(lambda, mu, alpha);
  require(b1 < 1.0, ErrorKind::TabooNotProper, "b1(alpha) = " + std::to_string(b1) + " >= 1");
  const double b3 = detail::mg1_b3(lambda, mu, r, alpha);
  require(std::isfinite(b3), ErrorKind::OutOfDomain, "b3 series diverges at this alpha");
  return {alpha, b1, b3, z, 1.0 - lambda / mu};
}

/// b2 theta (1 + b2) b3 / (1 - b1 - theta (1 + b2) b3), a bound on
/// ||pi_theta^T - pi_0^T||_v.
inline BoundReport mg1_ssb_bound(double lambda, double mu, double r, double alpha, double theta) {
  require(std::isfinite(theta) && theta >= 0.0 && theta <= 1.0, ErrorKind::InvalidInput, "theta must lie in [0, 1]");
  const Mg1SsbCoefficients c = mg1_ssb_coefficients(lambda, mu, r, alpha);
  const double b2 = c.b2();
  const double growth = (1.0 + b2) * c.b3;
  const double theta_limit = (1.0 - c.b1) / growth;
  const double slack = 1.0 - c.b1 - theta * growth;
  if (!(theta < theta_limit)) return BoundReport::inapplicable(BoundFamily::Ssb, NormKind::v(alpha), slack, theta_limit);
  return {BoundFamily::Ssb, 0, b2 * theta * growth / slack, true, slack, theta_limit, NormKind::v(alpha)};
}

/// max over alpha in [1, min(alpha_hi, feasibility ceiling)] of
/// (1 - b1(alpha)) / b3(alpha); a lower bound on the breakdown probability
/// up to which the queue stays stable. First maximizer on ties.
inline AlphaOptimum mg1_stability_lower_bound(double lambda, double mu, double r, double alpha_hi = kInfinity,
                                              std::size_t grid = 1001) {
  detail::require_mg1_rates(lambda, mu, r);
  const double hi = std::min(alpha_hi, mg1_feasibility_ceiling(lambda, mu));
  require(hi > 1.0, ErrorKind::NoFeasibleAlpha, "alpha range above 1 is empty");
  const AlphaOptimum best = optimize_alpha(
      [&](double alpha) {
        const double b3 = detail::mg1_b3(lambda, mu, r, alpha);
        if (!std::isfinite(b3)) return kInfinity;
        return -(1.0 - detail::mg1_b1(lambda, mu, alpha)) / b3;
      },
      1.0, hi, grid);
  return {best.alpha, -best.value};
}

// ---------------------------------------------------------------------------
// Two-state bound oracles (v-norm with weights 1, alpha)
// ---------------------------------------------------------------------------

struct OracleValue {
  double value = kInfinity;
  bool applicable = false;
};

struct TwoStateOracles {
  OracleValue cnb;
  OracleValue ssb;
  OracleValue db;
  OracleValue seb0;
  OracleValue seb1;
  double cnb_seb0_ratio;
};

inline TwoStateOracles two_state_bound_oracles(const TwoStateParams& params, double alpha, double theta) {
  params.validate();
  NormKind::v(alpha);
  require(std::isfinite(theta) && theta >= 0.0 && theta <= 1.0, ErrorKind::InvalidInput, "theta must lie in [0, 1]");
  const double p = params.p;
  const double q = params.q;
  const double a = std::abs(p - params.p_tilde);
  const double b = std::abs(q - params.q_tilde);
  const double s = p + q;
  const double m = std::max(a, b / alpha);
  const double weighted = std::max(alpha * a, b);
  const double cross = std::abs(p * params.q_tilde - params.p_tilde * q);

  TwoStateOracles out;
  out.cnb = {theta * std::pow((1.0 + alpha) / s, 2) * weighted * std::max(p, q / alpha), true};

  const double pi_v = (q + p * alpha) / s;
  const double t = std::min(std::max(alpha * p, 1.0 - q), std::max(1.0 - p, q));
  const double ssb_den = 1.0 - t - (1.0 + pi_v) * theta * (1.0 + alpha) * m;
  if (ssb_den > 0.0) out.ssb = {pi_v * (1.0 + pi_v) * theta * (1.0 + alpha) * m / ssb_den, true};

  const double db_den = s - theta * (1.0 + alpha) * m;
  if (db_den > 0.0) out.db = {theta * cross * (1.0 + alpha) / (s * db_den), true};

  out.seb0 = {theta * (1.0 + alpha) / s * weighted, true};
  const double signed_sum = std::abs(p - params.p_tilde + q - params.q_tilde);
  out.seb1 = {theta * (1.0 + alpha) / (s * s) * (cross + theta * signed_sum * weighted), true};
  out.cnb_seb0_ratio = (1.0 + alpha) / s * std::max(p, q / alpha);
  return out;
}

}  // namespace mcpert
