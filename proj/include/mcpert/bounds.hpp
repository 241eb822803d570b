#pragma once

// Perturbation bounds for ||pi_{P(theta)} - pi_P|| with P(theta) = (1-theta) P + theta R.
//
// Families:
//   CNB   theta * kappa * ||R - P||, with kappa from kappa3 / kappa6 / the update
//         formula / c * ||D|| (the last one lives in the caller's norm)
//   DB    ||pi_P Y|| / (1 - ||Y||),                        Y = theta (R - P) D
//   SSB   pi * d * (1 + pi) / (1 - ||T|| - d (1 + pi)),    d = theta ||R - P||
//   SEB(K) ||pi_P sum_{k=1..K} Y^k|| + c ||Y^{K+1}||
//
// Every bound is paired with the measure norm it controls (BoundReport::target).

#include <Eigen/LU>

#include <optional>
#include <string>
#include <vector>

#include "mcpert/core.hpp"
#include "mcpert/stationary.hpp"

namespace mcpert {

class PerturbationPair {
 public:
  PerturbationPair(StochasticMatrix p, StochasticMatrix r, NormKind k)
      : p_(std::move(p)), r_(std::move(r)), k_(k) {
    require(p_.size() == r_.size(), ErrorKind::InvalidInput, "P and R differ in size");
  }

  const StochasticMatrix& p() const noexcept { return p_; }
  const StochasticMatrix& r() const noexcept { return r_; }
  NormKind norm() const noexcept { return k_; }
  Index size() const noexcept { return p_.size(); }

  Matrix difference() const { return r_.matrix() - p_.matrix(); }

 private:
  StochasticMatrix p_;
  StochasticMatrix r_;
  NormKind k_;
};

class ScaledPerturbation {
 public:
  ScaledPerturbation(PerturbationPair pair, double theta) : pair_(std::move(pair)), theta_(theta) {
    require(std::isfinite(theta) && theta >= 0.0 && theta <= 1.0, ErrorKind::InvalidInput,
            "theta must lie in [0, 1]");
  }

  const PerturbationPair& pair() const noexcept { return pair_; }
  double theta() const noexcept { return theta_; }
  NormKind norm() const noexcept { return pair_.norm(); }

  /// (1 - theta) P + theta R; row sums are restored by the renormalizing
  /// constructor to absorb rounding.
  StochasticMatrix kernel() const {
    if (theta_ == 0.0) return pair_.p();
    if (theta_ == 1.0) return pair_.r();
    return StochasticMatrix::renormalized((1.0 - theta_) * pair_.p().matrix() + theta_ * pair_.r().matrix());
  }

 private:
  PerturbationPair pair_;
  double theta_;
};

enum class BoundFamily { CnbKappa3, CnbKappa6, CnbUpdate, CnbNorm, Ssb, Db, Seb };

inline std::string family_name(BoundFamily family, int order = 0) {
  switch (family) {
    case BoundFamily::CnbKappa3: return "cnb_k3";
    case BoundFamily::CnbKappa6: return "cnb_k6";
    case BoundFamily::CnbUpdate: return "cnb_update";
    case BoundFamily::CnbNorm: return "cnb_norm";
    case BoundFamily::Ssb: return "ssb";
    case BoundFamily::Db: return "db";
    case BoundFamily::Seb: return "seb_" + std::to_string(order);
  }
  return "?";
}

struct BoundReport {
  BoundFamily family;
  int order = 0;  // SEB order K
  double value = kInfinity;
  bool applicable = false;
  // Distance of the applicability condition from violation (1 - lhs for the
  // "lhs < 1" style conditions); +inf for unconditional bounds.
  double condition_slack = kInfinity;
  // Largest theta for which the condition holds (SSB / DB), +inf otherwise.
  double theta_limit = kInfinity;
  NormKind target = NormKind::infinity();

  std::string name() const { return family_name(family, order); }

  static BoundReport inapplicable(BoundFamily family, NormKind target, double slack, double theta_limit,
                                  int order = 0) {
    return {family, order, kInfinity, false, slack, theta_limit, target};
  }
};

/// sup_{Q} ||pi_Q^T||: 1 for the One and Infinity measure norms; must be
/// supplied for v-norms.
class CBound {
 public:
  explicit CBound(double value) : value_(value) {
    require(std::isfinite(value) && value >= 1.0, ErrorKind::InvalidInput, "c-bound must be finite and >= 1");
  }

  static CBound defaults_for(NormKind k) {
    require(!k.is_v(), ErrorKind::InvalidInput, "v-norm c-bound must be supplied by the caller");
    return CBound(1.0);
  }

  double value() const noexcept { return value_; }

 private:
  double value_;
};

// ---------------------------------------------------------------------------
// Condition numbers
// ---------------------------------------------------------------------------

/// max_j (D_jj - min_i D_ij) / 2; bounds the One (max-abs) measure norm
/// against ||R - P||_inf.
inline double kappa3(const Matrix& d) {
  double best = -kInfinity;
  for (Index j = 0; j < d.cols(); ++j) best = std::max(best, d(j, j) - d.col(j).minCoeff());
  return best / 2.0;
}

/// (1/2) max_{i,j} sum_k |D_ik - D_jk|; bounds the Infinity (sum-abs) measure
/// norm against ||R - P||_inf.
inline double kappa6(const Matrix& d) {
  double best = 0.0;
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = i + 1; j < d.rows(); ++j) best = std::max(best, (d.row(i) - d.row(j)).cwiseAbs().sum());
  }
  return best / 2.0;
}

/// ||(I - T)^-1 (I - Pi_P)||_inf, the condition number read off the update
/// formula.
inline double cnb_update(const StochasticMatrix& p, const Matrix& t) {
  const double t_norm = operator_norm(t, NormKind::infinity());
  require(t_norm < 1.0, ErrorKind::TabooNotProper, "||T||_inf = " + std::to_string(t_norm) + " >= 1");
  const Index n = p.size();
  const Matrix centering = Matrix::Identity(n, n) - detail::projector_from(stationary_distribution(p).values());
  return operator_norm(Eigen::PartialPivLU<Matrix>(Matrix::Identity(n, n) - t).solve(centering),
                       NormKind::infinity());
}

/// c * ||D||_k: ||pi_R - pi_P|| <= ||pi_R|| ||R - P|| ||D|| in any of the norms.
inline double kappa_norm(const Matrix& d, NormKind k, const CBound& c) { return c.value() * operator_norm(d, k); }

/// theta * kappa * ||R - P||. kappa3/kappa6/update condition numbers pair with
/// ||R - P||_inf; CnbNorm uses the perturbation's own norm.
inline BoundReport cnb_bound(double kappa, BoundFamily family, const ScaledPerturbation& pert) {
  require(kappa >= 0.0 && std::isfinite(kappa), ErrorKind::InvalidInput, "condition number must be finite and >= 0");
  NormKind input = NormKind::infinity();
  NormKind target = NormKind::infinity();
  switch (family) {
    case BoundFamily::CnbKappa3: target = NormKind::one(); break;
    case BoundFamily::CnbKappa6:
    case BoundFamily::CnbUpdate: break;
    case BoundFamily::CnbNorm: input = target = pert.norm(); break;
    default: fail(ErrorKind::InvalidInput, "cnb_bound needs a condition-number family");
  }
  const double value = pert.theta() * kappa * operator_norm(pert.pair().difference(), input);
  return {family, 0, value, true, kInfinity, kInfinity, target};
}

// ---------------------------------------------------------------------------
// Direct, strong stability and series expansion bounds
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix scaled_product(const ScaledPerturbation& pert, const ErgodicDecomposition& ed) {
  require(ed.size() == pert.pair().size(), ErrorKind::InvalidInput, "decomposition dimension mismatch");
  return pert.theta() * (pert.pair().difference() * ed.deviation);
}

}  // namespace detail

inline BoundReport direct_bound(const ScaledPerturbation& pert, const ErgodicDecomposition& ed) {
  const NormKind k = pert.norm();
  const Matrix y = detail::scaled_product(pert, ed);
  const double y_norm = operator_norm(y, k);
  const double unit = operator_norm(pert.pair().difference() * ed.deviation, k);
  const double theta_limit = unit > 0.0 ? 1.0 / unit : kInfinity;
  if (!(y_norm < 1.0)) return BoundReport::inapplicable(BoundFamily::Db, k, 1.0 - y_norm, theta_limit);
  const double value = measure_norm(RowVector(ed.pi.values() * y), k) / (1.0 - y_norm);
  return {BoundFamily::Db, 0, value, true, 1.0 - y_norm, theta_limit, k};
}

/// pi_norm must dominate ||Pi_P||_k (see projector_norm); for the Infinity and
/// v-norms that is ||pi_P^T||_k itself.
inline BoundReport ssb(const ScaledPerturbation& pert, const Matrix& t, double pi_norm) {
  const NormKind k = pert.norm();
  require(pi_norm >= 0.0 && std::isfinite(pi_norm), ErrorKind::InvalidInput, "pi_norm must be finite and >= 0");
  const double t_norm = operator_norm(t, k);
  const double rp_norm = operator_norm(pert.pair().difference(), k);
  const double s = 1.0 + pi_norm;
  const double d = pert.theta() * rp_norm;
  const double lhs = t_norm + d * s;
  const double theta_limit = rp_norm > 0.0 ? (1.0 - t_norm) / (rp_norm * s) : (t_norm < 1.0 ? kInfinity : 0.0);
  if (!(lhs < 1.0)) return BoundReport::inapplicable(BoundFamily::Ssb, k, 1.0 - lhs, theta_limit);
  return {BoundFamily::Ssb, 0, pi_norm * d * s / (1.0 - lhs), true, 1.0 - lhs, theta_limit, k};
}

inline BoundReport seb(const ScaledPerturbation& pert, const ErgodicDecomposition& ed, int order, const CBound& c) {
  require(order >= 0, ErrorKind::InvalidInput, "SEB order must be >= 0");
  const NormKind k = pert.norm();
  const Matrix y = detail::scaled_product(pert, ed);

  RowVector term = ed.pi.values();
  RowVector partial = RowVector::Zero(term.size());
  for (int step = 1; step <= order; ++step) {
    term = term * y;
    partial += term;
  }
  Matrix power = y;
  for (int step = 1; step <= order; ++step) power = power * y;

  const double value = measure_norm(partial, k) + c.value() * operator_norm(power, k);
  const double slack = 1.0 - operator_norm(y, k);
  return {BoundFamily::Seb, order, value, true, slack, kInfinity, k};
}

/// Coefficients a_1..a_{K+1} of the theta-polynomial that dominates SEB(K):
/// a_k = ||pi_P ((R-P)D)^k|| for k <= K and a_{K+1} = c ||((R-P)D)^{K+1}||.
struct SebPolynomial {
  std::vector<double> coefficients;  // coefficients[k-1] multiplies theta^k

  double operator()(double theta) const {
    double value = 0.0;
    double power = theta;
    for (double a : coefficients) {
      value += a * power;
      power *= theta;
    }
    return value;
  }
};

inline SebPolynomial seb_polynomial(const PerturbationPair& pair, const ErgodicDecomposition& ed, int order,
                                    const CBound& c) {
  require(order >= 0, ErrorKind::InvalidInput, "SEB order must be >= 0");
  require(ed.size() == pair.size(), ErrorKind::InvalidInput, "decomposition dimension mismatch");
  const NormKind k = pair.norm();
  const Matrix x = pair.difference() * ed.deviation;

  SebPolynomial poly;
  RowVector term = ed.pi.values();
  for (int step = 1; step <= order; ++step) {
    term = term * x;
    poly.coefficients.push_back(measure_norm(term, k));
  }
  Matrix power = x;
  for (int step = 1; step <= order; ++step) power = power * x;
  poly.coefficients.push_back(c.value() * operator_norm(power, k));
  return poly;
}

/// pi_P sum_{k=0..K} (theta (R - P) D)^k.
inline SignedMeasure series_expansion(const ScaledPerturbation& pert, const ErgodicDecomposition& ed, int order) {
  require(order >= 0, ErrorKind::InvalidInput, "series order must be >= 0");
  const Matrix y = detail::scaled_product(pert, ed);
  RowVector term = ed.pi.values();
  RowVector sum = term;
  for (int step = 1; step <= order; ++step) {
    term = term * y;
    sum += term;
  }
  return SignedMeasure(std::move(sum));
}

/// ||pi_{P(theta)} (theta (R - P) D)^N|| with pi_{P(theta)} from a direct solve.
inline double bias_term_estimate(const ScaledPerturbation& pert, const ErgodicDecomposition& ed, int steps) {
  require(steps >= 0, ErrorKind::InvalidInput, "bias term needs N >= 0");
  const Matrix y = detail::scaled_product(pert, ed);
  RowVector v = stationary_distribution(pert.kernel()).values();
  for (int step = 0; step < steps; ++step) v = v * y;
  return measure_norm(v, pert.norm());
}

struct ConditionReport {
  bool holds = false;
  double lhs = kInfinity;            // quantity required to be < 1
  double inverse_bound = kInfinity;  // bound on ||(I - (R - P) D)^-1|| when it holds
};

struct NeumannConditions {
  ConditionReport direct;   // ||(R - P) D|| < 1
  ConditionReport product;  // ||R - P|| ||D|| < 1
  ConditionReport taboo;    // ||T|| + ||R - P|| (1 + pi_norm) < 1
};

inline NeumannConditions neumann_condition(const PerturbationPair& pair, const Matrix& d, const Matrix& t,
                                           double pi_norm) {
  const NormKind k = pair.norm();
  const Matrix delta = pair.difference();
  const double rp = operator_norm(delta, k);

  NeumannConditions out;
  auto fill = [](ConditionReport& c, double lhs, double bound) {
    c.lhs = lhs;
    c.holds = lhs < 1.0;
    c.inverse_bound = c.holds ? bound : kInfinity;
  };
  const double direct = operator_norm(delta * d, k);
  fill(out.direct, direct, 1.0 / (1.0 - direct));
  const double product = rp * operator_norm(d, k);
  fill(out.product, product, 1.0 / (1.0 - product));
  const double t_norm = operator_norm(t, k);
  const double taboo = t_norm + rp * (1.0 + pi_norm);
  fill(out.taboo, taboo, (1.0 - t_norm) / (1.0 - taboo));
  return out;
}

// ---------------------------------------------------------------------------
// Relative errors and stability domain
// ---------------------------------------------------------------------------

/// ||pi_{P(theta)} - pi_P||_k from two independent dense solves.
inline double true_difference(const ScaledPerturbation& pert, NormKind k) {
  const RowVector diff =
      stationary_distribution(pert.kernel()).values() - stationary_distribution(pert.pair().p()).values();
  return measure_norm(diff, k);
}

/// (Delta - truth) / truth per report, truth measured in each report's target
/// norm. Inapplicable reports yield +inf.
inline std::vector<double> relative_errors(const ScaledPerturbation& pert, const std::vector<BoundReport>& reports) {
  const RowVector diff =
      stationary_distribution(pert.kernel()).values() - stationary_distribution(pert.pair().p()).values();
  std::vector<double> out;
  out.reserve(reports.size());
  for (const auto& report : reports) {
    const double truth = measure_norm(diff, report.target);
    require(truth > 0.0, ErrorKind::DegeneratePerturbation, "perturbation leaves the stationary distribution unchanged");
    out.push_back(report.applicable ? (report.value - truth) / truth : kInfinity);
  }
  return out;
}

/// (1 - ||_iP||) / ||R - P||: every smaller theta keeps P(theta) positive recurrent.
inline double stability_domain(double r_norm_diff, double taboo_norm) {
  require(r_norm_diff > 0.0 && std::isfinite(r_norm_diff), ErrorKind::InvalidInput, "||R - P|| must be positive");
  require(taboo_norm < 1.0, ErrorKind::NoCertificate, "||_iP|| = " + std::to_string(taboo_norm) + " >= 1");
  return (1.0 - taboo_norm) / r_norm_diff;
}

inline double stability_domain(const PerturbationPair& pair, Index state) {
  const NormKind k = pair.norm();
  return stability_domain(operator_norm(pair.difference(), k), operator_norm(remove_column(pair.p(), state), k));
}

}  // namespace mcpert
