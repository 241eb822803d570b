#pragma once

// Dense kernels, measures and the three norm families used throughout the
// library. Measures are row vectors, rewards are column vectors, and every
// matrix norm is the operator norm induced by the matching vector norm:
//
//   kind      measure m (row)        function f (column)     matrix A
//   One       max_i |m_i|            sum_i |f_i|             max column abs sum
//   Infinity  sum_i |m_i|            max_i |f_i|             max row abs sum
//   V(alpha)  sum_i alpha^i |m_i|    sup_i |f_i| / alpha^i   sup_i alpha^-i sum_j alpha^j |A_ij|
//
// With these pairings |m f| <= ||m|| ||f|| and ||m A|| <= ||m|| ||A||.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mcpert/error.hpp"

namespace mcpert {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class NormKind {
 public:
  enum class Family { One, Infinity, V };

  static NormKind one() { return NormKind(Family::One, 1.0); }
  static NormKind infinity() { return NormKind(Family::Infinity, 1.0); }
  static NormKind v(double alpha) {
    require(std::isfinite(alpha) && alpha >= 1.0, ErrorKind::InvalidInput,
            "v-norm weight base must satisfy alpha >= 1, got " + std::to_string(alpha));
    return NormKind(Family::V, alpha);
  }

  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  bool is_v() const noexcept { return family_ == Family::V; }

  std::string name() const {
    switch (family_) {
      case Family::One: return "one";
      case Family::Infinity: return "inf";
      case Family::V: return "v(alpha=" + std::to_string(alpha_) + ")";
    }
    return "?";
  }

  friend bool operator==(const NormKind&, const NormKind&) = default;

 private:
  NormKind(Family family, double alpha) : family_(family), alpha_(alpha) {}

  Family family_;
  double alpha_;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, const char* what) {
  require(values.allFinite(), ErrorKind::InvalidInput, std::string(what) + " has non-finite entries");
}

// alpha^d for d in [-(n-1), n-1], indexed by d + n - 1.
inline std::vector<double> signed_powers(double alpha, Index n) {
  std::vector<double> table(static_cast<std::size_t>(2 * n - 1 > 0 ? 2 * n - 1 : 1));
  for (Index d = -(n - 1); d <= n - 1; ++d) {
    table[static_cast<std::size_t>(d + n - 1)] = std::pow(alpha, static_cast<double>(d));
  }
  return table;
}

}  // namespace detail

/// Row-stochastic kernel on {0..n-1}. Entries are nonnegative and every row
/// sums to one within kRowSumTolerance.
class StochasticMatrix {
 public:
  explicit StochasticMatrix(Matrix entries) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols() && entries_.rows() > 0, ErrorKind::InvalidInput,
            "transition matrix must be square and nonempty");
    detail::require_finite(entries_, "transition matrix");
    require((entries_.array() >= 0.0).all(), ErrorKind::InvalidInput, "transition matrix has negative entries");
    for (Index i = 0; i < entries_.rows(); ++i) {
      const double s = entries_.row(i).sum();
      require(std::abs(s - 1.0) <= kRowSumTolerance, ErrorKind::InvalidInput,
              "row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }

  /// Rescales each row to sum to one before validating. Rows must have a
  /// positive sum.
  static StochasticMatrix renormalized(Matrix entries) {
    detail::require_finite(entries, "transition matrix");
    for (Index i = 0; i < entries.rows(); ++i) {
      const double s = entries.row(i).sum();
      require(s > 0.0, ErrorKind::InvalidInput, "cannot renormalize a row with nonpositive sum");
      entries.row(i) /= s;
    }
    return StochasticMatrix(std::move(entries));
  }

  Index size() const noexcept { return entries_.rows(); }
  const Matrix& matrix() const noexcept { return entries_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

class SignedMeasure {
 public:
  explicit SignedMeasure(RowVector values) : values_(std::move(values)) {
    detail::require_finite(values_, "measure");
  }

  Index size() const noexcept { return values_.size(); }
  const RowVector& values() const noexcept { return values_; }
  double operator[](Index i) const { return values_(i); }

 private:
  RowVector values_;
};

class ProbabilityMeasure {
 public:
  explicit ProbabilityMeasure(RowVector weights) : weights_(std::move(weights)) {
    require(weights_.size() > 0, ErrorKind::InvalidInput, "empty distribution");
    detail::require_finite(weights_, "distribution");
    require((weights_.array() >= 0.0).all(), ErrorKind::InvalidInput, "distribution has negative weights");
    require(std::abs(weights_.sum() - 1.0) <= kRowSumTolerance, ErrorKind::InvalidInput,
            "distribution weights sum to " + std::to_string(weights_.sum()));
  }

  static ProbabilityMeasure point_mass(Index n, Index state) {
    require(state >= 0 && state < n, ErrorKind::InvalidInput, "point mass outside the state space");
    RowVector w = RowVector::Zero(n);
    w(state) = 1.0;
    return ProbabilityMeasure(std::move(w));
  }

  Index size() const noexcept { return weights_.size(); }
  const RowVector& values() const noexcept { return weights_; }
  double operator[](Index i) const { return weights_(i); }

  operator SignedMeasure() const { return SignedMeasure(weights_); }

 private:
  RowVector weights_;
};

class RewardVector {
 public:
  explicit RewardVector(Vector values) : values_(std::move(values)) {
    detail::require_finite(values_, "reward vector");
  }

  Index size() const noexcept { return values_.size(); }
  const Vector& values() const noexcept { return values_; }
  double operator[](Index i) const { return values_(i); }

 private:
  Vector values_;
};

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

inline double measure_norm(const RowVector& m, NormKind k) {
  detail::require_finite(m, "measure");
  switch (k.family()) {
    case NormKind::Family::One: return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
    case NormKind::Family::Infinity: return m.cwiseAbs().sum();
    case NormKind::Family::V: {
      double total = 0.0;
      double w = 1.0;
      for (Index i = 0; i < m.size(); ++i, w *= k.alpha()) {
        if (m(i) != 0.0) total += w * std::abs(m(i));
      }
      return total;
    }
  }
  return 0.0;
}

inline double measure_norm(const SignedMeasure& m, NormKind k) { return measure_norm(m.values(), k); }
inline double measure_norm(const ProbabilityMeasure& m, NormKind k) { return measure_norm(m.values(), k); }

inline double function_norm(const Vector& f, NormKind k) {
  detail::require_finite(f, "reward vector");
  switch (k.family()) {
    case NormKind::Family::One: return f.cwiseAbs().sum();
    case NormKind::Family::Infinity: return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
    case NormKind::Family::V: {
      double best = 0.0;
      double w = 1.0;
      for (Index i = 0; i < f.size(); ++i, w *= k.alpha()) best = std::max(best, std::abs(f(i)) / w);
      return best;
    }
  }
  return 0.0;
}

inline double function_norm(const RewardVector& f, NormKind k) { return function_norm(f.values(), k); }

/// Operator norm induced by k; see the table at the top of this header.
inline double operator_norm(const Matrix& a, NormKind k) {
  detail::require_finite(a, "matrix");
  if (a.size() == 0) return 0.0;
  switch (k.family()) {
    case NormKind::Family::One: return a.cwiseAbs().colwise().sum().maxCoeff();
    case NormKind::Family::Infinity: return a.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::Family::V: {
      const Index n = std::max(a.rows(), a.cols());
      const auto pw = detail::signed_powers(k.alpha(), n);
      double best = 0.0;
      for (Index i = 0; i < a.rows(); ++i) {
        double row = 0.0;
        for (Index j = 0; j < a.cols(); ++j) {
          const double x = std::abs(a(i, j));
          if (x != 0.0) row += x * pw[static_cast<std::size_t>(j - i + n - 1)];
        }
        best = std::max(best, row);
      }
      return best;
    }
  }
  return 0.0;
}

inline double operator_norm(const StochasticMatrix& p, NormKind k) { return operator_norm(p.matrix(), k); }

/// Upper bound on |m1 f - m2 f| obtained by pairing measure and reward norms.
inline double reward_gap_bound(const ProbabilityMeasure& m1, const ProbabilityMeasure& m2, const RewardVector& f,
                               NormKind k) {
  require(m1.size() == m2.size() && m1.size() == f.size(), ErrorKind::InvalidInput,
          "reward_gap_bound: dimension mismatch");
  return measure_norm(RowVector(m1.values() - m2.values()), k) * function_norm(f, k);
}

// ---------------------------------------------------------------------------
// Weight-base search
// ---------------------------------------------------------------------------

struct AlphaOptimum {
  double alpha;
  double value;
};

/// Grid search over alpha in [alpha_lo, alpha_hi] with `grid` equally spaced
/// points. The bound function returns +inf (or NaN) where it does not apply.
/// The first minimizer scanning from alpha_lo upward wins.
template <typename BoundFn>
AlphaOptimum optimize_alpha(BoundFn&& bound_fn, double alpha_lo, double alpha_hi, std::size_t grid) {
  require(std::isfinite(alpha_lo) && std::isfinite(alpha_hi) && 1.0 <= alpha_lo && alpha_lo < alpha_hi,
          ErrorKind::InvalidInput, "optimize_alpha requires 1 <= alpha_lo < alpha_hi");
  require(grid >= 2, ErrorKind::InvalidInput, "optimize_alpha requires at least two grid points");

  AlphaOptimum best{alpha_lo, kInfinity};
  bool found = false;
  for (std::size_t g = 0; g < grid; ++g) {
    const double alpha =
        g + 1 == grid ? alpha_hi
                      : alpha_lo + (alpha_hi - alpha_lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
    const double value = bound_fn(alpha);
    if (std::isnan(value) || value == kInfinity) continue;
    if (!found || value < best.value) {
      best = {alpha, value};
      found = true;
    }
  }
  require(found, ErrorKind::NoFeasibleAlpha, "bound is infinite on the whole alpha grid");
  return best;
}

}  // namespace mcpert
