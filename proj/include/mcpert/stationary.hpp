#pragma once

// Stationary distributions, ergodic projector, deviation matrix (fundamental
// matrix route and taboo-kernel route), taboo kernels and the structural
// unichain check.

#include <Eigen/LU>

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "mcpert/core.hpp"

namespace mcpert {

namespace detail {

// Reciprocal condition estimate below which a dense solve is treated as singular.
inline constexpr double kSingularRcond = 1e-14;
// T = P - h sigma^T may dip below zero by rounding only.
inline constexpr double kTabooClampTolerance = 1e-14;

inline Matrix projector_from(const RowVector& pi) { return Vector::Ones(pi.size()) * pi; }

}  // namespace detail

/// Solves pi (I - P) = 0, sum(pi) = 1 by replacing the last equation of the
/// transposed system with the normalization and factoring with partial
/// pivoting.
inline ProbabilityMeasure stationary_distribution(const StochasticMatrix& p) {
  const Index n = p.size();
  Matrix a = (Matrix::Identity(n, n) - p.matrix()).transpose();
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;

  const Eigen::PartialPivLU<Matrix> lu(a);
  require(lu.rcond() > detail::kSingularRcond, ErrorKind::NotUnichain,
          "stationary system is singular (more than one closed class?)");
  Vector x = lu.solve(rhs);
  require(x.allFinite(), ErrorKind::NotUnichain, "stationary solve produced non-finite values");

  // Transient states come back as tiny signed zeros.
  require(x.minCoeff() > -1e-10, ErrorKind::NotUnichain, "stationary solve produced negative mass");
  x = x.cwiseMax(0.0);
  x /= x.sum();
  return ProbabilityMeasure(x.transpose());
}

/// Pi, D = (I - P + Pi)^-1 - Pi and the fundamental matrix F = (I - P + Pi)^-1.
struct ErgodicDecomposition {
  ProbabilityMeasure pi;
  Matrix projector;
  Matrix deviation;
  Matrix fundamental;

  Index size() const noexcept { return deviation.rows(); }
};

inline ErgodicDecomposition ergodic_decomposition(const StochasticMatrix& p) {
  const Index n = p.size();
  ProbabilityMeasure pi = stationary_distribution(p);
  Matrix projector = detail::projector_from(pi.values());

  const Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - p.matrix() + projector);
  require(lu.rcond() > detail::kSingularRcond, ErrorKind::DeviationUnavailable, "I - P + Pi is numerically singular");
  Matrix fundamental = lu.inverse();
  require(fundamental.allFinite(), ErrorKind::DeviationUnavailable, "fundamental matrix is not finite");
  Matrix deviation = fundamental - projector;
  return {std::move(pi), std::move(projector), std::move(deviation), std::move(fundamental)};
}

/// ||Pi_P||_k for the ergodic projector 1 pi^T. Equal to ||pi^T||_k for the
/// Infinity and v-norms; n * max pi for the One norm.
inline double projector_norm(const ProbabilityMeasure& pi, NormKind k) {
  return operator_norm(detail::projector_from(pi.values()), k);
}

// ---------------------------------------------------------------------------
// Taboo kernels
// ---------------------------------------------------------------------------

/// (h, sigma) with h >= 0 and sigma a distribution; defines T = P - h sigma^T.
class TabooSpec {
 public:
  TabooSpec(Vector h, ProbabilityMeasure sigma) : h_(std::move(h)), sigma_(std::move(sigma)) {
    require(h_.size() == sigma_.size(), ErrorKind::InvalidTabooSpec, "h and sigma differ in length");
    require(h_.allFinite() && (h_.array() >= 0.0).all(), ErrorKind::InvalidTabooSpec, "h must be finite and >= 0");
  }

  /// h = column i of P, sigma = e_i: the kernel that never enters state i.
  static TabooSpec avoid_state(const StochasticMatrix& p, Index i) {
    require(i >= 0 && i < p.size(), ErrorKind::InvalidInput, "state index out of range");
    return TabooSpec(p.matrix().col(i), ProbabilityMeasure::point_mass(p.size(), i));
  }

  /// h = e_i, sigma = row i of P: the kernel that never leaves state i.
  static TabooSpec absorb_state(const StochasticMatrix& p, Index i) {
    require(i >= 0 && i < p.size(), ErrorKind::InvalidInput, "state index out of range");
    Vector h = Vector::Zero(p.size());
    h(i) = 1.0;
    return TabooSpec(std::move(h), ProbabilityMeasure(p.matrix().row(i)));
  }

  Index size() const noexcept { return h_.size(); }
  const Vector& h() const noexcept { return h_; }
  const ProbabilityMeasure& sigma() const noexcept { return sigma_; }

 private:
  Vector h_;
  ProbabilityMeasure sigma_;
};

inline Matrix taboo_kernel(const StochasticMatrix& p, const TabooSpec& spec) {
  require(spec.size() == p.size(), ErrorKind::InvalidTabooSpec, "taboo spec dimension mismatch");
  const double pi_h = stationary_distribution(p).values().dot(spec.h().transpose());
  require(pi_h > 0.0, ErrorKind::InvalidTabooSpec, "taboo spec needs pi^T h > 0");

  Matrix t = p.matrix() - spec.h() * spec.sigma().values();
  require(t.minCoeff() >= -detail::kTabooClampTolerance, ErrorKind::InvalidTabooSpec,
          "P - h sigma^T has negative entries");
  return t.cwiseMax(0.0);
}

/// P with column i set to zero.
inline Matrix remove_column(const StochasticMatrix& p, Index i) {
  require(i >= 0 && i < p.size(), ErrorKind::InvalidInput, "column index out of range");
  Matrix t = p.matrix();
  t.col(i).setZero();
  return t;
}

/// P with row i set to zero; the taboo kernel of TabooSpec::absorb_state(P, i).
inline Matrix remove_row(const StochasticMatrix& p, Index i) {
  require(i >= 0 && i < p.size(), ErrorKind::InvalidInput, "row index out of range");
  Matrix t = p.matrix();
  t.row(i).setZero();
  return t;
}

struct AutoTaboo {
  Index column;
  TabooSpec spec;
  Matrix kernel;
};

/// Removes the column whose smallest entry is largest (lowest index on ties).
/// Row sums of the result are at most 1 - min_i P(i, column) < 1.
inline AutoTaboo auto_taboo(const StochasticMatrix& p) {
  const Eigen::RowVectorXd column_minima = p.matrix().colwise().minCoeff();
  Index best = 0;
  for (Index j = 1; j < column_minima.size(); ++j) {
    if (column_minima(j) > column_minima(best)) best = j;
  }
  require(column_minima(best) > 0.0, ErrorKind::NoUniformColumn, "every column of P contains a zero");
  return {best, TabooSpec::avoid_state(p, best), remove_column(p, best)};
}

struct RecurrenceCertificate {
  bool certified;
  double norm;
};

/// ||_iP||_k < 1 certifies positive recurrence of an irreducible P.
inline RecurrenceCertificate recurrence_certificate(const StochasticMatrix& p, Index i, NormKind k) {
  const double norm = operator_norm(remove_column(p, i), k);
  return {norm < 1.0, norm};
}

/// D = (I - Pi)(I - T)^-1 (I - Pi) for a taboo kernel with ||T||_k < 1.
inline Matrix deviation_via_taboo(const StochasticMatrix& p, const Matrix& t, NormKind k) {
  require(t.rows() == p.size() && t.cols() == p.size(), ErrorKind::InvalidInput, "taboo kernel dimension mismatch");
  const double t_norm = operator_norm(t, k);
  require(t_norm < 1.0, ErrorKind::TabooNotProper, "||T|| = " + std::to_string(t_norm) + " >= 1");

  const Index n = p.size();
  const Matrix centering = Matrix::Identity(n, n) - detail::projector_from(stationary_distribution(p).values());
  const Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - t);
  return centering * lu.solve(centering);
}

/// Upper bound on ||pi^T||_v from a proper taboo kernel:
/// pi^T h * ||sigma^T||_v / (1 - ||T||_v).
inline double stationary_norm_bound(double pi_h, const ProbabilityMeasure& sigma, const Matrix& t, double alpha) {
  const NormKind v = NormKind::v(alpha);
  require(pi_h > 0.0, ErrorKind::InvalidTabooSpec, "pi^T h must be positive");
  const double t_norm = operator_norm(t, v);
  require(t_norm < 1.0, ErrorKind::TabooNotProper, "||T||_v = " + std::to_string(t_norm) + " >= 1");
  return pi_h * measure_norm(sigma, v) / (1.0 - t_norm);
}

// ---------------------------------------------------------------------------
// Structural check
// ---------------------------------------------------------------------------

struct UnichainDiagnosis {
  bool unichain = false;
  bool aperiodic = false;
  std::size_t closed_classes = 0;
  std::size_t period = 0;  // of the closed class when unichain, else 0

  bool ok() const noexcept { return unichain && aperiodic; }
  explicit operator bool() const noexcept { return ok(); }
};

/// Strongly connected components of the support digraph (iterative Tarjan),
/// exactly one closed class, and the gcd of cycle lengths inside it.
inline UnichainDiagnosis validate_unichain(const StochasticMatrix& p) {
  const Index n = p.size();
  const Matrix& a = p.matrix();
  constexpr Index kUnvisited = -1;

  std::vector<Index> index(static_cast<std::size_t>(n), kUnvisited), low(static_cast<std::size_t>(n), 0);
  std::vector<Index> component(static_cast<std::size_t>(n), kUnvisited);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<Index> stack;
  Index counter = 0;
  Index components = 0;

  struct Frame {
    Index node;
    Index next;
  };
  auto at = [](auto& v, Index i) -> decltype(auto) { return v[static_cast<std::size_t>(i)]; };

  for (Index root = 0; root < n; ++root) {
    if (at(index, root) != kUnvisited) continue;
    std::vector<Frame> call{{root, 0}};
    at(index, root) = at(low, root) = counter++;
    stack.push_back(root);
    at(on_stack, root) = true;
    while (!call.empty()) {
      Frame& f = call.back();
      bool descended = false;
      while (f.next < n) {
        const Index w = f.next++;
        if (a(f.node, w) <= 0.0) continue;
        if (at(index, w) == kUnvisited) {
          at(index, w) = at(low, w) = counter++;
          stack.push_back(w);
          at(on_stack, w) = true;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (at(on_stack, w)) at(low, f.node) = std::min(at(low, f.node), at(index, w));
      }
      if (descended) continue;
      const Index v = f.node;
      if (at(low, v) == at(index, v)) {
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          at(on_stack, w) = false;
          at(component, w) = components;
        } while (w != v);
        ++components;
      }
      call.pop_back();
      if (!call.empty()) {
        const Index parent = call.back().node;
        at(low, parent) = std::min(at(low, parent), at(low, v));
      }
    }
  }

  std::vector<bool> closed(static_cast<std::size_t>(components), true);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (a(i, j) > 0.0 && at(component, i) != at(component, j)) at(closed, at(component, i)) = false;
    }
  }

  UnichainDiagnosis diagnosis;
  Index closed_id = kUnvisited;
  for (Index c = 0; c < components; ++c) {
    if (at(closed, c)) {
      ++diagnosis.closed_classes;
      closed_id = c;
    }
  }
  diagnosis.unichain = diagnosis.closed_classes == 1;
  if (!diagnosis.unichain) return diagnosis;

  // BFS levels inside the closed class; the period is the gcd of
  // level(u) + 1 - level(v) over internal edges u -> v.
  std::vector<Index> level(static_cast<std::size_t>(n), kUnvisited);
  Index start = 0;
  while (at(component, start) != closed_id) ++start;
  std::vector<Index> queue{start};
  at(level, start) = 0;
  std::uint64_t g = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Index u = queue[head];
    for (Index v = 0; v < n; ++v) {
      if (a(u, v) <= 0.0 || at(component, v) != closed_id) continue;
      if (at(level, v) == kUnvisited) {
        at(level, v) = at(level, u) + 1;
        queue.push_back(v);
      } else {
        const auto diff = at(level, u) + 1 - at(level, v);
        g = std::gcd(g, static_cast<std::uint64_t>(diff < 0 ? -diff : diff));
      }
    }
  }
  diagnosis.period = static_cast<std::size_t>(g);
  diagnosis.aperiodic = g == 1;
  return diagnosis;
}

}  // namespace mcpert
