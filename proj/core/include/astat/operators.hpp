#pragma once

// Bleimann–Butzer–Hahn type positive linear operators on [0, inf)^m.
//
// With p = x/(1+x) the one-dimensional kernel C(n,k) x^k / (1+x)^n becomes the
// binomial pmf C(n,k) p^k (1-p)^(n-k), so every operator value is an
// expectation of f over the node lattice k/(n-k+1). The m-dimensional operator
// is the tensor product of one-dimensional kernels, optionally scaled by a
// non-negative perturbation u_n.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "astat/summability.hpp"
#include "astat/target_function.hpp"

namespace astat {

/// Points with p = x/(1+x) above this are rejected by the operators.
inline constexpr double kMaxP = 0.999;

inline double to_p(double x) noexcept { return x / (1.0 + x); }
inline double from_p(double p) noexcept { return p / (1.0 - p); }

class GridPoint {
 public:
  // Throws DomainError unless every coordinate is finite and >= 0.
  explicit GridPoint(std::vector<double> coords);

  static GridPoint from_p(std::span<const double> p);

  std::size_t dimension() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

 private:
  std::vector<double> coords_;
};

struct BinomialWeights {
  Index n = 0;
  double p = 0.0;
  std::vector<double> weights;  // weights[k] = C(n,k) p^k (1-p)^(n-k)
};

/// Evaluated by ratio recurrences outward from the mode, normalized at the
/// end, so nothing over- or underflows before normalization. Throws
/// DomainError unless 0 <= p < 1 and n >= 0.
BinomialWeights binomial_weights(Index n, double p);

/// k / (n - k + 1). Throws IndexError unless 0 <= k <= n.
double node(Index n, Index k);

// Binomial weights of one degree at a list of p values, each kept only on the
// window of k where it exceeds 1e-20 times the mode weight.
class KernelTable {
 public:
  KernelTable() = default;
  KernelTable(Index n, std::span<const double> p_values);

  /// Refills the table for a new degree, reusing the storage.
  void rebuild(Index n, std::span<const double> p_values);

  Index degree() const noexcept { return n_; }
  std::size_t size() const noexcept { return first_.size(); }
  double p(std::size_t a) const { return p_values_[a]; }

  Index first(std::size_t a) const { return first_[a]; }
  std::span<const double> window(std::size_t a) const {
    return {weights_.data() + offset_[a], offset_[a + 1] - offset_[a]};
  }
  double mass(std::size_t a) const { return mass_[a]; }

  // sum_k w_a[k] * node_values[k] for each a; node_values has n+1 entries.
  std::vector<double> expectations(std::span<const double> node_values) const;

 private:
  Index n_ = 0;
  std::vector<double> p_values_;
  std::vector<Index> first_;
  std::vector<std::size_t> offset_;
  std::vector<double> weights_;
  std::vector<double> mass_;
  std::vector<double> scratch_;
};

/// Unperturbed m-variable BBH operator at one point.
double bbh_eval(Index n, const TargetFunction& f, const GridPoint& point);

/// Unperturbed BBH operator on the tensor grid axes[0] x ... x axes[m-1].
/// Result is row-major with the last coordinate fastest.
std::vector<double> bbh_eval_on_axes(const TargetFunction& f,
                                     std::span<const KernelTable* const> axes);

class OperatorFamily {
 public:
  /// Classical BBH operators in m variables.
  static OperatorFamily bbh(std::size_t m);
  /// u_n-scaled BBH operators in m variables.
  static OperatorFamily perturbed(std::size_t m, SequenceSpec u);

  std::size_t dimension() const noexcept { return m_; }
  const std::optional<SequenceSpec>& perturbation() const noexcept { return u_; }
  std::string name() const;

  /// u_n, or 1 without perturbation. Throws NegativePerturbation if u_n < 0.
  double scale(Index n) const;

  double apply(Index n, const TargetFunction& f, const GridPoint& point) const;
  /// Values on the grid whose every axis uses the p values of `table`
  /// (which must have degree n).
  std::vector<double> apply_on_grid(const TargetFunction& f, const KernelTable& table) const;
  /// max over that grid of |L_n f - reference|, reference in the same order.
  double max_deviation_on_grid(const TargetFunction& f, const KernelTable& table,
                               std::span<const double> reference) const;

 private:
  OperatorFamily(std::size_t m, std::optional<SequenceSpec> u) : m_(m), u_(std::move(u)) {}

  std::size_t m_;
  std::optional<SequenceSpec> u_;
};

/// T_n(f; x, y) = u_n * (two-variable BBH operator). Throws
/// NegativePerturbation if u_n < 0.
double tn_eval(Index n, const SequenceSpec& u, const TargetFunction& f, const GridPoint& point);

// Closed forms of T_n on the test functions.
double closed_form_f0(Index n, double u_n);
double closed_form_f1(Index n, double u_n, double x);
double closed_form_f2(Index n, double u_n, double y);
double closed_form_f3(Index n, double u_n, double x, double y);

struct ClosedFormCoefficients {
  Index n = 0;
  double u_n = 0.0;
  double alpha_n = 0.0;  // |n(n-1) u_n / (n+1)^2 - 1|
  double beta_n = 0.0;   // n u_n / (n+1)^2
};

ClosedFormCoefficients closed_form_coeffs(Index n, double u_n);

}  // namespace astat
