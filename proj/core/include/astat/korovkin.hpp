#pragma once

// Korovkin test machinery: test suites, grid sup norms, sampled moduli of
// continuity, the quantitative error bound
//
//   ||L_n f - f|| <= eps + B * sum_i ||L_n f_i - f_i||,  B = eps + M + 4M/delta^2,
//
// the index sets D, D_i it induces, and their density tails under a
// summability matrix.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "astat/operators.hpp"
#include "astat/summability.hpp"
#include "astat/target_function.hpp"

namespace astat {

struct TestSuite {
  std::size_t m = 0;
  std::vector<TargetFunction> functions;  // f_0 .. f_{m+1}
};

/// f_0 = 1, f_i = u_i/(1+u_i) for i = 1..m, f_{m+1} = sum_k (u_k/(1+u_k))^2.
TestSuite test_suite(std::size_t m);

/// prod_i u_i/(1+u_i).
TargetFunction product_function(std::size_t m);

inline constexpr double kDefaultPMax = 0.99;
inline constexpr std::size_t kDefaultGridPoints = 128;

// Tensor grid on [0, inf)^m with the same p = x/(1+x) values on every axis.
// The grid sup of a function is a lower bound for its sup over the domain.
class EvaluationGrid {
 public:
  // p_values must be strictly increasing, start at 0 and end at or below
  // kMaxP. Throws DomainError.
  EvaluationGrid(std::size_t m, std::vector<double> p_values);

  /// points_per_axis equally spaced p values in [0, p_max].
  static EvaluationGrid uniform(std::size_t m, double p_max = kDefaultPMax,
                                std::size_t points_per_axis = kDefaultGridPoints);

  std::size_t dimension() const noexcept { return m_; }
  std::span<const double> p_values() const noexcept { return p_; }
  double p_max() const noexcept { return p_.back(); }
  std::size_t points_per_axis() const noexcept { return p_.size(); }
  std::size_t size() const noexcept { return size_; }

  /// Original coordinates of grid point `flat` (last axis fastest).
  void coords(std::size_t flat, std::span<double> out) const;
  GridPoint point(std::size_t flat) const;

  /// f at every grid point, in flat order.
  std::vector<double> sample(const TargetFunction& f) const;

 private:
  std::size_t m_;
  std::vector<double> p_;
  std::vector<double> x_;
  std::size_t size_;
};

double sup_norm(const TargetFunction& f, const EvaluationGrid& grid);

/// max over the grid of |L_n f - f|.
double sup_norm_error(const OperatorFamily& family, Index n, const TargetFunction& f,
                      const EvaluationGrid& grid);

enum class Metric {
  Original,     // |u_i - x_i| <= delta_i
  Transformed,  // |u_i/(1+u_i) - x_i/(1+x_i)| <= delta_i
};

const char* to_string(Metric metric) noexcept;

inline constexpr std::size_t kDefaultPairSamples = 100000;

struct ModulusEstimate {
  Metric metric = Metric::Transformed;
  std::vector<double> deltas;
  double value = 0.0;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
};

// Sampled sup of |f(u) - f(x)| over admissible pairs inside the grid's
// p-range. Half of the pairs start at grid nodes and move the full delta in
// every coordinate; the rest are uniform. Deterministic for a given seed, and
// always a lower bound on the true modulus.
ModulusEstimate estimate_modulus(const TargetFunction& f, Metric metric,
                                 std::span<const double> deltas, const EvaluationGrid& grid,
                                 std::size_t pair_samples, std::uint64_t seed);

struct ViolatingPair {
  std::vector<double> u;
  std::vector<double> x;
  double difference = 0.0;  // |f(u) - f(x)|
  double modulus = 0.0;     // w(f; transformed distances), sampled
};

inline constexpr std::size_t kProbeInnerSamples = 64;

// Looks for pairs with |f(u) - f(x)| > w(f; |u_i/(1+u_i) - x_i/(1+x_i)|) + tol,
// the modulus taken under `metric`. Under the transformed metric the pair is
// admissible for its own distances, so no violation can occur; under the
// original metric the test functions themselves fail.
std::vector<ViolatingPair> hw_membership_probe(const TargetFunction& f, Metric metric,
                                               const EvaluationGrid& grid,
                                               std::size_t pair_samples, std::uint64_t seed,
                                               double tol);

inline constexpr double kMinProbedDelta = 1e-6;
inline constexpr double kMaxProbedDelta = 1.0;

// Largest delta in [kMinProbedDelta, kMaxProbedDelta] whose sampled
// transformed-metric modulus (same delta on every axis) is below epsilon,
// located by bisection. Throws NoDeltaFound.
std::vector<double> delta_for_epsilon(const TargetFunction& f, double epsilon,
                                      const EvaluationGrid& grid, std::size_t pair_samples,
                                      std::uint64_t seed);

struct KorovkinBoundInputs {
  double epsilon = 0.0;
  double M = 0.0;
  double delta = 0.0;
  double B = 0.0;

  /// Fills B = epsilon + M + 4M/delta^2.
  static KorovkinBoundInputs make(double epsilon, double M, double delta);
};

/// epsilon + B * sum(test_errors). Throws InconsistentInputs if B does not
/// match its formula to 1e-12 (relative) and DomainError on negative errors.
double korovkin_bound(const KorovkinBoundInputs& inputs, std::span<const double> test_errors);

struct ErrorRow {
  Index n = 0;
  std::vector<double> test_errors;  // ||L_n f_i - f_i||, i = 0..m+1
  double target_error = 0.0;        // ||L_n f - f||
  double bound = 0.0;               // korovkin_bound for this row
};

/// Grid sup errors for n = 1..n_max. Rows are independent and merged by
/// index, so the table does not depend on `workers`.
std::vector<ErrorRow> compute_error_table(const OperatorFamily& family, const TargetFunction& f,
                                          const TestSuite& suite, const EvaluationGrid& grid,
                                          Index n_max, unsigned workers = 1);

struct IndexSets {
  double r = 0.0;
  double epsilon = 0.0;
  double threshold = 0.0;  // (r - eps) / ((m+2) B)
  std::vector<Index> d;    // {n : target error >= r}
  std::vector<std::vector<Index>> d_i;  // {n : error of f_i >= threshold}
  bool containment = false;             // D subset of the union of the D_i
};

// Throws ThresholdError unless epsilon < r, DomainError unless B > 0.
IndexSets index_sets(std::span<const ErrorRow> rows, double r, double epsilon, double B,
                     Index n_max);

struct DensityRow {
  Index j = 0;
  double tail_d = 0.0;
  std::vector<double> tail_d_i;
  bool inequality_holds = false;  // tail_d <= sum of tail_d_i
};

// The f_3 decomposition for two-variable perturbed operators:
// U = {n : ||T_n f_3 - f_3|| >= eps}, U_1 = {alpha_n >= eps/4},
// U_2 = {beta_n >= eps/4}.
struct F3Decomposition {
  double epsilon = 0.0;
  std::vector<Index> u;
  std::vector<Index> u1;
  std::vector<Index> u2;
  bool containment = false;
  bool bound_holds = false;  // ||T_n f_3 - f_3|| <= 2(alpha_n + beta_n) + 1e-12
  std::vector<std::array<double, 3>> tails;  // per probed j: U, U_1, U_2
  bool tail_inequality = false;
};

struct VerifyOptions {
  std::size_t pair_samples = kDefaultPairSamples;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double trend_tol = kDefaultTrendTolerance;
  double bound_slack = 1e-9;
};

struct ConvergenceReport {
  std::string matrix;
  std::string family;
  std::string target;
  std::size_t m = 0;
  Index n_max = 0;
  std::vector<Index> j_schedule;
  double r = 0.0;
  double epsilon = 0.0;
  double grid_p_max = 0.0;
  std::size_t grid_points_per_axis = 0;
  VerifyOptions options;

  KorovkinBoundInputs bound_inputs;
  std::vector<ErrorRow> per_n_errors;
  IndexSets sets;
  std::vector<DensityRow> density_tails;
  Trend d_trend = Trend::Inconclusive;
  std::vector<Trend> d_i_trends;
  std::optional<F3Decomposition> f3;

  bool verdict_bound_dominance = false;
  bool verdict_containment = false;
  bool verdict_tail_inequality = false;
  bool verdict_d_i_decaying = false;

  bool all_pass() const noexcept;
};

// Builds the report from a precomputed error table (bounds are filled in
// here). Density tails need every probed row of `a` to end at or before the
// last tabulated n; otherwise UnboundedTruncation is thrown.
ConvergenceReport analyze_convergence(const SummabilityMatrix& a, const OperatorFamily& family,
                                      const TargetFunction& f, const EvaluationGrid& grid,
                                      std::vector<ErrorRow> table,
                                      std::span<const Index> j_schedule, double r,
                                      double epsilon, const VerifyOptions& options);

/// compute_error_table followed by analyze_convergence.
ConvergenceReport verify_theorem(const SummabilityMatrix& a, const OperatorFamily& family,
                                 const TargetFunction& f, const TestSuite& suite,
                                 const EvaluationGrid& grid, Index n_max,
                                 std::span<const Index> j_schedule, double r, double epsilon,
                                 const VerifyOptions& options = {});

}  // namespace astat
