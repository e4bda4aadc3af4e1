#pragma once

// Infinite non-negative summability matrices, A-transforms and A-statistical
// density tails.
//
// A matrix is an entry rule a(j, n) together with a row-support contract.
// Rows either end at a known column (FiniteBound) or come with an upper bound
// on the mass beyond any truncation column (TailBound). Nothing here sums a
// row past `depth` unless the row declares one of the two, so every finite
// computation stays tied to the infinite-sum definition.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace astat {

using Index = std::int64_t;

struct FiniteBound {
  Index last;  // a(j, n) == 0 for n > last
};

struct TailBound {
  // bound(j, N) >= sum_{n > N} a(j, n); non-negative and non-increasing in N.
  // An empty rule means the row is infinite and no bound is known.
  std::function<double(Index j, Index N)> bound;
};

using RowSupport = std::variant<FiniteBound, TailBound>;

class SummabilityMatrix {
 public:
  using EntryRule = std::function<double(Index j, Index n)>;
  using SupportRule = std::function<RowSupport(Index j)>;

  SummabilityMatrix(std::string name, EntryRule entry, SupportRule support);

  const std::string& name() const noexcept { return name_; }

  // Throws IndexError for j < 1 or n < 1, DomainError for negative or
  // non-finite entries.
  double entry(Index j, Index n) const;
  RowSupport support(Index j) const;

  // Last column that a finite computation at `depth` sums for row j.
  // FiniteBound rows need depth >= last; TailBound rows need a bound rule.
  // Throws UnboundedTruncation otherwise.
  Index summation_limit(Index j, Index depth) const;

  // Upper bound on the row mass beyond summation_limit(j, depth); 0 for
  // finite rows.
  double truncation_bound(Index j, Index depth) const;

 private:
  std::string name_;
  EntryRule entry_;
  SupportRule support_;
};

/// Cesàro matrix C1: a(j, n) = 1/j for n <= j.
SummabilityMatrix make_cesaro_c1();
SummabilityMatrix make_identity();
/// c * A, entrywise. `c` must be non-negative.
SummabilityMatrix make_scaled(const SummabilityMatrix& base, double factor, std::string name);

class SequenceSpec {
 public:
  using ValueRule = std::function<double(Index n)>;

  SequenceSpec(std::string name, ValueRule value, std::optional<double> claimed_limit = {});

  const std::string& name() const noexcept { return name_; }
  const std::optional<double>& claimed_limit() const noexcept { return claimed_limit_; }

  // Throws IndexError for n < 1 and NonFiniteValue for non-finite values.
  double value(Index n) const;
  double operator()(Index n) const { return value(n); }

 private:
  std::string name_;
  ValueRule value_;
  std::optional<double> claimed_limit_;
};

SequenceSpec make_constant(double c);
/// x_n = 1/n, limit 0.
SequenceSpec make_harmonic();
/// x_n = 1 + 1/n, limit 1.
SequenceSpec make_one_plus_harmonic();
/// x_n = (-1)^(n+1); no limit.
SequenceSpec make_alternating();
/// u_n = spike at perfect squares, 1 elsewhere. Statistically convergent to 1
/// under C1 but not convergent. Throws NegativeSpike for spike < 0 and
/// DomainError for spike == 1.
SequenceSpec make_square_perturbation(double spike);
/// Pointwise alpha * x + beta * y.
SequenceSpec make_linear_combination(double alpha, const SequenceSpec& x, double beta,
                                     const SequenceSpec& y);

bool is_perfect_square(Index n) noexcept;
/// Number of perfect squares in [1, n].
Index count_squares(Index n) noexcept;

/// (Ax)_j truncated at summation_limit(j, depth); exact for finite rows.
double a_transform(const SummabilityMatrix& a, const SequenceSpec& x, Index j, Index depth);

/// Sum of a(j, n) over n with |x_n - limit| >= epsilon.
double density_tail(const SummabilityMatrix& a, const SequenceSpec& x, double limit,
                    double epsilon, Index j, Index depth);

/// Sum of a(j, n) over n in `indices` (sorted ascending, all >= 1). Indices
/// past the row's summation limit contribute nothing.
double index_set_mass(const SummabilityMatrix& a, std::span<const Index> indices, Index j,
                      Index depth);

/// Sum of a(j, n) over the row.
double row_sum(const SummabilityMatrix& a, Index j, Index depth);

struct ColumnSample {
  Index column;
  Index row;
  double value;
};

struct RegularityReport {
  std::vector<Index> j_probed;
  std::vector<double> row_sum_deviation;  // |sum_n a(j, n) - 1|
  std::vector<double> max_entry_per_row;
  std::vector<ColumnSample> column_tail;  // a(j, n) for the probed columns
  double tol = 0.0;
  bool verdict_row_sums = false;
  bool verdict_columns = false;
  bool verdict_max_entry = false;
};

inline constexpr Index kRegularityProbeColumns = 5;

/// Finite-depth Silverman–Toeplitz style diagnostic plus the max-entry
/// condition lim_j max_n a(j, n) = 0. Not a proof of regularity.
RegularityReport check_regularity(const SummabilityMatrix& a, std::span<const Index> j_schedule,
                                  Index depth, double tol);

enum class Trend { Decaying, Stagnant, Inconclusive };

const char* to_string(Trend trend) noexcept;

inline constexpr double kDefaultTrendTolerance = 1e-2;

// Decaying: non-increasing within tol and the last value <= tol.
// Stagnant: last value > tol and no net decrease beyond tol.
// Anything else is Inconclusive.
Trend classify_trend(std::span<const double> tails, double tol);

struct DensityTrace {
  double epsilon = 0.0;
  std::vector<std::pair<Index, double>> tails;
  Trend trend_verdict = Trend::Inconclusive;
};

/// Heuristic reading of st_A-lim x = limit at finite depth: one trace per
/// epsilon over the j schedule.
std::vector<DensityTrace> estimate_st_a_limit(const SummabilityMatrix& a, const SequenceSpec& x,
                                              double limit, std::span<const double> epsilons,
                                              std::span<const Index> j_schedule, Index depth,
                                              double tol = kDefaultTrendTolerance);

/// Throws InvalidSchedule unless the schedule is non-empty, positive and
/// strictly increasing.
void validate_schedule(std::span<const Index> j_schedule);

}  // namespace astat
