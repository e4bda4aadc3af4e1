#include "astat/summability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "astat/detail/compensated_sum.hpp"
#include "astat/error.hpp"

namespace astat {

namespace {

std::string describe_row(const std::string& matrix, Index j) {
  std::ostringstream os;
  os << matrix << " row " << j;
  return os.str();
}

}  // namespace

SummabilityMatrix::SummabilityMatrix(std::string name, EntryRule entry, SupportRule support)
    : name_(std::move(name)), entry_(std::move(entry)), support_(std::move(support)) {}

double SummabilityMatrix::entry(Index j, Index n) const {
  if (j < 1 || n < 1) {
    throw Error(ErrorKind::IndexError, "matrix indices start at 1");
  }
  const double value = entry_(j, n);
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::DomainError,
                describe_row(name_, j) + ": entry must be finite and non-negative");
  }
  return value;
}

RowSupport SummabilityMatrix::support(Index j) const {
  if (j < 1) throw Error(ErrorKind::IndexError, "matrix indices start at 1");
  return support_(j);
}

Index SummabilityMatrix::summation_limit(Index j, Index depth) const {
  const RowSupport row = support(j);
  if (const auto* finite = std::get_if<FiniteBound>(&row)) {
    if (finite->last > depth) {
      std::ostringstream os;
      os << describe_row(name_, j) << " has support up to column " << finite->last
         << " but depth is " << depth;
      throw Error(ErrorKind::UnboundedTruncation, os.str());
    }
    return finite->last;
  }
  if (!std::get<TailBound>(row).bound) {
    throw Error(ErrorKind::UnboundedTruncation,
                describe_row(name_, j) + " is infinite and declares no tail bound");
  }
  return depth;
}

double SummabilityMatrix::truncation_bound(Index j, Index depth) const {
  const Index limit = summation_limit(j, depth);
  const RowSupport row = support(j);
  if (std::holds_alternative<FiniteBound>(row)) return 0.0;
  return std::get<TailBound>(row).bound(j, limit);
}

SummabilityMatrix make_cesaro_c1() {
  return SummabilityMatrix(
      "c1",
      [](Index j, Index n) { return n <= j ? 1.0 / static_cast<double>(j) : 0.0; },
      [](Index j) -> RowSupport { return FiniteBound{j}; });
}

SummabilityMatrix make_identity() {
  return SummabilityMatrix(
      "identity", [](Index j, Index n) { return j == n ? 1.0 : 0.0; },
      [](Index j) -> RowSupport { return FiniteBound{j}; });
}

SummabilityMatrix make_scaled(const SummabilityMatrix& base, double factor, std::string name) {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::DomainError, "scale factor must be finite and non-negative");
  }
  return SummabilityMatrix(
      std::move(name), [base, factor](Index j, Index n) { return factor * base.entry(j, n); },
      [base, factor](Index j) -> RowSupport {
        RowSupport row = base.support(j);
        if (auto* tail = std::get_if<TailBound>(&row); tail && tail->bound) {
          auto inner = tail->bound;
          tail->bound = [inner, factor](Index jj, Index nn) { return factor * inner(jj, nn); };
        }
        return row;
      });
}

SequenceSpec::SequenceSpec(std::string name, ValueRule value, std::optional<double> claimed_limit)
    : name_(std::move(name)), value_(std::move(value)), claimed_limit_(claimed_limit) {}

double SequenceSpec::value(Index n) const {
  if (n < 1) throw Error(ErrorKind::IndexError, "sequence indices start at 1");
  const double v = value_(n);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "sequence " << name_ << " is not finite at n = " << n;
    throw Error(ErrorKind::NonFiniteValue, os.str());
  }
  return v;
}

SequenceSpec make_constant(double c) {
  std::ostringstream os;
  os << "const:" << c;
  return SequenceSpec(os.str(), [c](Index) { return c; }, c);
}

SequenceSpec make_harmonic() {
  return SequenceSpec("harmonic", [](Index n) { return 1.0 / static_cast<double>(n); }, 0.0);
}

SequenceSpec make_one_plus_harmonic() {
  return SequenceSpec(
      "one-plus-harmonic", [](Index n) { return 1.0 + 1.0 / static_cast<double>(n); }, 1.0);
}

SequenceSpec make_alternating() {
  return SequenceSpec("alternating", [](Index n) { return n % 2 == 1 ? 1.0 : -1.0; });
}

SequenceSpec make_square_perturbation(double spike) {
  if (spike < 0.0) {
    throw Error(ErrorKind::NegativeSpike, "spike value must be non-negative");
  }
  if (!std::isfinite(spike)) {
    throw Error(ErrorKind::NonFiniteValue, "spike value must be finite");
  }
  if (spike == 1.0) {
    throw Error(ErrorKind::DomainError,
                "spike value 1 gives the constant sequence, which converges classically");
  }
  std::ostringstream os;
  os << "squares:" << spike;
  return SequenceSpec(
      os.str(), [spike](Index n) { return is_perfect_square(n) ? spike : 1.0; }, 1.0);
}

SequenceSpec make_linear_combination(double alpha, const SequenceSpec& x, double beta,
                                     const SequenceSpec& y) {
  return SequenceSpec(x.name() + "+" + y.name(),
                      [=](Index n) { return alpha * x.value(n) + beta * y.value(n); });
}

Index count_squares(Index n) noexcept {
  if (n < 1) return 0;
  auto r = static_cast<Index>(std::sqrt(static_cast<double>(n)));
  // compare by division so (r+1)^2 never overflows near INT64_MAX
  while (r > n / r) --r;
  while (r + 1 <= n / (r + 1)) ++r;
  return r;
}

bool is_perfect_square(Index n) noexcept {
  if (n < 1) return false;
  const Index r = count_squares(n);
  return r * r == n;
}

double a_transform(const SummabilityMatrix& a, const SequenceSpec& x, Index j, Index depth) {
  const Index limit = a.summation_limit(j, depth);
  detail::CompensatedSum sum;
  for (Index n = 1; n <= limit; ++n) {
    const double xn = x.value(n);
    const double w = a.entry(j, n);
    if (w != 0.0) sum.add(w * xn);
  }
  return sum.value();
}

double density_tail(const SummabilityMatrix& a, const SequenceSpec& x, double limit,
                    double epsilon, Index j, Index depth) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::DomainError, "epsilon must be positive");
  const Index last = a.summation_limit(j, depth);
  detail::CompensatedSum sum;
  for (Index n = 1; n <= last; ++n) {
    if (std::fabs(x.value(n) - limit) >= epsilon) sum.add(a.entry(j, n));
  }
  return sum.value();
}

double index_set_mass(const SummabilityMatrix& a, std::span<const Index> indices, Index j,
                      Index depth) {
  const Index last = a.summation_limit(j, depth);
  detail::CompensatedSum sum;
  for (const Index n : indices) {
    if (n > last) break;
    sum.add(a.entry(j, n));
  }
  return sum.value();
}

double row_sum(const SummabilityMatrix& a, Index j, Index depth) {
  const Index last = a.summation_limit(j, depth);
  detail::CompensatedSum sum;
  for (Index n = 1; n <= last; ++n) sum.add(a.entry(j, n));
  return sum.value();
}

void validate_schedule(std::span<const Index> j_schedule) {
  if (j_schedule.empty()) throw Error(ErrorKind::InvalidSchedule, "j schedule is empty");
  if (j_schedule.front() < 1) {
    throw Error(ErrorKind::InvalidSchedule, "j schedule entries must be positive");
  }
  for (std::size_t i = 1; i < j_schedule.size(); ++i) {
    if (j_schedule[i] <= j_schedule[i - 1]) {
      throw Error(ErrorKind::InvalidSchedule, "j schedule must be strictly increasing");
    }
  }
}

RegularityReport check_regularity(const SummabilityMatrix& a, std::span<const Index> j_schedule,
                                  Index depth, double tol) {
  validate_schedule(j_schedule);
  if (!(tol > 0.0)) throw Error(ErrorKind::DomainError, "tolerance must be positive");

  RegularityReport report;
  report.tol = tol;
  report.j_probed.assign(j_schedule.begin(), j_schedule.end());
  for (const Index j : j_schedule) {
    const Index last = a.summation_limit(j, depth);
    detail::CompensatedSum sum;
    double max_entry = 0.0;
    for (Index n = 1; n <= last; ++n) {
      const double w = a.entry(j, n);
      sum.add(w);
      max_entry = std::max(max_entry, w);
    }
    report.row_sum_deviation.push_back(std::fabs(sum.value() - 1.0));
    report.max_entry_per_row.push_back(max_entry);
    for (Index n = 1; n <= kRegularityProbeColumns; ++n) {
      report.column_tail.push_back({n, j, a.entry(j, n)});
    }
  }

  report.verdict_row_sums = report.row_sum_deviation.back() <= tol;

  report.verdict_columns = true;
  const Index last_row = j_schedule.back();
  for (const auto& sample : report.column_tail) {
    if (sample.row == last_row && sample.value > tol) report.verdict_columns = false;
  }

  const auto& maxima = report.max_entry_per_row;
  const bool non_increasing = std::is_sorted(maxima.rbegin(), maxima.rend());
  report.verdict_max_entry = non_increasing && maxima.back() < tol;
  return report;
}

const char* to_string(Trend trend) noexcept {
  switch (trend) {
    case Trend::Decaying: return "DECAYING";
    case Trend::Stagnant: return "STAGNANT";
    case Trend::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

Trend classify_trend(std::span<const double> tails, double tol) {
  if (tails.empty()) return Trend::Inconclusive;
  bool non_increasing = true;
  for (std::size_t i = 1; i < tails.size(); ++i) {
    if (tails[i] > tails[i - 1] + tol) non_increasing = false;
  }
  const double last = tails.back();
  if (non_increasing && last <= tol) return Trend::Decaying;
  if (last > tol && last >= tails.front() - tol) return Trend::Stagnant;
  return Trend::Inconclusive;
}

std::vector<DensityTrace> estimate_st_a_limit(const SummabilityMatrix& a, const SequenceSpec& x,
                                              double limit, std::span<const double> epsilons,
                                              std::span<const Index> j_schedule, Index depth,
                                              double tol) {
  validate_schedule(j_schedule);
  if (epsilons.empty()) throw Error(ErrorKind::DomainError, "no epsilon values given");

  std::vector<DensityTrace> traces;
  traces.reserve(epsilons.size());
  for (const double eps : epsilons) {
    DensityTrace trace;
    trace.epsilon = eps;
    std::vector<double> values;
    for (const Index j : j_schedule) {
      const double tail = density_tail(a, x, limit, eps, j, depth);
      trace.tails.emplace_back(j, tail);
      values.push_back(tail);
    }
    trace.trend_verdict = classify_trend(values, tol);
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace astat
