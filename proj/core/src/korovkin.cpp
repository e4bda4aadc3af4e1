#include "astat/korovkin.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "astat/error.hpp"
#include "astat/parallel.hpp"

namespace astat {

namespace {

double phi(double x) { return x / (1.0 + x); }
double phi_squared(double x) {
  const double p = x / (1.0 + x);
  return p * p;
}

// Portable uniform draws on top of mt19937_64; the standard distributions are
// implementation-defined.
class PairRng {
 public:
  explicit PairRng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t count) { return static_cast<std::size_t>(gen_() % count); }
  bool coin() { return (gen_() >> 63) != 0; }

 private:
  std::mt19937_64 gen_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Draws one admissible pair for `deltas` (zeros allowed). The number of draws
// taken from rng does not depend on deltas, so sweeps over delta with a fixed
// seed see the same base points and directions.
void draw_pair(PairRng& rng, const EvaluationGrid& grid, Metric metric,
               std::span<const double> deltas, bool extremal, std::span<double> x,
               std::span<double> u) {
  const auto p_grid = grid.p_values();
  const double p_max = grid.p_max();
  const double x_max = from_p(p_max);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p_x = 0.0;
    double t = 0.0;
    if (extremal) {
      p_x = p_grid[rng.index(p_grid.size())];
      t = rng.coin() ? 1.0 : -1.0;
    } else {
      p_x = rng.uniform() * p_max;
      t = 2.0 * rng.uniform() - 1.0;
    }
    x[i] = from_p(p_x);
    if (metric == Metric::Transformed) {
      const double p_u = std::clamp(p_x + t * deltas[i], 0.0, p_max);
      u[i] = from_p(p_u);
    } else {
      u[i] = std::clamp(x[i] + t * deltas[i], 0.0, x_max);
    }
  }
}

double sampled_modulus(const TargetFunction& f, Metric metric, std::span<const double> deltas,
                       const EvaluationGrid& grid, std::size_t samples, std::uint64_t seed) {
  const std::size_t m = f.dimension();
  PairRng rng(seed);
  std::vector<double> x(m), u(m);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    draw_pair(rng, grid, metric, deltas, s % 2 == 0, x, u);
    best = std::max(best, std::fabs(f(u) - f(x)));
  }
  return best;
}

void check_dimensions(const TargetFunction& f, const EvaluationGrid& grid) {
  if (f.dimension() != grid.dimension()) {
    throw Error(ErrorKind::DomainError, "function and grid dimensions differ");
  }
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

}  // namespace

TestSuite test_suite(std::size_t m) {
  if (m == 0) throw Error(ErrorKind::DomainError, "dimension must be positive");
  TestSuite suite;
  suite.m = m;
  suite.functions.push_back(
      TargetFunction::sum("f0", 1.0, std::vector<TargetFunction::AxisRule>(m)));
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<TargetFunction::AxisRule> terms(m);
    terms[i] = phi;
    suite.functions.push_back(TargetFunction::sum("f" + std::to_string(i + 1), 0.0, terms));
  }
  suite.functions.push_back(TargetFunction::sum(
      "f" + std::to_string(m + 1), 0.0, std::vector<TargetFunction::AxisRule>(m, phi_squared)));
  return suite;
}

TargetFunction product_function(std::size_t m) {
  if (m == 0) throw Error(ErrorKind::DomainError, "dimension must be positive");
  return TargetFunction::product("product", 1.0, std::vector<TargetFunction::AxisRule>(m, phi));
}

EvaluationGrid::EvaluationGrid(std::size_t m, std::vector<double> p_values)
    : m_(m), p_(std::move(p_values)) {
  if (m_ == 0) throw Error(ErrorKind::DomainError, "grid dimension must be positive");
  if (p_.empty() || p_.front() != 0.0) {
    throw Error(ErrorKind::DomainError, "grid p values must start at 0");
  }
  for (std::size_t i = 1; i < p_.size(); ++i) {
    if (!(p_[i] > p_[i - 1])) {
      throw Error(ErrorKind::DomainError, "grid p values must be strictly increasing");
    }
  }
  if (p_.back() > kMaxP) {
    std::ostringstream os;
    os << "grid p_max " << p_.back() << " exceeds " << kMaxP;
    throw Error(ErrorKind::DomainError, os.str());
  }
  x_.reserve(p_.size());
  for (const double p : p_) x_.push_back(from_p(p));
  size_ = 1;
  for (std::size_t i = 0; i < m_; ++i) size_ *= p_.size();
}

EvaluationGrid EvaluationGrid::uniform(std::size_t m, double p_max, std::size_t points_per_axis) {
  if (points_per_axis < 2) throw Error(ErrorKind::DomainError, "need at least 2 points per axis");
  if (!(p_max > 0.0 && p_max < 1.0)) {
    throw Error(ErrorKind::DomainError, "p_max must lie in (0, 1)");
  }
  std::vector<double> p(points_per_axis);
  const auto last = static_cast<double>(points_per_axis - 1);
  for (std::size_t a = 0; a < points_per_axis; ++a) {
    p[a] = p_max * (static_cast<double>(a) / last);
  }
  return EvaluationGrid(m, std::move(p));
}

void EvaluationGrid::coords(std::size_t flat, std::span<double> out) const {
  for (std::size_t i = m_; i-- > 0;) {
    out[i] = x_[flat % x_.size()];
    flat /= x_.size();
  }
}

GridPoint EvaluationGrid::point(std::size_t flat) const {
  std::vector<double> x(m_);
  coords(flat, x);
  return GridPoint(std::move(x));
}

std::vector<double> EvaluationGrid::sample(const TargetFunction& f) const {
  check_dimensions(f, *this);
  std::vector<double> values(size_);
  std::vector<double> x(m_);
  for (std::size_t flat = 0; flat < size_; ++flat) {
    coords(flat, x);
    values[flat] = f(x);
  }
  return values;
}

double sup_norm(const TargetFunction& f, const EvaluationGrid& grid) {
  double best = 0.0;
  for (const double v : grid.sample(f)) best = std::max(best, std::fabs(v));
  return best;
}

double sup_norm_error(const OperatorFamily& family, Index n, const TargetFunction& f,
                      const EvaluationGrid& grid) {
  check_dimensions(f, grid);
  if (family.dimension() != grid.dimension()) {
    throw Error(ErrorKind::DomainError, "operator and grid dimensions differ");
  }
  const KernelTable table(n, grid.p_values());
  return max_abs_difference(family.apply_on_grid(f, table), grid.sample(f));
}

const char* to_string(Metric metric) noexcept {
  return metric == Metric::Original ? "ORIGINAL" : "TRANSFORMED";
}

ModulusEstimate estimate_modulus(const TargetFunction& f, Metric metric,
                                 std::span<const double> deltas, const EvaluationGrid& grid,
                                 std::size_t pair_samples, std::uint64_t seed) {
  check_dimensions(f, grid);
  if (deltas.size() != f.dimension()) {
    throw Error(ErrorKind::DomainError, "need one delta per coordinate");
  }
  for (const double d : deltas) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorKind::DomainError, "deltas must be positive and finite");
    }
  }
  if (pair_samples == 0) throw Error(ErrorKind::DomainError, "pair_samples must be positive");

  ModulusEstimate estimate;
  estimate.metric = metric;
  estimate.deltas.assign(deltas.begin(), deltas.end());
  estimate.sample_count = pair_samples;
  estimate.seed = seed;
  estimate.value = sampled_modulus(f, metric, deltas, grid, pair_samples, seed);
  return estimate;
}

std::vector<ViolatingPair> hw_membership_probe(const TargetFunction& f, Metric metric,
                                               const EvaluationGrid& grid,
                                               std::size_t pair_samples, std::uint64_t seed,
                                               double tol) {
  check_dimensions(f, grid);
  if (pair_samples == 0) throw Error(ErrorKind::DomainError, "pair_samples must be positive");
  const std::size_t m = f.dimension();
  const auto p_grid = grid.p_values();
  PairRng rng(seed);
  std::vector<double> p_x(m), p_u(m), x(m), u(m), d(m);
  std::vector<ViolatingPair> violations;

  for (std::size_t s = 0; s < pair_samples; ++s) {
    const bool on_nodes = s % 2 == 0;
    for (std::size_t i = 0; i < m; ++i) {
      p_x[i] = on_nodes ? p_grid[rng.index(p_grid.size())] : rng.uniform() * grid.p_max();
      p_u[i] = on_nodes ? p_grid[rng.index(p_grid.size())] : rng.uniform() * grid.p_max();
      x[i] = from_p(p_x[i]);
      u[i] = from_p(p_u[i]);
      d[i] = std::fabs(p_u[i] - p_x[i]);
    }
    const double difference = std::fabs(f(u) - f(x));

    double modulus =
        sampled_modulus(f, metric, d, grid, kProbeInnerSamples, mix_seed(seed, s));
    bool admissible = true;
    for (std::size_t i = 0; i < m; ++i) {
      const double dist = metric == Metric::Transformed ? std::fabs(to_p(u[i]) - to_p(x[i]))
                                                        : std::fabs(u[i] - x[i]);
      if (dist > d[i] * (1.0 + 1e-12)) admissible = false;
    }
    if (admissible) modulus = std::max(modulus, difference);

    if (difference > modulus + tol) violations.push_back({u, x, difference, modulus});
  }
  return violations;
}

std::vector<double> delta_for_epsilon(const TargetFunction& f, double epsilon,
                                      const EvaluationGrid& grid, std::size_t pair_samples,
                                      std::uint64_t seed) {
  check_dimensions(f, grid);
  if (!(epsilon > 0.0)) throw Error(ErrorKind::DomainError, "epsilon must be positive");
  if (pair_samples == 0) throw Error(ErrorKind::DomainError, "pair_samples must be positive");
  const std::size_t m = f.dimension();
  std::vector<double> deltas(m);
  auto modulus_at = [&](double delta) {
    std::fill(deltas.begin(), deltas.end(), delta);
    return sampled_modulus(f, Metric::Transformed, deltas, grid, pair_samples, seed);
  };

  if (modulus_at(kMinProbedDelta) >= epsilon) {
    std::ostringstream os;
    os << "modulus of " << f.name() << " is at least " << epsilon << " already at delta = "
       << kMinProbedDelta;
    throw Error(ErrorKind::NoDeltaFound, os.str());
  }
  if (modulus_at(kMaxProbedDelta) < epsilon) return std::vector<double>(m, kMaxProbedDelta);

  constexpr int kGeometricPoints = 25;
  const double ratio = std::pow(kMaxProbedDelta / kMinProbedDelta, 1.0 / (kGeometricPoints - 1));
  auto geometric = [&](int i) {
    return i == kGeometricPoints - 1 ? kMaxProbedDelta : kMinProbedDelta * std::pow(ratio, i);
  };
  int lo = 0;
  int hi = kGeometricPoints - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (modulus_at(geometric(mid)) < epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double good = geometric(lo);
  double bad = geometric(hi);
  for (int iter = 0; iter < 48 && bad - good > 1e-15 * bad; ++iter) {
    const double mid = 0.5 * (good + bad);
    if (modulus_at(mid) < epsilon) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  return std::vector<double>(m, good);
}

KorovkinBoundInputs KorovkinBoundInputs::make(double epsilon, double M, double delta) {
  if (!(epsilon > 0.0) || !(M >= 0.0) || !(delta > 0.0)) {
    throw Error(ErrorKind::DomainError, "bound inputs need epsilon > 0, M >= 0, delta > 0");
  }
  return {epsilon, M, delta, epsilon + M + 4.0 * M / (delta * delta)};
}

double korovkin_bound(const KorovkinBoundInputs& inputs, std::span<const double> test_errors) {
  const double expected = inputs.epsilon + inputs.M + 4.0 * inputs.M / (inputs.delta * inputs.delta);
  if (!(std::fabs(inputs.B - expected) <= 1e-12 * std::max(1.0, std::fabs(expected)))) {
    std::ostringstream os;
    os << "B = " << inputs.B << " but eps + M + 4M/delta^2 = " << expected;
    throw Error(ErrorKind::InconsistentInputs, os.str());
  }
  double total = 0.0;
  for (const double e : test_errors) {
    if (!(e >= 0.0)) throw Error(ErrorKind::DomainError, "test errors must be non-negative");
    total += e;
  }
  return inputs.epsilon + inputs.B * total;
}

std::vector<ErrorRow> compute_error_table(const OperatorFamily& family, const TargetFunction& f,
                                          const TestSuite& suite, const EvaluationGrid& grid,
                                          Index n_max, unsigned workers) {
  check_dimensions(f, grid);
  if (family.dimension() != grid.dimension() || suite.m != grid.dimension()) {
    throw Error(ErrorKind::DomainError, "operator, suite and grid dimensions differ");
  }
  if (n_max < 1) throw Error(ErrorKind::DomainError, "n_max must be positive");

  std::vector<std::vector<double>> suite_samples;
  std::optional<std::size_t> target_in_suite;
  for (std::size_t i = 0; i < suite.functions.size(); ++i) {
    suite_samples.push_back(grid.sample(suite.functions[i]));
    if (suite.functions[i].name() == f.name()) target_in_suite = i;
  }
  const std::vector<double> target_samples =
      target_in_suite ? std::vector<double>{} : grid.sample(f);

  std::vector<ErrorRow> rows(static_cast<std::size_t>(n_max));
  parallel_for(rows.size(), workers, [&](std::size_t idx) {
    const Index n = static_cast<Index>(idx) + 1;
    // Kernel storage is reused across degrees on each thread; fresh large
    // allocations per degree cost more than the arithmetic.
    thread_local KernelTable table;
    table.rebuild(n, grid.p_values());
    ErrorRow& row = rows[idx];
    row.n = n;
    row.test_errors.resize(suite.functions.size());
    for (std::size_t i = 0; i < suite.functions.size(); ++i) {
      row.test_errors[i] =
          family.max_deviation_on_grid(suite.functions[i], table, suite_samples[i]);
    }
    row.target_error = target_in_suite
                           ? row.test_errors[*target_in_suite]
                           : family.max_deviation_on_grid(f, table, target_samples);
  });
  return rows;
}

IndexSets index_sets(std::span<const ErrorRow> rows, double r, double epsilon, double B,
                     Index n_max) {
  if (!(epsilon > 0.0) || !(epsilon < r)) {
    std::ostringstream os;
    os << "need 0 < epsilon < r, got epsilon = " << epsilon << ", r = " << r;
    throw Error(ErrorKind::ThresholdError, os.str());
  }
  if (!(B > 0.0)) throw Error(ErrorKind::DomainError, "B must be positive");

  IndexSets sets;
  sets.r = r;
  sets.epsilon = epsilon;
  const std::size_t count = rows.empty() ? 0 : rows.front().test_errors.size();
  sets.threshold = (r - epsilon) / (static_cast<double>(count) * B);
  sets.d_i.resize(count);

  sets.containment = true;
  for (const ErrorRow& row : rows) {
    if (row.n > n_max) continue;
    if (row.test_errors.size() != count) {
      throw Error(ErrorKind::DomainError, "error rows disagree on the number of test functions");
    }
    bool covered = false;
    for (std::size_t i = 0; i < count; ++i) {
      if (row.test_errors[i] >= sets.threshold) {
        sets.d_i[i].push_back(row.n);
        covered = true;
      }
    }
    if (row.target_error >= r) {
      sets.d.push_back(row.n);
      if (!covered) sets.containment = false;
    }
  }
  return sets;
}

bool ConvergenceReport::all_pass() const noexcept {
  bool ok = verdict_bound_dominance && verdict_containment && verdict_tail_inequality &&
            verdict_d_i_decaying;
  if (f3) ok = ok && f3->containment && f3->bound_holds && f3->tail_inequality;
  return ok;
}

namespace {

F3Decomposition decompose_f3(const SummabilityMatrix& a, const OperatorFamily& family,
                             std::span<const ErrorRow> rows, std::span<const Index> j_schedule,
                             double epsilon, Index depth) {
  F3Decomposition dec;
  dec.epsilon = epsilon;
  dec.containment = true;
  dec.bound_holds = true;
  for (const ErrorRow& row : rows) {
    const auto coeffs = closed_form_coeffs(row.n, family.scale(row.n));
    const double err = row.test_errors[3];
    const bool in_u = err >= epsilon;
    const bool in_u1 = coeffs.alpha_n >= epsilon / 4.0;
    const bool in_u2 = coeffs.beta_n >= epsilon / 4.0;
    if (in_u) dec.u.push_back(row.n);
    if (in_u1) dec.u1.push_back(row.n);
    if (in_u2) dec.u2.push_back(row.n);
    if (in_u && !in_u1 && !in_u2) dec.containment = false;
    if (err > 2.0 * (coeffs.alpha_n + coeffs.beta_n) + 1e-12) dec.bound_holds = false;
  }
  dec.tail_inequality = true;
  for (const Index j : j_schedule) {
    const std::array<double, 3> t{index_set_mass(a, dec.u, j, depth),
                                  index_set_mass(a, dec.u1, j, depth),
                                  index_set_mass(a, dec.u2, j, depth)};
    if (t[0] > t[1] + t[2]) dec.tail_inequality = false;
    dec.tails.push_back(t);
  }
  return dec;
}

}  // namespace

ConvergenceReport analyze_convergence(const SummabilityMatrix& a, const OperatorFamily& family,
                                      const TargetFunction& f, const EvaluationGrid& grid,
                                      std::vector<ErrorRow> table,
                                      std::span<const Index> j_schedule, double r,
                                      double epsilon, const VerifyOptions& options) {
  if (!(epsilon > 0.0) || !(epsilon < r)) {
    std::ostringstream os;
    os << "need 0 < epsilon < r, got epsilon = " << epsilon << ", r = " << r;
    throw Error(ErrorKind::ThresholdError, os.str());
  }
  validate_schedule(j_schedule);
  if (table.empty()) throw Error(ErrorKind::DomainError, "error table is empty");
  const Index depth = static_cast<Index>(table.size());

  ConvergenceReport report;
  report.matrix = a.name();
  report.family = family.name();
  report.target = f.name();
  report.m = grid.dimension();
  report.n_max = depth;
  report.j_schedule.assign(j_schedule.begin(), j_schedule.end());
  report.r = r;
  report.epsilon = epsilon;
  report.grid_p_max = grid.p_max();
  report.grid_points_per_axis = grid.points_per_axis();
  report.options = options;

  const double M = sup_norm(f, grid);
  const auto deltas = delta_for_epsilon(f, epsilon, grid, options.pair_samples, options.seed);
  const double delta = *std::min_element(deltas.begin(), deltas.end());
  report.bound_inputs = KorovkinBoundInputs::make(epsilon, M, delta);

  report.verdict_bound_dominance = true;
  for (ErrorRow& row : table) {
    row.bound = korovkin_bound(report.bound_inputs, row.test_errors);
    if (row.target_error > row.bound + options.bound_slack) report.verdict_bound_dominance = false;
  }
  report.per_n_errors = std::move(table);

  report.sets = index_sets(report.per_n_errors, r, epsilon, report.bound_inputs.B, depth);
  report.verdict_containment = report.sets.containment;

  const std::size_t sets_count = report.sets.d_i.size();
  report.verdict_tail_inequality = true;
  std::vector<double> d_series;
  std::vector<std::vector<double>> d_i_series(sets_count);
  for (const Index j : j_schedule) {
    DensityRow row;
    row.j = j;
    row.tail_d = index_set_mass(a, report.sets.d, j, depth);
    double total = 0.0;
    for (std::size_t i = 0; i < sets_count; ++i) {
      row.tail_d_i.push_back(index_set_mass(a, report.sets.d_i[i], j, depth));
      total += row.tail_d_i.back();
      d_i_series[i].push_back(row.tail_d_i.back());
    }
    row.inequality_holds = row.tail_d <= total;
    report.verdict_tail_inequality = report.verdict_tail_inequality && row.inequality_holds;
    d_series.push_back(row.tail_d);
    report.density_tails.push_back(std::move(row));
  }
  report.d_trend = classify_trend(d_series, options.trend_tol);
  report.verdict_d_i_decaying = true;
  for (const auto& series : d_i_series) {
    report.d_i_trends.push_back(classify_trend(series, options.trend_tol));
    if (report.d_i_trends.back() != Trend::Decaying) report.verdict_d_i_decaying = false;
  }

  if (report.m == 2) {
    report.f3 = decompose_f3(a, family, report.per_n_errors, j_schedule, epsilon, depth);
  }
  return report;
}

ConvergenceReport verify_theorem(const SummabilityMatrix& a, const OperatorFamily& family,
                                 const TargetFunction& f, const TestSuite& suite,
                                 const EvaluationGrid& grid, Index n_max,
                                 std::span<const Index> j_schedule, double r, double epsilon,
                                 const VerifyOptions& options) {
  if (!(epsilon > 0.0) || !(epsilon < r)) {
    std::ostringstream os;
    os << "need 0 < epsilon < r, got epsilon = " << epsilon << ", r = " << r;
    throw Error(ErrorKind::ThresholdError, os.str());
  }
  validate_schedule(j_schedule);
  for (const Index j : j_schedule) a.summation_limit(j, n_max);
  auto table = compute_error_table(family, f, suite, grid, n_max, options.workers);
  return analyze_convergence(a, family, f, grid, std::move(table), j_schedule, r, epsilon,
                             options);
}

}  // namespace astat
