#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "astat/error.hpp"
#include "astat/korovkin.hpp"

using namespace astat;

namespace {

template <typename F>
ErrorKind kind_of(F&& call) {
  try {
    call();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an astat::Error");
  return ErrorKind::IoError;
}

ErrorRow make_row(Index n, std::vector<double> errs, double target) {
  ErrorRow r;
  r.n = n;
  r.test_errors = std::move(errs);
  r.target_error = target;
  return r;
}

// exhaustive pair search over a fine 1-d p lattice, transformed metric
double lattice_modulus_1d(const TargetFunction& f, double delta, double p_max, int steps) {
  double best = 0.0;
  for (int a = 0; a <= steps; ++a) {
    for (int b = a; b <= steps; ++b) {
      const double pa = p_max * a / steps, pb = p_max * b / steps;
      if (pb - pa > delta) break;
      const double xa[1] = {from_p(pa)}, xb[1] = {from_p(pb)};
      best = std::max(best, std::fabs(f(xa) - f(xb)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("test suites") {
  const auto s1 = test_suite(1);
  REQUIRE(s1.functions.size() == 3);
  for (double x : {0.0, 0.5, 3.0, 99.0}) {
    const double v[1] = {x};
    const double p = x / (1.0 + x);
    CHECK(s1.functions[0](v) == 1.0);
    CHECK(s1.functions[1](v) == doctest::Approx(p));
    CHECK(s1.functions[2](v) == doctest::Approx(p * p));
  }
  const auto s3 = test_suite(3);
  REQUIRE(s3.functions.size() == 5);
  CHECK(s3.functions[4].name() == "f4");
  const double v[3] = {1.0, 0.0, 3.0};
  CHECK(s3.functions[2](v) == 0.0);
  CHECK(s3.functions[4](v) == doctest::Approx(0.25 + 0.5625));
  CHECK(product_function(3)(v) == 0.0);
  CHECK(kind_of([] { test_suite(0); }) == ErrorKind::DomainError);
}

TEST_CASE("evaluation grid validation") {
  CHECK(kind_of([] { EvaluationGrid(1, {0.1, 0.2}); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { EvaluationGrid(1, {0.0, 0.2, 0.2}); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { EvaluationGrid(1, {0.0, 0.9995}); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { EvaluationGrid::uniform(2, 1.0, 10); }) == ErrorKind::DomainError);
  const auto g = EvaluationGrid::uniform(2, 0.9, 4);
  CHECK(g.size() == 16);
  CHECK(g.p_max() == 0.9);
  const auto pt = g.point(7);  // (1, 3)
  CHECK(to_p(pt[0]) == doctest::Approx(0.3));
  CHECK(to_p(pt[1]) == doctest::Approx(0.9));
}

TEST_CASE("classical BBH grid errors of f1 and f2 are p_max/(n+1)") {
  const auto grid = EvaluationGrid::uniform(2, 0.99, 32);
  const auto suite = test_suite(2);
  const auto fam = OperatorFamily::bbh(2);
  for (Index n : {1, 2, 10, 250}) {
    CHECK(sup_norm_error(fam, n, suite.functions[0], grid) <= 1e-14);
    CHECK(sup_norm_error(fam, n, suite.functions[1], grid) ==
          doctest::Approx(0.99 / (n + 1)).epsilon(1e-12));
  }
}

TEST_CASE("f3 grid error matches a closed-form scan of the grid") {
  const auto grid = EvaluationGrid::uniform(2, 0.99, 24);
  const auto f3 = test_suite(2).functions[3];
  const auto u = make_square_perturbation(2.0);
  const auto fam = OperatorFamily::perturbed(2, u);
  for (Index n : {1, 4, 9, 30}) {
    double worst = 0.0;
    for (double px : grid.p_values()) {
      for (double py : grid.p_values()) {
        const double x = from_p(px), y = from_p(py);
        worst = std::max(worst, std::fabs(closed_form_f3(n, u(n), x, y) - (px * px + py * py)));
      }
    }
    CHECK(sup_norm_error(fam, n, f3, grid) == doctest::Approx(worst).epsilon(1e-12));
  }
}

TEST_CASE("sampled modulus") {
  const auto grid = EvaluationGrid::uniform(1, 0.99, 64);
  const auto f1 = test_suite(1).functions[1];
  const double d[1] = {0.05};

  // phi is linear in p: the transformed modulus is exactly delta
  const auto t = estimate_modulus(f1, Metric::Transformed, d, grid, 2000, 1);
  CHECK(t.value == doctest::Approx(0.05).epsilon(1e-12));
  // in the original metric the steepest step is at 0
  const auto o = estimate_modulus(f1, Metric::Original, d, grid, 2000, 1);
  CHECK(o.value <= 0.05 / 1.05 + 1e-15);
  CHECK(o.value >= 0.99 * 0.05 / 1.05);

  const auto again = estimate_modulus(f1, Metric::Transformed, d, grid, 2000, 1);
  CHECK(again.value == t.value);

  const double bad[1] = {0.0};
  CHECK(kind_of([&] { estimate_modulus(f1, Metric::Original, bad, grid, 10, 0); }) ==
        ErrorKind::DomainError);
  const double two[2] = {0.1, 0.1};
  CHECK(kind_of([&] { estimate_modulus(f1, Metric::Original, two, grid, 10, 0); }) ==
        ErrorKind::DomainError);
}

TEST_CASE("sampled modulus never exceeds an exhaustive lattice search") {
  const auto grid = EvaluationGrid::uniform(1, 0.9, 91);
  const auto f = TargetFunction::dense("wiggle", 1, [](std::span<const double> x) {
    const double p = x[0] / (1.0 + x[0]);
    return std::sin(9.0 * p) * p;
  });
  for (double delta : {0.01, 0.05, 0.2}) {
    const double d[1] = {delta};
    const double sampled = estimate_modulus(f, Metric::Transformed, d, grid, 20000, 5).value;
    const double exhaustive = lattice_modulus_1d(f, delta, 0.9, 1800);
    // both are lower bounds of the true modulus; they should agree closely
    CHECK(sampled == doctest::Approx(exhaustive).epsilon(2e-2));
  }
}

TEST_CASE("property: sampled modulus is monotone in delta") {
  std::mt19937_64 rng(17);
  const auto grid = EvaluationGrid::uniform(2, 0.99, 16);
  const auto f = product_function(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint64_t seed = rng();
    double prev = 0.0;
    for (double delta : {0.001, 0.01, 0.05, 0.2, 0.6}) {
      const double d[2] = {delta, delta};
      const double w = estimate_modulus(f, Metric::Transformed, d, grid, 500, seed).value;
      REQUIRE(w >= prev);
      prev = w;
    }
  }
}

TEST_CASE("H_w membership probe") {
  const auto grid = EvaluationGrid::uniform(1, 0.99, 32);
  const auto f1 = test_suite(1).functions[1];
  CHECK(hw_membership_probe(f1, Metric::Transformed, grid, 2000, 3, 1e-12).empty());
  CHECK_FALSE(hw_membership_probe(f1, Metric::Original, grid, 2000, 3, 1e-12).empty());
}

TEST_CASE("delta for epsilon") {
  const auto grid = EvaluationGrid::uniform(1, 0.99, 64);
  const auto f1 = test_suite(1).functions[1];
  const auto d = delta_for_epsilon(f1, 0.1, grid, 2000, 0);
  REQUIRE(d.size() == 1);
  CHECK(d[0] < 0.1);
  CHECK(d[0] == doctest::Approx(0.1).epsilon(1e-9));

  const auto flat = TargetFunction::sum("flat", 2.0, {{}});
  CHECK(delta_for_epsilon(flat, 0.1, grid, 100, 0)[0] == kMaxProbedDelta);

  const auto jump = TargetFunction::dense("jump", 1, [](std::span<const double> x) {
    return x[0] > 1.0 ? 1.0 : 0.0;
  });
  // the jump sits on a node, so the extremal pairs straddle it at every delta
  const EvaluationGrid on_jump(1, {0.0, 0.5, 0.9});
  CHECK(kind_of([&] { delta_for_epsilon(jump, 0.5, on_jump, 2000, 0); }) ==
        ErrorKind::NoDeltaFound);
}

TEST_CASE("korovkin bound") {
  const auto in = KorovkinBoundInputs::make(0.1, 1.0, 0.5);
  CHECK(in.B == doctest::Approx(0.1 + 1.0 + 16.0));
  const std::vector<double> errs{0.01, 0.02};
  CHECK(korovkin_bound(in, errs) == doctest::Approx(0.1 + in.B * 0.03));
  auto off = in;
  off.B *= 1.001;
  CHECK(kind_of([&] { korovkin_bound(off, errs); }) == ErrorKind::InconsistentInputs);
  const std::vector<double> neg{-0.1};
  CHECK(kind_of([&] { korovkin_bound(in, neg); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { KorovkinBoundInputs::make(0.0, 1.0, 1.0); }) == ErrorKind::DomainError);
}

TEST_CASE("index sets") {
  std::vector<ErrorRow> rows{
      make_row(1, {0.5, 0.0, 0.0}, 0.9),
      make_row(2, {0.0, 0.0, 0.0}, 0.1),
      make_row(3, {0.0, 0.0, 0.4}, 0.7),
      make_row(4, {0.0, 0.0, 0.0}, 0.6),  // in D but in no D_i
  };
  // threshold = (0.5 - 0.1) / (3 * 1) = 0.1333...
  const auto sets = index_sets(rows, 0.5, 0.1, 1.0, 4);
  CHECK(sets.threshold == doctest::Approx(0.4 / 3.0));
  CHECK(sets.d == std::vector<Index>{1, 3, 4});
  CHECK(sets.d_i[0] == std::vector<Index>{1});
  CHECK(sets.d_i[1].empty());
  CHECK(sets.d_i[2] == std::vector<Index>{3});
  CHECK_FALSE(sets.containment);

  const auto first3 = index_sets(rows, 0.5, 0.1, 1.0, 3);
  CHECK(first3.containment);

  CHECK(kind_of([&] { index_sets(rows, 0.5, 0.5, 1.0, 4); }) == ErrorKind::ThresholdError);
  CHECK(kind_of([&] { index_sets(rows, 0.5, 0.6, 1.0, 4); }) == ErrorKind::ThresholdError);
  CHECK(kind_of([&] { index_sets(rows, 0.5, 0.1, 0.0, 4); }) == ErrorKind::DomainError);
}

TEST_CASE("error table does not depend on worker count") {
  const auto grid = EvaluationGrid::uniform(2, 0.99, 16);
  const auto suite = test_suite(2);
  const auto fam = OperatorFamily::perturbed(2, make_square_perturbation(2.0));
  const auto f = product_function(2);
  const auto a = compute_error_table(fam, f, suite, grid, 60, 1);
  const auto b = compute_error_table(fam, f, suite, grid, 60, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].n == static_cast<Index>(i) + 1);
    CHECK(a[i].test_errors == b[i].test_errors);
    CHECK(a[i].target_error == b[i].target_error);
  }
  // the target is in the suite: its error is reused
  const auto c = compute_error_table(fam, suite.functions[1], suite, grid, 5, 1);
  CHECK(c[4].target_error == c[4].test_errors[1]);
}

TEST_CASE("verify_theorem: classical BBH with identity") {
  const auto grid = EvaluationGrid::uniform(2, 0.99, 32);
  const auto suite = test_suite(2);
  VerifyOptions opt;
  opt.pair_samples = 4000;
  const std::vector<Index> js{25, 50, 100, 200};
  const auto rep = verify_theorem(make_identity(), OperatorFamily::bbh(2), product_function(2),
                                  suite, grid, 200, js, 0.2, 0.1, opt);
  CHECK(rep.verdict_bound_dominance);
  CHECK(rep.verdict_containment);
  CHECK(rep.verdict_tail_inequality);
  CHECK(rep.d_trend == Trend::Decaying);
  REQUIRE(rep.f3.has_value());
  CHECK(rep.f3->containment);
  CHECK(rep.f3->bound_holds);
  CHECK(rep.bound_inputs.B ==
        doctest::Approx(0.1 + rep.bound_inputs.M +
                        4.0 * rep.bound_inputs.M / (rep.bound_inputs.delta * rep.bound_inputs.delta)));
}

TEST_CASE("verify_theorem: perturbed operators under C1") {
  const auto grid = EvaluationGrid::uniform(2, 0.99, 16);
  const auto suite = test_suite(2);
  VerifyOptions opt;
  opt.pair_samples = 2000;
  const std::vector<Index> js{100, 400};
  const auto fam = OperatorFamily::perturbed(2, make_square_perturbation(2.0));
  const auto rep = verify_theorem(make_cesaro_c1(), fam, suite.functions[0], suite, grid, 400, js,
                                  0.5, 0.1, opt);
  // D for f0 is exactly the squares
  CHECK(rep.sets.d.size() == 20);
  CHECK(rep.density_tails[0].tail_d == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(rep.density_tails[1].tail_d == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(rep.verdict_containment);
  CHECK(rep.verdict_tail_inequality);
  CHECK(rep.f3->containment);
  CHECK(rep.f3->bound_holds);
  CHECK(rep.f3->tail_inequality);
}

TEST_CASE("verify_theorem input errors") {
  const auto grid = EvaluationGrid::uniform(1, 0.99, 8);
  const auto suite = test_suite(1);
  const auto fam = OperatorFamily::bbh(1);
  const std::vector<Index> js{10, 20};
  CHECK(kind_of([&] {
          verify_theorem(make_cesaro_c1(), fam, suite.functions[1], suite, grid, 15, js, 0.5, 0.1);
        }) == ErrorKind::UnboundedTruncation);
  CHECK(kind_of([&] {
          verify_theorem(make_identity(), fam, suite.functions[1], suite, grid, 20, js, 0.1, 0.1);
        }) == ErrorKind::ThresholdError);
  const std::vector<Index> bad{20, 10};
  CHECK(kind_of([&] {
          verify_theorem(make_identity(), fam, suite.functions[1], suite, grid, 20, bad, 0.5, 0.1);
        }) == ErrorKind::InvalidSchedule);
}
