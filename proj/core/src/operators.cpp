#include "astat/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "astat/detail/compensated_sum.hpp"
#include "astat/error.hpp"

namespace astat {

namespace {

constexpr double kWindowCutoff = 1e-20;

void check_p(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << "binomial parameter p = " << p << " outside [0, 1)";
    throw Error(ErrorKind::DomainError, os.str());
  }
}

// Unnormalized weights relative to the mode (which gets weight 1), kept where
// they are >= cutoff. Returns the first index of the window.
Index mode_anchored_weights(Index n, double p, double cutoff, std::vector<double>& out) {
  out.clear();
  if (p == 0.0) {
    out.push_back(1.0);
    return 0;
  }
  const double odds = p / (1.0 - p);
  const Index mode = std::min<Index>(n, static_cast<Index>(std::floor((n + 1) * p)));

  // Walk down from the mode, then reverse that part in place.
  const double inv_odds = 1.0 / odds;
  double w = 1.0;
  for (Index k = mode; k > 0; --k) {
    w *= static_cast<double>(k) / static_cast<double>(n - k + 1) * inv_odds;
    if (w < cutoff || w == 0.0) break;
    out.push_back(w);
  }
  std::reverse(out.begin(), out.end());
  const Index first = mode - static_cast<Index>(out.size());
  out.push_back(1.0);
  w = 1.0;
  for (Index k = mode; k < n; ++k) {
    w *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
    if (w < cutoff || w == 0.0) break;
    out.push_back(w);
  }
  return first;
}

double normalize(std::vector<double>& w) {
  detail::CompensatedSum total;
  for (const double v : w) total.add(v);
  const double inv = 1.0 / total.value();
  for (double& v : w) v *= inv;
  detail::CompensatedSum mass;
  for (const double v : w) mass.add(v);
  return mass.value();
}

void check_operator_p(double p) {
  if (p > kMaxP) {
    std::ostringstream os;
    os << "point with p = x/(1+x) = " << p << " exceeds the supported maximum " << kMaxP;
    throw Error(ErrorKind::DomainError, os.str());
  }
}

std::vector<double> node_values(const TargetFunction::AxisRule& g, Index n) {
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  for (Index k = 0; k <= n; ++k) {
    const double v = g(node(n, k));
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteValue, "function is not finite at a lattice node");
    }
    values[static_cast<std::size_t>(k)] = v;
  }
  return values;
}

std::vector<double> masses(const KernelTable& table) {
  std::vector<double> s(table.size());
  for (std::size_t a = 0; a < table.size(); ++a) s[a] = table.mass(a);
  return s;
}

// Per-axis moments of a separable function: mass[i][a] = sum_k w_a[k] and
// expect[i][a] = sum_k w_a[k] g_i(node(n, k)).
struct AxisMoments {
  std::vector<std::vector<double>> mass;
  std::vector<std::vector<double>> expect;  // empty when g_i is absent
};

AxisMoments axis_moments(const TargetFunction& f, std::span<const KernelTable* const> axes) {
  const std::size_t m = axes.size();
  const Index n = axes[0]->degree();
  AxisMoments moments;
  moments.mass.resize(m);
  moments.expect.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    moments.mass[i] = masses(*axes[i]);
    if (f.axes()[i]) moments.expect[i] = axes[i]->expectations(node_values(f.axes()[i], n));
  }
  return moments;
}

// Calls visit(flat, value) for every grid point in row-major order.
template <typename Visit>
void combine_separable(const TargetFunction& f, const AxisMoments& mo,
                       std::span<const KernelTable* const> axes, Visit&& visit) {
  const std::size_t m = axes.size();
  const bool is_sum = f.structure() == TargetFunction::Structure::Sum;
  const double c = f.constant();

  if (m == 1) {
    const auto& s = mo.mass[0];
    const auto& e = mo.expect[0];
    for (std::size_t a = 0; a < s.size(); ++a) {
      const double g = e.empty() ? (is_sum ? 0.0 : s[a]) : e[a];
      visit(a, is_sum ? c * s[a] + g : c * g);
    }
    return;
  }
  if (m == 2) {
    const auto& s1 = mo.mass[0];
    const auto& s2 = mo.mass[1];
    const auto& e1 = mo.expect[0];
    const auto& e2 = mo.expect[1];
    const std::size_t n2 = s2.size();
    for (std::size_t a = 0; a < s1.size(); ++a) {
      for (std::size_t b = 0; b < n2; ++b) {
        double value = 0.0;
        if (is_sum) {
          value = c * s1[a] * s2[b];
          if (!e1.empty()) value += e1[a] * s2[b];
          if (!e2.empty()) value += e2[b] * s1[a];
        } else {
          value = c * (e1.empty() ? s1[a] : e1[a]) * (e2.empty() ? s2[b] : e2[b]);
        }
        visit(a * n2 + b, value);
      }
    }
    return;
  }

  std::size_t total = 1;
  for (const auto* axis : axes) total *= axis->size();
  std::vector<std::size_t> idx(m, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double value = c;
    if (is_sum) {
      for (std::size_t i = 0; i < m; ++i) value *= mo.mass[i][idx[i]];
      for (std::size_t i = 0; i < m; ++i) {
        if (mo.expect[i].empty()) continue;
        double term = mo.expect[i][idx[i]];
        for (std::size_t l = 0; l < m; ++l) {
          if (l != i) term *= mo.mass[l][idx[l]];
        }
        value += term;
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        value *= mo.expect[i].empty() ? mo.mass[i][idx[i]] : mo.expect[i][idx[i]];
      }
    }
    visit(flat, value);
    for (std::size_t i = m; i-- > 0;) {
      if (++idx[i] < axes[i]->size()) break;
      idx[i] = 0;
    }
  }
}

std::vector<double> eval_separable(const TargetFunction& f,
                                   std::span<const KernelTable* const> axes) {
  std::size_t total = 1;
  for (const auto* axis : axes) total *= axis->size();
  std::vector<double> out(total);
  combine_separable(f, axis_moments(f, axes), axes,
                    [&](std::size_t flat, double value) { out[flat] = value; });
  return out;
}

void check_axes(const TargetFunction& f, std::span<const KernelTable* const> axes) {
  if (axes.size() != f.dimension()) {
    throw Error(ErrorKind::DomainError, "operator dimension does not match the function");
  }
  const Index n = axes[0]->degree();
  for (const auto* axis : axes) {
    if (axis->degree() != n) throw Error(ErrorKind::DomainError, "axes disagree on the degree");
    for (std::size_t a = 0; a < axis->size(); ++a) check_operator_p(axis->p(a));
  }
  if (n < 1) throw Error(ErrorKind::DomainError, "operator degree must be positive");
}

// Tabulates f on the (n+1)^m lattice, then contracts the lattice axes one at a
// time, last axis first.
std::vector<double> eval_dense(const TargetFunction& f, std::span<const KernelTable* const> axes) {
  const std::size_t m = axes.size();
  const Index n = axes[0]->degree();
  const auto side = static_cast<std::size_t>(n + 1);

  std::vector<double> tensor = tabulate(f, n).values;
  std::size_t outer = tensor.size() / side;
  std::size_t inner = 1;
  for (std::size_t axis = m; axis-- > 0;) {
    const KernelTable& table = *axes[axis];
    const std::size_t points = table.size();
    std::vector<double> next(outer * points * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      const double* src = tensor.data() + o * side * inner;
      double* dst = next.data() + o * points * inner;
      for (std::size_t a = 0; a < points; ++a) {
        const auto w = table.window(a);
        const auto first = static_cast<std::size_t>(table.first(a));
        double* row = dst + a * inner;
        for (std::size_t k = 0; k < w.size(); ++k) {
          const double* col = src + (first + k) * inner;
          for (std::size_t t = 0; t < inner; ++t) row[t] += w[k] * col[t];
        }
      }
    }
    tensor = std::move(next);
    inner *= points;
    if (axis > 0) outer /= side;
  }
  return tensor;
}

}  // namespace

GridPoint::GridPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw Error(ErrorKind::DomainError, "grid point needs coordinates");
  for (const double c : coords_) {
    if (!std::isfinite(c) || c < 0.0) {
      throw Error(ErrorKind::DomainError, "grid point coordinates must be finite and >= 0");
    }
  }
}

GridPoint GridPoint::from_p(std::span<const double> p) {
  std::vector<double> x;
  x.reserve(p.size());
  for (const double v : p) {
    check_p(v);
    x.push_back(astat::from_p(v));
  }
  return GridPoint(std::move(x));
}

BinomialWeights binomial_weights(Index n, double p) {
  if (n < 0) throw Error(ErrorKind::DomainError, "degree must be non-negative");
  check_p(p);
  BinomialWeights result;
  result.n = n;
  result.p = p;
  std::vector<double> window;
  const Index first = mode_anchored_weights(n, p, 0.0, window);
  normalize(window);
  result.weights.assign(static_cast<std::size_t>(n + 1), 0.0);
  std::copy(window.begin(), window.end(), result.weights.begin() + first);
  return result;
}

double node(Index n, Index k) {
  if (k < 0 || k > n) {
    std::ostringstream os;
    os << "node index k = " << k << " outside [0, " << n << "]";
    throw Error(ErrorKind::IndexError, os.str());
  }
  return static_cast<double>(k) / static_cast<double>(n - k + 1);
}

KernelTable::KernelTable(Index n, std::span<const double> p_values) { rebuild(n, p_values); }

void KernelTable::rebuild(Index n, std::span<const double> p_values) {
  if (n < 0) throw Error(ErrorKind::DomainError, "degree must be non-negative");
  for (const double p : p_values) check_p(p);
  n_ = n;
  p_values_.assign(p_values.begin(), p_values.end());
  first_.clear();
  mass_.clear();
  offset_.clear();
  weights_.clear();
  offset_.push_back(0);
  for (const double p : p_values_) {
    first_.push_back(mode_anchored_weights(n, p, kWindowCutoff, scratch_));
    mass_.push_back(normalize(scratch_));
    weights_.insert(weights_.end(), scratch_.begin(), scratch_.end());
    offset_.push_back(weights_.size());
  }
}

std::vector<double> KernelTable::expectations(std::span<const double> node_values) const {
  if (node_values.size() != static_cast<std::size_t>(n_ + 1)) {
    throw Error(ErrorKind::DomainError, "expected one value per lattice node");
  }
  std::vector<double> result(size());
  for (std::size_t a = 0; a < size(); ++a) {
    const auto w = window(a);
    const double* v = node_values.data() + first_[a];
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * v[k];
    result[a] = acc;
  }
  return result;
}

std::vector<double> bbh_eval_on_axes(const TargetFunction& f,
                                     std::span<const KernelTable* const> axes) {
  check_axes(f, axes);
  if (f.structure() == TargetFunction::Structure::Dense) return eval_dense(f, axes);
  return eval_separable(f, axes);
}

double bbh_eval(Index n, const TargetFunction& f, const GridPoint& point) {
  if (point.dimension() != f.dimension()) {
    throw Error(ErrorKind::DomainError, "point dimension does not match the function");
  }
  std::vector<KernelTable> tables;
  tables.reserve(point.dimension());
  for (const double x : point.coords()) {
    const double p = to_p(x);
    tables.emplace_back(n, std::span<const double>(&p, 1));
  }
  std::vector<const KernelTable*> axes;
  for (const auto& t : tables) axes.push_back(&t);
  return bbh_eval_on_axes(f, axes).front();
}

OperatorFamily OperatorFamily::bbh(std::size_t m) {
  if (m == 0) throw Error(ErrorKind::DomainError, "operator dimension must be positive");
  return OperatorFamily(m, std::nullopt);
}

OperatorFamily OperatorFamily::perturbed(std::size_t m, SequenceSpec u) {
  if (m == 0) throw Error(ErrorKind::DomainError, "operator dimension must be positive");
  return OperatorFamily(m, std::move(u));
}

std::string OperatorFamily::name() const {
  std::ostringstream os;
  os << (u_ ? "tn" : "bbh") << "(m=" << m_;
  if (u_) os << ", u=" << u_->name();
  os << ")";
  return os.str();
}

double OperatorFamily::scale(Index n) const {
  if (!u_) return 1.0;
  const double u_n = u_->value(n);
  if (u_n < 0.0) {
    std::ostringstream os;
    os << "perturbation " << u_->name() << " is negative at n = " << n;
    throw Error(ErrorKind::NegativePerturbation, os.str());
  }
  return u_n;
}

double OperatorFamily::apply(Index n, const TargetFunction& f, const GridPoint& point) const {
  if (point.dimension() != m_) {
    throw Error(ErrorKind::DomainError, "point dimension does not match the operator");
  }
  const double s = scale(n);
  return s * bbh_eval(n, f, point);
}

std::vector<double> OperatorFamily::apply_on_grid(const TargetFunction& f,
                                                  const KernelTable& table) const {
  const double s = scale(table.degree());
  std::vector<const KernelTable*> axes(m_, &table);
  std::vector<double> values = bbh_eval_on_axes(f, axes);
  if (s != 1.0) {
    for (double& v : values) v *= s;
  }
  return values;
}

double OperatorFamily::max_deviation_on_grid(const TargetFunction& f, const KernelTable& table,
                                             std::span<const double> reference) const {
  const double s = scale(table.degree());
  std::vector<const KernelTable*> axes(m_, &table);
  check_axes(f, axes);
  double worst = 0.0;
  auto visit = [&](std::size_t flat, double value) {
    worst = std::max(worst, std::fabs(s * value - reference[flat]));
  };
  std::size_t total = 1;
  for (std::size_t i = 0; i < m_; ++i) total *= table.size();
  if (reference.size() != total) {
    throw Error(ErrorKind::DomainError, "reference does not match the grid size");
  }
  if (f.structure() == TargetFunction::Structure::Dense) {
    const auto values = eval_dense(f, axes);
    for (std::size_t i = 0; i < values.size(); ++i) visit(i, values[i]);
  } else {
    combine_separable(f, axis_moments(f, axes), axes, visit);
  }
  return worst;
}

double tn_eval(Index n, const SequenceSpec& u, const TargetFunction& f, const GridPoint& point) {
  return OperatorFamily::perturbed(2, u).apply(n, f, point);
}

double closed_form_f0(Index, double u_n) { return u_n; }

double closed_form_f1(Index n, double u_n, double x) {
  const double nd = static_cast<double>(n);
  return nd * u_n / (nd + 1.0) * to_p(x);
}

double closed_form_f2(Index n, double u_n, double y) { return closed_form_f1(n, u_n, y); }

double closed_form_f3(Index n, double u_n, double x, double y) {
  const double nd = static_cast<double>(n);
  const double denom = (nd + 1.0) * (nd + 1.0);
  const double px = to_p(x);
  const double py = to_p(y);
  return nd * (nd - 1.0) * u_n / denom * (px * px + py * py) + nd * u_n / denom * (px + py);
}

ClosedFormCoefficients closed_form_coeffs(Index n, double u_n) {
  if (n < 1) throw Error(ErrorKind::DomainError, "degree must be positive");
  const double nd = static_cast<double>(n);
  const double denom = (nd + 1.0) * (nd + 1.0);
  return {n, u_n, std::fabs(nd * (nd - 1.0) * u_n / denom - 1.0), nd * u_n / denom};
}

}  // namespace astat
