#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "astat/summability.hpp"

namespace astat {

// A real function on [0, inf)^m, evaluated at original coordinates x.
//
// Functions that are sums or products of per-coordinate terms say so, which
// lets the operators contract one axis at a time instead of looping over the
// whole node lattice.
class TargetFunction {
 public:
  enum class Structure { Dense, Sum, Product };

  using DenseRule = std::function<double(std::span<const double> x)>;
  using AxisRule = std::function<double(double x)>;

  static TargetFunction dense(std::string name, std::size_t m, DenseRule rule);
  /// constant + sum_i terms[i](x_i); an empty term is 0.
  static TargetFunction sum(std::string name, double constant, std::vector<AxisRule> terms);
  /// constant * prod_i factors[i](x_i); an empty factor is 1.
  static TargetFunction product(std::string name, double constant, std::vector<AxisRule> factors);

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return m_; }
  Structure structure() const noexcept { return structure_; }
  double constant() const noexcept { return constant_; }
  const std::vector<AxisRule>& axes() const noexcept { return axes_; }

  // Throws DomainError on a dimension mismatch, NonFiniteValue if the result
  // is not finite.
  double operator()(std::span<const double> x) const;

 private:
  TargetFunction() = default;

  std::string name_;
  std::size_t m_ = 0;
  Structure structure_ = Structure::Dense;
  double constant_ = 0.0;
  std::vector<AxisRule> axes_;
  DenseRule dense_;
};

/// Values of a function on the node lattice k_i / (n - k_i + 1), k_i in [0, n].
struct TabulatedFunction {
  std::size_t m = 0;
  Index n = 0;
  std::vector<double> values;  // row-major, last coordinate fastest

  double at(std::span<const Index> ks) const;
};

// Text format:
//   # nodes m=<m> n=<n>
//   k_1 ... k_m value
// Every lattice point must appear exactly once. Blank lines and further lines
// starting with '#' are ignored. Throws ParseError.
TabulatedFunction parse_tabulated(std::istream& in);
TabulatedFunction load_tabulated(const std::string& path);
void write_tabulated(std::ostream& out, const TabulatedFunction& table);

/// Samples f on the degree-n node lattice.
TabulatedFunction tabulate(const TargetFunction& f, Index n);

// Exact at lattice nodes; multilinear in p = x/(1+x) between nodes and
// constant beyond the last node.
TargetFunction to_target_function(TabulatedFunction table, std::string name);

}  // namespace astat
