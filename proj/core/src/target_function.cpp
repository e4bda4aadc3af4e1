#include "astat/target_function.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <regex>
#include <sstream>

#include "astat/error.hpp"
#include "astat/operators.hpp"

namespace astat {

TargetFunction TargetFunction::dense(std::string name, std::size_t m, DenseRule rule) {
  if (m == 0) throw Error(ErrorKind::DomainError, "function dimension must be positive");
  TargetFunction f;
  f.name_ = std::move(name);
  f.m_ = m;
  f.structure_ = Structure::Dense;
  f.dense_ = std::move(rule);
  return f;
}

TargetFunction TargetFunction::sum(std::string name, double constant,
                                   std::vector<AxisRule> terms) {
  if (terms.empty()) throw Error(ErrorKind::DomainError, "function dimension must be positive");
  TargetFunction f;
  f.name_ = std::move(name);
  f.m_ = terms.size();
  f.structure_ = Structure::Sum;
  f.constant_ = constant;
  f.axes_ = std::move(terms);
  return f;
}

TargetFunction TargetFunction::product(std::string name, double constant,
                                       std::vector<AxisRule> factors) {
  if (factors.empty()) throw Error(ErrorKind::DomainError, "function dimension must be positive");
  TargetFunction f;
  f.name_ = std::move(name);
  f.m_ = factors.size();
  f.structure_ = Structure::Product;
  f.constant_ = constant;
  f.axes_ = std::move(factors);
  return f;
}

double TargetFunction::operator()(std::span<const double> x) const {
  if (x.size() != m_) {
    std::ostringstream os;
    os << "function " << name_ << " takes " << m_ << " coordinates, got " << x.size();
    throw Error(ErrorKind::DomainError, os.str());
  }
  double value = 0.0;
  switch (structure_) {
    case Structure::Dense:
      value = dense_(x);
      break;
    case Structure::Sum:
      value = constant_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (axes_[i]) value += axes_[i](x[i]);
      }
      break;
    case Structure::Product:
      value = constant_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (axes_[i]) value *= axes_[i](x[i]);
      }
      break;
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::NonFiniteValue, "function " + name_ + " returned a non-finite value");
  }
  return value;
}

double TabulatedFunction::at(std::span<const Index> ks) const {
  std::size_t offset = 0;
  for (const Index k : ks) {
    if (k < 0 || k > n) throw Error(ErrorKind::IndexError, "lattice index out of range");
    offset = offset * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(k);
  }
  return values[offset];
}

namespace {

std::size_t lattice_size(std::size_t m, Index n) {
  std::size_t size = 1;
  for (std::size_t i = 0; i < m; ++i) size *= static_cast<std::size_t>(n + 1);
  return size;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "tabulated function, line " << line << ": " << what;
  throw Error(ErrorKind::ParseError, os.str());
}

}  // namespace

TabulatedFunction parse_tabulated(std::istream& in) {
  static const std::regex header_re(R"(^#\s*nodes\s+m=(\d+)\s+n=(\d+)\s*$)");
  std::string line;
  std::size_t line_no = 0;
  TabulatedFunction table;
  bool have_header = false;
  std::vector<char> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::smatch match;
      if (!std::regex_match(line, match, header_re)) {
        parse_fail(line_no, "expected header '# nodes m=<m> n=<n>'");
      }
      table.m = std::stoul(match[1].str());
      table.n = std::stoll(match[2].str());
      if (table.m == 0 || table.m > 6) parse_fail(line_no, "m must be in [1, 6]");
      if (table.n < 1 || lattice_size(table.m, table.n) > (std::size_t{1} << 26)) {
        parse_fail(line_no, "n must be positive and the lattice at most 2^26 points");
      }
      table.values.assign(lattice_size(table.m, table.n), 0.0);
      seen.assign(table.values.size(), 0);
      have_header = true;
      continue;
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < table.m; ++i) {
      Index k = -1;
      if (!(fields >> k)) parse_fail(line_no, "expected integer node index");
      if (k < 0 || k > table.n) parse_fail(line_no, "node index outside [0, n]");
      offset = offset * static_cast<std::size_t>(table.n + 1) + static_cast<std::size_t>(k);
    }
    double value = 0.0;
    if (!(fields >> value)) parse_fail(line_no, "expected real value");
    std::string extra;
    if (fields >> extra) parse_fail(line_no, "trailing characters");
    if (!std::isfinite(value)) parse_fail(line_no, "value is not finite");
    if (seen[offset]) parse_fail(line_no, "duplicate lattice point");
    seen[offset] = 1;
    table.values[offset] = value;
  }
  if (!have_header) parse_fail(line_no, "missing header");
  for (const char s : seen) {
    if (!s) parse_fail(line_no, "lattice is incomplete");
  }
  return table;
}

TabulatedFunction load_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return parse_tabulated(in);
}

void write_tabulated(std::ostream& out, const TabulatedFunction& table) {
  out << "# nodes m=" << table.m << " n=" << table.n << '\n';
  std::vector<Index> ks(table.m, 0);
  char buffer[64];
  for (const double value : table.values) {
    for (const Index k : ks) out << k << ' ';
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    out << buffer << '\n';
    for (std::size_t i = table.m; i-- > 0;) {
      if (++ks[i] <= table.n) break;
      ks[i] = 0;
    }
  }
}

TabulatedFunction tabulate(const TargetFunction& f, Index n) {
  if (n < 1) throw Error(ErrorKind::DomainError, "degree must be positive");
  TabulatedFunction table;
  table.m = f.dimension();
  table.n = n;
  table.values.reserve(lattice_size(table.m, n));
  std::vector<Index> ks(table.m, 0);
  std::vector<double> x(table.m, 0.0);
  const std::size_t total = lattice_size(table.m, n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    for (std::size_t i = 0; i < table.m; ++i) x[i] = node(n, ks[i]);
    table.values.push_back(f(x));
    for (std::size_t i = table.m; i-- > 0;) {
      if (++ks[i] <= n) break;
      ks[i] = 0;
    }
  }
  return table;
}

TargetFunction to_target_function(TabulatedFunction table, std::string name) {
  auto shared = std::make_shared<const TabulatedFunction>(std::move(table));
  const std::size_t m = shared->m;
  return TargetFunction::dense(std::move(name), m, [shared](std::span<const double> x) {
    const TabulatedFunction& t = *shared;
    const double scale = static_cast<double>(t.n + 1);
    std::vector<Index> lo(t.m);
    std::vector<double> frac(t.m);
    for (std::size_t i = 0; i < t.m; ++i) {
      double pos = to_p(x[i]) * scale;
      const double nearest = std::round(pos);
      if (std::fabs(pos - nearest) < 1e-9) pos = nearest;
      if (pos >= static_cast<double>(t.n)) {
        lo[i] = t.n;
        frac[i] = 0.0;
      } else {
        lo[i] = static_cast<Index>(std::floor(pos));
        frac[i] = pos - static_cast<double>(lo[i]);
      }
    }
    double value = 0.0;
    std::vector<Index> corner(t.m);
    for (std::size_t mask = 0; mask < (std::size_t{1} << t.m); ++mask) {
      double weight = 1.0;
      for (std::size_t i = 0; i < t.m; ++i) {
        const bool upper = (mask >> i) & 1u;
        weight *= upper ? frac[i] : 1.0 - frac[i];
        corner[i] = lo[i] + (upper ? 1 : 0);
      }
      if (weight == 0.0) continue;
      value += weight * t.at(corner);
    }
    return value;
  });
}

}  // namespace astat
