#include "reporting/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "astat/error.hpp"

namespace astat::reporting {

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ConfigError, field + ": " + what);
}

template <typename T>
T read_field(const nlohmann::json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(key, "wrong type");
  }
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"matrix", c.matrix},       {"operator", c.op},
      {"m", c.m},                 {"un", c.un},
      {"f", c.f},                 {"nmax", c.n_max},
      {"jschedule", c.j_schedule}, {"r", c.r},
      {"epsilon", c.epsilon},     {"pmax", c.p_max},
      {"grid_points", c.grid_points}, {"seed", c.seed},
      {"workers", c.workers},     {"pair_samples", c.pair_samples},
      {"tol", c.tol},             {"sequence", c.sequence},
      {"spike", c.spike},         {"out", c.out},
  };
}

void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) config_error("config", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "matrix") c.matrix = read_field<std::string>(value, key);
    else if (key == "operator") c.op = read_field<std::string>(value, key);
    else if (key == "m") c.m = read_field<std::size_t>(value, key);
    else if (key == "un") c.un = read_field<std::string>(value, key);
    else if (key == "f") c.f = read_field<std::string>(value, key);
    else if (key == "nmax") c.n_max = read_field<Index>(value, key);
    else if (key == "jschedule") c.j_schedule = read_field<std::vector<Index>>(value, key);
    else if (key == "r") c.r = read_field<double>(value, key);
    else if (key == "epsilon") c.epsilon = read_field<double>(value, key);
    else if (key == "pmax") c.p_max = read_field<double>(value, key);
    else if (key == "grid_points") c.grid_points = read_field<std::size_t>(value, key);
    else if (key == "seed") c.seed = read_field<std::uint64_t>(value, key);
    else if (key == "workers") c.workers = read_field<unsigned>(value, key);
    else if (key == "pair_samples") c.pair_samples = read_field<std::size_t>(value, key);
    else if (key == "tol") c.tol = read_field<double>(value, key);
    else if (key == "sequence") c.sequence = read_field<std::string>(value, key);
    else if (key == "spike") c.spike = read_field<double>(value, key);
    else if (key == "out") c.out = read_field<std::string>(value, key);
    else config_error(key, "unknown configuration key");
  }
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) config_error("config", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    config_error("config", std::string("invalid JSON: ") + e.what());
  }
  apply_json(base, j);
  return base;
}

void validate(const ExperimentConfig& c) {
  if (c.op != "bbh" && c.op != "tn") config_error("operator", "expected bbh or tn");
  if (c.m < 1 || c.m > 6) config_error("m", "must be in [1, 6]");
  if (c.n_max < 1) config_error("nmax", "must be positive");
  if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) config_error("epsilon", "must be positive");
  if (!(c.r > 0.0) || !std::isfinite(c.r)) config_error("r", "must be positive");
  if (!(c.epsilon < c.r)) config_error("epsilon", "must be smaller than r");
  if (!(c.p_max > 0.0 && c.p_max < 1.0)) config_error("pmax", "must lie in (0, 1)");
  if (c.p_max > kMaxP) config_error("pmax", "must not exceed 0.999");
  if (c.grid_points < 2) config_error("grid_points", "need at least 2 points per axis");
  if (c.workers < 1) config_error("workers", "must be positive");
  if (c.pair_samples < 1) config_error("pair_samples", "must be positive");
  if (!(c.tol > 0.0)) config_error("tol", "must be positive");
  if (!c.j_schedule.empty()) {
    try {
      validate_schedule(c.j_schedule);
    } catch (const Error& e) {
      config_error("jschedule", e.what());
    }
  }
}

SummabilityMatrix parse_matrix(const std::string& name) {
  if (name == "c1") return make_cesaro_c1();
  if (name == "identity") return make_identity();
  if (name == "c1-doubled") return make_scaled(make_cesaro_c1(), 2.0, "c1-doubled");
  throw Error(ErrorKind::UnknownMatrix, "unknown matrix '" + name + "'");
}

SequenceSpec parse_sequence(const std::string& spec) {
  if (spec == "ones") return SequenceSpec("ones", [](Index) { return 1.0; }, 1.0);
  if (spec == "harmonic") return make_harmonic();
  if (spec == "one-plus-harmonic") return make_one_plus_harmonic();
  if (spec == "alternating") return make_alternating();
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    const auto value = parse_double(spec.substr(colon + 1));
    if (value && kind == "const") return make_constant(*value);
    if (value && kind == "squares") return make_square_perturbation(*value);
  }
  throw Error(ErrorKind::UnknownSequence, "unknown sequence '" + spec + "'");
}

TargetFunction parse_target(const std::string& spec, std::size_t m) {
  if (spec == "product") return product_function(m);
  if (spec.rfind("table:", 0) == 0) {
    const std::string path = spec.substr(6);
    TabulatedFunction table = load_tabulated(path);
    if (table.m != m) {
      throw Error(ErrorKind::ConfigError, "f: tabulated function has m = " +
                                              std::to_string(table.m) + ", expected " +
                                              std::to_string(m));
    }
    return to_target_function(std::move(table), spec);
  }
  if (spec.size() > 1 && spec[0] == 'f') {
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(spec.data() + 1, spec.data() + spec.size(), index);
    if (ec == std::errc() && ptr == spec.data() + spec.size() && index <= m + 1) {
      return test_suite(m).functions[index];
    }
  }
  throw Error(ErrorKind::UnknownFunction, "unknown target function '" + spec + "'");
}

OperatorFamily make_family(const ExperimentConfig& c) {
  if (c.op == "tn") return OperatorFamily::perturbed(c.m, parse_sequence(c.un));
  return OperatorFamily::bbh(c.m);
}

EvaluationGrid make_grid(const ExperimentConfig& c) {
  return EvaluationGrid::uniform(c.m, c.p_max, c.grid_points);
}

std::vector<Index> default_verify_schedule(Index n_max) {
  std::vector<Index> schedule;
  for (Index q = 1; q <= 4; ++q) {
    const Index j = std::max<Index>(1, n_max * q / 4);
    if (schedule.empty() || j > schedule.back()) schedule.push_back(j);
  }
  return schedule;
}

}  // namespace astat::reporting
