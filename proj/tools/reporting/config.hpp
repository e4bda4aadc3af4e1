#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "astat/korovkin.hpp"
#include "astat/operators.hpp"
#include "astat/summability.hpp"

namespace astat::reporting {

struct ExperimentConfig {
  std::string matrix = "identity";  // c1 | identity | c1-doubled
  std::string op = "bbh";           // bbh | tn
  std::size_t m = 2;
  std::string un = "ones";  // perturbation for tn, see parse_sequence
  std::string f = "f1";     // f0..f{m+1} | product | table:<path>
  Index n_max = 100;
  std::vector<Index> j_schedule;  // empty: command default
  double r = 0.5;
  double epsilon = 0.1;
  double p_max = kDefaultPMax;
  std::size_t grid_points = kDefaultGridPoints;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t pair_samples = kDefaultPairSamples;
  double tol = kDefaultTrendTolerance;
  std::string sequence = "ones";  // transform input
  double spike = 2.0;             // demo-counterexample perturbation
  std::string out = "astat-out";
};

// JSON keys match the long flag names with '-' replaced by '_'
// (nmax, jschedule, grid_points, pair_samples, ...).
nlohmann::json to_json(const ExperimentConfig& config);
// Unknown keys and wrong types raise ConfigError naming the key.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

/// c1 | identity | c1-doubled. Throws UnknownMatrix.
SummabilityMatrix parse_matrix(const std::string& name);
/// ones | const:<c> | harmonic | one-plus-harmonic | alternating |
/// squares:<spike>. Throws UnknownSequence.
SequenceSpec parse_sequence(const std::string& spec);
/// f0..f{m+1} | product | table:<path>. Throws UnknownFunction.
TargetFunction parse_target(const std::string& spec, std::size_t m);
OperatorFamily make_family(const ExperimentConfig& config);
EvaluationGrid make_grid(const ExperimentConfig& config);

/// Up to four evenly spread rows ending at n_max.
std::vector<Index> default_verify_schedule(Index n_max);

}  // namespace astat::reporting
