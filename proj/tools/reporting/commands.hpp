#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "astat/korovkin.hpp"
#include "reporting/config.hpp"

namespace astat::reporting {

struct ReportFiles {
  std::filesystem::path errors_csv;
  std::filesystem::path densities_csv;
  std::filesystem::path summary_json;
};

struct VerifyOutcome {
  ReportFiles files;
  ConvergenceReport report;
  nlohmann::json summary;
  bool passed = false;
};

struct DemoOutcome {
  std::filesystem::path summary_json;
  std::vector<ReportFiles> per_target;  // f0 .. f3
  nlohmann::json summary;
  Index spike_count = 0;
  std::string headline;
  bool passed = false;
};

/// Fixed 17-significant-digit scientific notation used by every CSV.
std::string format_number(double value);

std::string errors_csv(const ConvergenceReport& report);
std::string densities_csv(const ConvergenceReport& report);
nlohmann::json summarize(const ConvergenceReport& report);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

// Writes errors.csv, densities.csv and summary.json into config.out.
// Validation happens before any computation, so a ConfigError leaves no files.
VerifyOutcome cmd_verify(const ExperimentConfig& config);

// Square-perturbed T_n with C1 on the 2-variable test suite. One report
// directory per target f0..f3 under config.out, plus a top-level
// summary.json. The density tails need errors for every n up to the last
// probed row, so the table extends to max(nmax, last j); the classical spike
// count only looks at n <= nmax.
DemoOutcome cmd_demo_counterexample(const ExperimentConfig& config);

/// Prints "j,(Ax)_j" rows for config.matrix applied to config.sequence.
void cmd_transform(const ExperimentConfig& config, std::ostream& out);

// Prints a verdict table and writes regularity.json into config.out.
// Returns true iff all three verdicts pass.
bool cmd_regularity(const ExperimentConfig& config, std::ostream& out);

std::vector<Index> default_demo_schedule();
std::vector<Index> default_regularity_schedule();

}  // namespace astat::reporting
