// astat: command-line front end for the A-statistical Korovkin toolkit.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "astat/error.hpp"
#include "reporting/commands.hpp"
#include "reporting/config.hpp"

namespace {

using astat::reporting::ExperimentConfig;

struct Flags {
  std::string config_path;
  ExperimentConfig values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_flags(CLI::App* cmd, Flags& flags) {
  auto& v = flags.values;
  auto add = [&](const std::string& key, CLI::Option* opt) { flags.options.emplace_back(key, opt); };
  cmd->add_option("--config", flags.config_path, "JSON config file; flags override its values");
  add("matrix", cmd->add_option("--matrix", v.matrix, "c1 | identity | c1-doubled"));
  add("operator", cmd->add_option("--operator", v.op, "bbh | tn"));
  add("m", cmd->add_option("--m", v.m, "dimension"));
  add("un", cmd->add_option("--un", v.un, "perturbation sequence for tn, e.g. squares:2"));
  add("f", cmd->add_option("--f", v.f, "f0..f{m+1} | product | table:<path>"));
  add("nmax", cmd->add_option("--nmax", v.n_max, "largest operator degree"));
  add("jschedule",
      cmd->add_option("--jschedule,--j", v.j_schedule, "matrix rows to probe")->delimiter(','));
  add("r", cmd->add_option("--r", v.r, "error level defining D"));
  add("epsilon", cmd->add_option("--epsilon", v.epsilon, "epsilon < r"));
  add("pmax", cmd->add_option("--pmax", v.p_max, "largest grid p = x/(1+x)"));
  add("grid_points", cmd->add_option("--grid-points", v.grid_points, "grid points per axis"));
  add("seed", cmd->add_option("--seed", v.seed, "sampling seed"));
  add("workers", cmd->add_option("--workers", v.workers, "worker threads"));
  add("pair_samples", cmd->add_option("--pair-samples", v.pair_samples, "modulus samples"));
  add("tol", cmd->add_option("--tol", v.tol, "trend / diagnostic tolerance"));
  add("sequence", cmd->add_option("--sequence", v.sequence, "sequence for transform"));
  add("spike", cmd->add_option("--spike", v.spike, "square perturbation value"));
  add("out", cmd->add_option("--out", v.out, "output directory"));
}

ExperimentConfig resolve(const Flags& flags, ExperimentConfig defaults) {
  ExperimentConfig config = std::move(defaults);
  if (!flags.config_path.empty()) {
    config = astat::reporting::load_config_file(flags.config_path, config);
  }
  nlohmann::json overrides = nlohmann::json::object();
  const nlohmann::json given = astat::reporting::to_json(flags.values);
  for (const auto& [key, opt] : flags.options) {
    if (opt->count() > 0) overrides[key] = given.at(key);
  }
  astat::reporting::apply_json(config, overrides);
  return config;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"A-statistical Korovkin approximation toolkit"};
  app.require_subcommand(1);

  Flags verify_flags, demo_flags, transform_flags, regularity_flags;
  auto* verify = app.add_subcommand("verify", "error table, bound, index sets and density tails");
  auto* demo = app.add_subcommand("demo-counterexample",
                                  "square-perturbed T_n: A-statistical but not classical");
  auto* transform = app.add_subcommand("transform", "print the A-transform of a sequence");
  auto* regularity = app.add_subcommand("regularity", "finite-depth regularity diagnostics");
  add_flags(verify, verify_flags);
  add_flags(demo, demo_flags);
  add_flags(transform, transform_flags);
  add_flags(regularity, regularity_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const auto config = resolve(verify_flags, ExperimentConfig{});
      const auto outcome = astat::reporting::cmd_verify(config);
      std::cout << outcome.summary["verdicts"].dump() << '\n'
                << "wrote " << outcome.files.errors_csv.string() << ", "
                << outcome.files.densities_csv.string() << ", "
                << outcome.files.summary_json.string() << '\n';
      return outcome.passed ? 0 : 1;
    }
    if (demo->parsed()) {
      ExperimentConfig defaults;
      defaults.n_max = 200;
      const auto outcome =
          astat::reporting::cmd_demo_counterexample(resolve(demo_flags, defaults));
      std::cout << "classical spike count: " << outcome.spike_count << '\n'
                << outcome.headline << '\n'
                << "wrote " << outcome.summary_json.string() << '\n';
      return outcome.passed ? 0 : 1;
    }
    if (transform->parsed()) {
      ExperimentConfig defaults;
      defaults.matrix = "c1";
      astat::reporting::cmd_transform(resolve(transform_flags, defaults), std::cout);
      return 0;
    }
    if (regularity->parsed()) {
      ExperimentConfig defaults;
      defaults.matrix = "c1";
      return astat::reporting::cmd_regularity(resolve(regularity_flags, defaults), std::cout) ? 0
                                                                                          : 1;
    }
  } catch (const astat::Error& e) {
    print_error(std::string(astat::to_string(e.kind())), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 2;
  }
  return 0;
}
