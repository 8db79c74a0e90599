#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bundle.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace {

using namespace dcpl::cli;

struct RunArgs {
  std::string config;
  // CLI11 fills plain values; presence is read from the option counts.
  std::string data, output, mode, se_variant;
  std::size_t workers = 1, points = 51, round_budget = 5, draws = 500;
  double gamma_a = -4.0, gamma_b = 4.0;
  std::uint64_t seed = 0;
  bool antithetic = false;
};

void add_run_options(CLI::App* cmd, RunArgs& a, bool search_options) {
  cmd->add_option("-c,--config", a.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--data", a.data, "dataset path (overrides dataset.path)");
  cmd->add_option("-o,--output", a.output, "output directory (overrides output)");
  cmd->add_option("--workers", a.workers, "worker threads");
  cmd->add_option("--draws", a.draws, "draws per person (mixed logit)");
  cmd->add_option("--seed", a.seed, "random digital shift seed for the draws");
  cmd->add_flag("--antithetic,!--no-antithetic", a.antithetic, "reflected draw sets");
  if (search_options) {
    cmd->add_option("--mode", a.mode, "exhaustive | pragmatic");
    cmd->add_option("--points", a.points, "grid points M");
    cmd->add_option("--gamma-a", a.gamma_a, "lower grid bound in standard errors");
    cmd->add_option("--gamma-b", a.gamma_b, "upper grid bound in standard errors");
    cmd->add_option("--se-variant", a.se_variant, "classical | robust | bhhh");
    cmd->add_option("--round-budget", a.round_budget, "maximum search rounds");
  }
}

Overrides collect(const CLI::App* cmd, const RunArgs& a) {
  Overrides o;
  auto given = [&](const char* name) {
    try {
      return cmd->get_option(name)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  if (given("--data")) o.data = a.data;
  if (given("--output")) o.output = a.output;
  if (given("--workers")) o.workers = a.workers;
  if (given("--draws")) o.draws = a.draws;
  if (given("--seed")) o.seed = a.seed;
  if (given("--antithetic")) o.antithetic = a.antithetic;
  if (given("--mode")) o.mode = a.mode;
  if (given("--points")) o.points = a.points;
  if (given("--gamma-a")) o.gamma_a = a.gamma_a;
  if (given("--gamma-b")) o.gamma_b = a.gamma_b;
  if (given("--se-variant")) o.se_variant = a.se_variant;
  if (given("--round-budget")) o.round_budget = a.round_budget;
  return o;
}

// Best-effort output directory of a config that failed to load, so the error
// record still lands next to where results would have gone.
std::filesystem::path declared_output(const std::string& config) {
  try {
    std::ifstream in(config);
    const Json doc = Json::parse(in, nullptr, true, true);
    if (doc.contains("output") && doc["output"].is_string()) {
      const std::filesystem::path out = doc["output"].get<std::string>();
      return out.is_absolute() ? out : std::filesystem::path(config).parent_path() / out;
    }
  } catch (const std::exception&) {
  }
  return {};
}

int fail(const std::exception& e, const std::filesystem::path& dir) {
  const int code = exit_code_for(e);
  const Json rec = error_record(e, code);
  if (!dir.empty()) write_error_file(dir, rec);
  std::cerr << "dcpl: " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete choice estimation with profile-likelihood search for local optima"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  RunArgs est, prof, srch, sim;
  auto* c_est = app.add_subcommand("estimate", "estimate one model and write the result bundle");
  add_run_options(c_est, est, false);
  auto* c_prof = app.add_subcommand("profile", "one profile-likelihood pass around the estimate");
  add_run_options(c_prof, prof, true);
  auto* c_srch = app.add_subcommand("search", "iterate profiling until no better optimum appears");
  add_run_options(c_srch, srch, true);
  auto* c_sim = app.add_subcommand("simulate", "write a synthetic dataset from known parameters");
  add_run_options(c_sim, sim, false);

  std::vector<std::string> bundles;
  std::string report_out = "dcpl_report";
  auto* c_rep = app.add_subcommand("report", "compare bundles and write plot-ready curve files");
  c_rep->add_option("bundles", bundles, "result directories or .jsonl files")->required();
  c_rep->add_option("-o,--output", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  std::filesystem::path error_dir;
  try {
    if (c_rep->parsed()) {
      error_dir = report_out;
      std::vector<std::filesystem::path> paths(bundles.begin(), bundles.end());
      return cmd_report(paths, report_out);
    }
    struct Entry {
      CLI::App* cmd;
      RunArgs* args;
      int (*run)(const RunConfig&);
    };
    for (const Entry& e : {Entry{c_est, &est, cmd_estimate}, Entry{c_prof, &prof, cmd_profile},
                           Entry{c_srch, &srch, cmd_search}, Entry{c_sim, &sim, cmd_simulate}}) {
      if (!e.cmd->parsed()) continue;
      const Overrides o = collect(e.cmd, *e.args);
      error_dir = o.output ? std::filesystem::path(*o.output) : declared_output(e.args->config);
      RunConfig cfg = load_config(e.args->config);
      apply_overrides(cfg, o);
      error_dir = cfg.output;
      return e.run(cfg);
    }
  } catch (const std::exception& e) {
    return fail(e, error_dir);
  }
  return kExitConfig;
}
