#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <dcpl/dcpl.hpp>
#include <json.hpp>

namespace dcpl::cli {

using Json = nlohmann::ordered_json;

struct DatasetConfig {
  std::filesystem::path path;
  DataLayout layout = DataLayout::wide;
  std::size_t alternatives = 2;
  std::vector<std::string> attributes;  // empty: whatever the model uses
  std::vector<std::string> covariates;
  std::string choice_column = "choice";
  std::string person_column = "id";
  std::string alternative_column = "alt";

  DatasetSchema schema() const;
};

struct SimulateConfig {
  std::vector<AttributeRange> attributes;
  std::size_t persons = 1000;
  std::size_t tasks = 9;
  std::size_t alternatives = 2;
  std::uint64_t seed = 1;
  std::map<std::string, double> truth;
};

struct RunConfig {
  DatasetConfig dataset;
  ModelSpec model;
  std::map<std::string, double> start;  // partial; unnamed entries use the default start
  std::map<std::string, double> fixed;
  OptimizerSettings optimizer;
  SobolConfig draws;  // dimensions follow the model
  SearchSettings search;
  std::vector<WtpDefinition> wtp;
  std::size_t workers = 1;
  std::filesystem::path output = "dcpl_out";
  std::optional<SimulateConfig> simulate;

  // Range and consistency checks; throws Error(config). Files are checked
  // only when `need_dataset` is set.
  void validate(bool need_dataset) const;
  // Fully resolved settings, the form embedded in every output file.
  Json to_json() const;
};

// Relative paths inside the file resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});

// Flag values that take precedence over the file.
struct Overrides {
  std::optional<std::string> data;
  std::optional<std::string> output;
  std::optional<std::size_t> workers;
  std::optional<std::string> mode;
  std::optional<std::size_t> points;
  std::optional<double> gamma_a;
  std::optional<double> gamma_b;
  std::optional<std::string> se_variant;
  std::optional<std::size_t> round_budget;
  std::optional<std::size_t> draws;
  std::optional<std::uint64_t> seed;
  std::optional<bool> antithetic;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

}  // namespace dcpl::cli
