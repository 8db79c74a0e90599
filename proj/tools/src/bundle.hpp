#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <dcpl/dcpl.hpp>

#include "config.hpp"

namespace dcpl::cli {

inline constexpr const char* kToolVersion = "0.3.0";

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct Provenance {
  std::string command;
  Json config;
  std::string dataset_sha256;
};

Json provenance_record(const Provenance& p);
// "# key: value" lines for delimited and text outputs.
std::string comment_header(const Provenance& p);

// Opens for writing, creating parent directories; Error(io) on failure.
std::ofstream open_output(const std::filesystem::path& path);

// JSON Lines writer: one compact object per line.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void write(const Json& record);

 private:
  std::ofstream out_;
};

// Everything reported about one estimate: parameters with all three standard
// errors and t-ratios, LL, BIC, Hessian diagnostics and valuations.
struct SolutionView {
  std::size_t id = 0;
  std::string label;
  bool incumbent = false;
  const EstimationResult* result = nullptr;
  const std::vector<Lineage>* lineage = nullptr;
};

Json solution_record(const SolutionView& s, const ModelSpec& spec,
                     const std::vector<WtpDefinition>& wtp, std::size_t observations);

// Fixed-width table in the layout of a results table.
std::string solution_table(const Json& solution);

// Columns param, gamma, candidate_value, ll, converged, improved; one row per
// grid cell, skipped parameters omitted.
void write_curve_csv(const std::filesystem::path& path, const Provenance& prov,
                     const ProfileRun& run);

Json profile_summary_record(const ProfileRun& run);

// Shortest representation that round-trips; "nan" / "inf" for non-finite.
std::string number(double v);

}  // namespace dcpl::cli
