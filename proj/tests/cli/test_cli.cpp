#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bundle.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "fixtures.hpp"

namespace {

namespace fs = std::filesystem;
using namespace dcpl::cli;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("dcpl_cli_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Json> records(const fs::path& p) {
  std::vector<Json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) out.push_back(Json::parse(line));
  return out;
}

const Json* find_record(const std::vector<Json>& recs, const std::string& kind) {
  for (const auto& r : recs) {
    if (r["record"] == kind) return &r;
  }
  return nullptr;
}

int run(const std::string& args) {
  const std::string cmd = std::string(DCPL_EXECUTABLE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& p, const Json& j) {
  std::ofstream out(p);
  out << j.dump(2);
}

Json mnl_config(const fs::path& data, const fs::path& out) {
  return {{"dataset", {{"path", data.string()}}},
          {"model", {{"family", "mnl"}, {"attributes", {"tt", "tc", "hw", "ch"}}}},
          {"wtp", {{{"name", "VTT"}, {"attribute", "tt"}, {"cost", "tc"}, {"multiplier", 60}, {"unit", "CHF/hr"}}}},
          {"profile", {{"points", 11}}},
          {"output", out.string()}};
}

// Simulated MNL data shared by the end-to-end tests.
fs::path mnl_dataset() {
  static const fs::path path = [] {
    const fs::path dir = scratch("data");
    const fs::path cfg = dir / "sim.json";
    Json j = {{"model", {{"family", "mnl"}, {"attributes", {"tt", "tc", "hw", "ch"}}}},
              {"dataset", {{"path", (dir / "mnl.csv").string()}}},
              {"output", (dir / "sim").string()},
              {"simulate",
               {{"persons", 300},
                {"tasks", 9},
                {"seed", 5},
                {"attributes",
                 {{{"name", "tt"}, {"low", 10}, {"high", 60}},
                  {{"name", "tc"}, {"low", 2}, {"high", 30}},
                  {{"name", "hw"}, {"low", 10}, {"high", 60}},
                  {{"name", "ch"}, {"low", 0}, {"high", 2}}}},
                {"truth", {{"b_tt", -0.06}, {"b_tc", -0.13}, {"b_hw", -0.04}, {"b_ch", -1.15}}}}}};
    write_json(cfg, j);
    EXPECT_EQ(run("simulate -c " + cfg.string()), 0);
    return dir / "mnl.csv";
  }();
  return path;
}

// ---------------------------------------------------------------- config

TEST(Config, DefaultsFollowTheModel) {
  const auto cfg = parse_config(Json::parse(R"({"model": {"family": "mnl", "attributes": ["tt", "tc"]}})"));
  EXPECT_EQ(cfg.dataset.attributes, (std::vector<std::string>{"tt", "tc"}));
  EXPECT_EQ(cfg.search.profile.points, 51u);
  EXPECT_EQ(cfg.search.profile.gamma_a, -4.0);
  EXPECT_EQ(cfg.search.profile.gamma_b, 4.0);
  EXPECT_EQ(cfg.search.profile.se_variant, dcpl::CovarianceVariant::robust);
  EXPECT_EQ(cfg.search.round_budget, 5u);
  EXPECT_EQ(cfg.draws.draws_per_person, 500u);
}

TEST(Config, UnknownKeysAndBadValuesAreConfigErrors) {
  for (const char* text :
       {R"({"model": {"family": "mnl", "attributes": ["tt"]}, "profil": {}})",
        R"({"model": {"family": "probit", "attributes": ["tt"]}})",
        R"({"model": {"family": "mnl", "attributes": ["tt"]}, "profile": {"mode": "greedy"}})",
        R"({"model": {"family": "mnl", "attributes": ["tt"]}, "profile": {"points": "many"}})",
        R"({"model": {"family": "latent_class", "attributes": ["tt"], "classes": 1}})"}) {
    try {
      parse_config(Json::parse(text));
      FAIL() << text;
    } catch (const dcpl::Error& e) {
      EXPECT_EQ(exit_code_for(e), kExitConfig) << text;
    }
  }
}

TEST(Config, RangeChecks) {
  auto cfg = parse_config(Json::parse(R"({"model": {"family": "mnl", "attributes": ["tt"]}})"));
  cfg.search.profile.gamma_a = 1.0;
  cfg.search.profile.gamma_b = -1.0;
  EXPECT_THROW(cfg.validate(false), dcpl::Error);
  cfg.search.profile.gamma_b = 2.0;
  EXPECT_NO_THROW(cfg.validate(false));
  cfg.workers = 0;
  EXPECT_THROW(cfg.validate(false), dcpl::Error);
}

TEST(Config, OverridesWinAndResolvedFormRoundTrips) {
  auto cfg = parse_config(Json::parse(
      R"({"model": {"family": "mnl", "attributes": ["tt"]}, "profile": {"points": 21, "mode": "exhaustive"}})"));
  Overrides o;
  o.points = 7;
  o.mode = "pragmatic";
  o.workers = 3;
  apply_overrides(cfg, o);
  EXPECT_EQ(cfg.search.profile.points, 7u);
  EXPECT_EQ(cfg.search.mode, dcpl::SearchMode::pragmatic);
  const Json j = cfg.to_json();
  EXPECT_EQ(parse_config(j).to_json(), j);
}

TEST(Config, RelativePathsResolveAgainstConfigFile) {
  const auto cfg = parse_config(
      Json::parse(R"({"model": {"family": "mnl", "attributes": ["tt"]}, "dataset": {"path": "d.csv"}})"),
      "/some/dir");
  EXPECT_EQ(cfg.dataset.path, fs::path("/some/dir/d.csv"));
}

TEST(ExitCodes, KindsMapToDocumentedCodes) {
  EXPECT_EQ(exit_code_for(dcpl::ErrorKind::config), 2);
  EXPECT_EQ(exit_code_for(dcpl::ErrorKind::schema), 3);
  EXPECT_EQ(exit_code_for(dcpl::ErrorKind::parse), 3);
  EXPECT_EQ(exit_code_for(dcpl::ErrorKind::io), 3);
  EXPECT_EQ(exit_code_for(dcpl::ErrorKind::evaluation), 4);
  EXPECT_EQ(exit_code_for(dcpl::ErrorKind::start_point), 4);
}

TEST(Bundle, Sha256KnownVector) {
  const auto dir = scratch("sha");
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  EXPECT_EQ(sha256_file(dir / "abc.txt"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Bundle, NumbersRoundTrip) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(number(v)), v);
  EXPECT_EQ(number(std::nan("")), "nan");
}

// ---------------------------------------------------------------- end to end

TEST(Cli, EstimateWritesFullResultAndIsReproducible) {
  const auto data = mnl_dataset();
  const auto dir = scratch("estimate");
  write_json(dir / "cfg.json", mnl_config(data, dir / "out"));
  ASSERT_EQ(run("estimate -c " + (dir / "cfg.json").string()), 0);
  const auto recs = records(dir / "out" / "estimate.jsonl");
  const Json* prov = find_record(recs, "provenance");
  ASSERT_TRUE(prov);
  EXPECT_EQ((*prov)["dataset_sha256"], sha256_file(data));
  EXPECT_EQ((*prov)["config"]["profile"]["points"], 11);
  const Json* sol = find_record(recs, "solution");
  ASSERT_TRUE(sol);
  EXPECT_TRUE((*sol)["convergence"]["converged"].get<bool>());
  EXPECT_TRUE(sol->contains("bic"));
  EXPECT_TRUE((*sol)["hessian"]["negative_definite"].get<bool>());
  for (const auto& p : (*sol)["parameters"]) {
    for (const char* k : {"se_classical", "se_robust", "se_bhhh", "t_robust"}) {
      EXPECT_TRUE(p[k].is_number()) << k;
    }
  }
  ASSERT_EQ((*sol)["wtp"].size(), 1u);
  EXPECT_EQ((*sol)["wtp"][0]["quantity"], "VTT");
  const std::string txt = slurp(dir / "out" / "estimate.txt");
  EXPECT_EQ(txt.rfind("# dcpl", 0), 0u);
  EXPECT_NE(txt.find("b_tt"), std::string::npos);

  const std::string first = slurp(dir / "out" / "estimate.jsonl");
  ASSERT_EQ(run("estimate -c " + (dir / "cfg.json").string()), 0);
  EXPECT_EQ(slurp(dir / "out" / "estimate.jsonl"), first);
}

TEST(Cli, MissingDatasetGivesDataErrorRecord) {
  const auto dir = scratch("missing");
  write_json(dir / "cfg.json", mnl_config(dir / "nope.csv", dir / "out"));
  EXPECT_EQ(run("estimate -c " + (dir / "cfg.json").string()), 3);
  const Json err = Json::parse(slurp(dir / "out" / "error.json"));
  EXPECT_EQ(err["exit_code"], 3);
  EXPECT_EQ(err["kind"], "io");
}

TEST(Cli, InvalidConfigGivesConfigError) {
  const auto dir = scratch("badcfg");
  std::ofstream(dir / "cfg.json") << R"({"model": {"family": "mnl"}, "output": ")" +
                                         (dir / "out").string() + "\"}";
  EXPECT_EQ(run("estimate -c " + (dir / "cfg.json").string()), 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "error.json"));
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(run("estimate -c " + (dir / "broken.json").string()), 2);
  EXPECT_EQ(run("estimate"), 2);
}

TEST(Cli, ProfileCurveFileHasOneRowPerCell) {
  const auto data = mnl_dataset();
  const auto dir = scratch("profile");
  write_json(dir / "cfg.json", mnl_config(data, dir / "out"));
  ASSERT_EQ(run("profile -c " + (dir / "cfg.json").string() + " --points 7"), 0);
  std::ifstream in(dir / "out" / "curves_round1_solution0.csv");
  std::string line;
  std::size_t comments = 0;
  std::size_t rows = 0;
  std::string header;
  while (std::getline(in, line)) {
    if (line[0] == '#') {
      ++comments;
    } else if (header.empty()) {
      header = line;
    } else {
      ++rows;
    }
  }
  EXPECT_EQ(comments, 3u);
  EXPECT_EQ(header, "param,gamma,candidate_value,ll,converged,improved");
  EXPECT_EQ(rows, 4u * 7u);
  const auto recs = records(dir / "out" / "profile.jsonl");
  const Json* prof = find_record(recs, "profile");
  ASSERT_TRUE(prof);
  EXPECT_EQ((*prof)["improvements"], 0);
  EXPECT_EQ((*prof)["cells"], 28);
}

TEST(Cli, MnlSearchIsOneQuietRound) {
  const auto data = mnl_dataset();
  const auto dir = scratch("search");
  write_json(dir / "cfg.json", mnl_config(data, dir / "out"));
  ASSERT_EQ(run("search -c " + (dir / "cfg.json").string() + " --workers 2"), 0);
  const auto recs = records(dir / "out" / "search.jsonl");
  const Json* summary = find_record(recs, "summary");
  ASSERT_TRUE(summary);
  EXPECT_TRUE((*summary)["certified"].get<bool>());
  EXPECT_EQ((*summary)["rounds"], 1);
  EXPECT_EQ((*summary)["pool_size"], 1);
  EXPECT_EQ((*find_record(recs, "round"))["improvements"], 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "curves_round1_solution0.csv"));
}

TEST(Cli, BudgetExhaustedSearchIsNotCertified) {
  // Small latent class problem started at a known inferior optimum.
  const auto dir = scratch("lc");
  const auto ds = dcpl::synthesize_dataset(dcpltest::lc_truth(), dcpltest::travel_design(250),
                                           dcpltest::lc_spec(), 3);
  dcpl::write_dataset(ds, dir / "lc.csv");
  Json start = Json::object();
  for (const auto& p : dcpltest::planted_lc_inferior_start()) {
    if (!p.fixed) start[p.name] = p.value;
  }
  Json cfg = {{"dataset", {{"path", (dir / "lc.csv").string()}}},
              {"model", {{"family", "latent_class"}, {"attributes", {"tt", "tc", "hw", "ch"}}, {"classes", 2}}},
              {"start", start},
              {"profile", {{"points", 5}, {"mode", "pragmatic"}, {"round_budget", 1}}},
              {"output", (dir / "out").string()}};
  write_json(dir / "cfg.json", cfg);
  ASSERT_EQ(run("search -c " + (dir / "cfg.json").string()), 5);
  const auto recs = records(dir / "out" / "search.jsonl");
  EXPECT_FALSE((*find_record(recs, "summary"))["certified"].get<bool>());
  std::size_t solutions = 0;
  double incumbent = 0.0;
  for (const auto& r : recs) {
    if (r["record"] != "solution") continue;
    ++solutions;
    EXPECT_FALSE(r["lineage"].empty());
    if (r["incumbent"].get<bool>()) incumbent = r["loglik"].get<double>();
  }
  EXPECT_GE(solutions, 2u);
  EXPECT_GT(incumbent, (*find_record(recs, "summary"))["base_loglik"].get<double>());
}

TEST(Cli, ReportComparesBundlesAndAddsReferenceLines) {
  const auto data = mnl_dataset();
  const auto dir = scratch("report");
  write_json(dir / "cfg.json", mnl_config(data, dir / "a"));
  ASSERT_EQ(run("estimate -c " + (dir / "cfg.json").string()), 0);
  ASSERT_EQ(run("profile -c " + (dir / "cfg.json").string() + " -o " + (dir / "b").string() +
                " --points 5"),
            0);
  ASSERT_EQ(run("report " + (dir / "a").string() + " " + (dir / "b").string() + " -o " +
                (dir / "rep").string()),
            0);
  const std::string txt = slurp(dir / "rep" / "report.txt");
  EXPECT_NE(txt.find("a:base*"), std::string::npos);
  EXPECT_NE(txt.find("b:base*"), std::string::npos);
  EXPECT_NE(txt.find("VTT"), std::string::npos);
  const fs::path curve = dir / "rep" / "curves" / "b_curves_round1_solution0_b_tt.csv";
  ASSERT_TRUE(fs::exists(curve));
  EXPECT_NE(slurp(curve).find("ll_base,ll_base_minus_1_92"), std::string::npos);

  // Single bundle: one-column table.
  EXPECT_EQ(run("report " + (dir / "a").string() + " -o " + (dir / "one").string()), 0);
  // Missing bundle.
  EXPECT_EQ(run("report " + (dir / "zzz").string() + " -o " + (dir / "bad").string()), 3);
}

TEST(Cli, IncompatibleBundlesRejected) {
  const auto data = mnl_dataset();
  const auto dir = scratch("incompat");
  write_json(dir / "cfg.json", mnl_config(data, dir / "a"));
  ASSERT_EQ(run("estimate -c " + (dir / "cfg.json").string()), 0);
  Json other = mnl_config(data, dir / "b");
  other["model"]["attributes"] = {"tt", "tc"};
  write_json(dir / "cfg2.json", other);
  ASSERT_EQ(run("estimate -c " + (dir / "cfg2.json").string()), 0);
  EXPECT_EQ(run("report " + (dir / "a").string() + " " + (dir / "b").string() + " -o " +
                (dir / "rep").string()),
            2);
}

}  // namespace
