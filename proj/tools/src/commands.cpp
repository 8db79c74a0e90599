#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "bundle.hpp"

namespace dcpl::cli {
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::spec:
      return kExitConfig;
    case ErrorKind::schema:
    case ErrorKind::validation:
    case ErrorKind::parse:
    case ErrorKind::io:
      return kExitData;
    default:
      return kExitEstimation;
  }
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return exit_code_for(err->kind());
  return kExitEstimation;
}

Json error_record(const std::exception& e, int exit_code) {
  Json j = {{"record", "error"}, {"exit_code", exit_code}, {"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["kind"] = std::string(to_string(err->kind()));
  } else {
    j["kind"] = "internal";
  }
  if (const auto* d = dynamic_cast<const DataError*>(&e)) {
    if (d->row() > 0) j["row"] = d->row();
    if (!d->column().empty()) j["column"] = d->column();
  }
  if (const auto* ev = dynamic_cast<const EvaluationError*>(&e)) {
    j["person"] = ev->person();
    if (ev->task() != EvaluationError::npos) j["task"] = ev->task();
  }
  if (const auto* inv = dynamic_cast<const InversionError*>(&e)) j["rcond"] = inv->rcond();
  return j;
}

void write_error_file(const fs::path& dir, const Json& record) {
  try {
    auto out = open_output(dir / "error.json");
    out << record.dump(2) << '\n';
  } catch (const std::exception&) {
    // The record still reaches stderr through the caller.
  }
}

namespace {

struct Prepared {
  Provenance prov;
  std::shared_ptr<const ChoiceDataset> data;
  std::unique_ptr<ChoiceModel> model;
  Json data_record;
};

Prepared prepare(const RunConfig& cfg, const std::string& command) {
  cfg.validate(true);
  Prepared p;
  p.prov.command = command;
  p.prov.config = cfg.to_json();
  p.prov.dataset_sha256 = sha256_file(cfg.dataset.path);
  p.data = std::make_shared<const ChoiceDataset>(load_dataset(cfg.dataset.path, cfg.dataset.schema()));

  const auto panel = validate_panel(*p.data);
  Json issues = Json::array();
  for (const auto& i : panel.issues) {
    issues.push_back({{"severity", i.severity == IssueSeverity::violation ? "violation" : "warning"},
                      {"category", i.category},
                      {"message", i.message}});
  }
  p.data_record = {{"record", "data"},
                   {"persons", p.data->persons()},
                   {"observations", p.data->observations()},
                   {"alternatives", p.data->alternatives()},
                   {"attributes", p.data->attribute_names()},
                   {"issues", issues}};
  if (panel.violations() > 0) {
    throw Error(ErrorKind::validation, "panel check failed: " + panel.issues.front().message);
  }

  std::shared_ptr<const DrawMatrix> draws;
  if (cfg.model.family == ModelFamily::mixed_logit_wtp) {
    draws = std::make_shared<const DrawMatrix>(build_person_draws(cfg.draws, p.data->persons()));
  }
  p.model = make_model(cfg.model, p.data, draws);
  return p;
}

EstimationResult fit_mnl(std::shared_ptr<const ChoiceDataset> data,
                         const std::vector<std::string>& attributes, const OptimizerSettings& opt) {
  const auto m = make_model(ModelSpec::mnl(attributes), std::move(data));
  return maximize(make_objective(*m), m->template_parameters(), opt);
}

// MNL: zeros. LC: MNL estimates spread by class (equal shares). Mixed logit:
// lognormal locations from MNL ratios, small diagonal spread.
ParameterVector default_start(const ChoiceModel& model, const RunConfig& cfg) {
  ParameterVector p = model.template_parameters();
  const auto& spec = model.spec();
  const auto& lay = model.layout();
  if (spec.family == ModelFamily::latent_class) {
    const auto mnl = fit_mnl(model.shared_data(), spec.attributes, cfg.optimizer);
    for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
      for (std::size_t c = 0; c < spec.classes; ++c) {
        const double shift = 0.75 + 0.5 * static_cast<double>(c) / static_cast<double>(spec.classes - 1);
        p.set_value(lay.class_coefficient(a, c), mnl.estimates[a].value * shift);
      }
    }
  } else if (spec.family == ModelFamily::mixed_logit_wtp) {
    std::vector<std::string> attrs;
    for (const auto& r : spec.random) attrs.push_back(r.attribute);
    const auto mnl = fit_mnl(model.shared_data(), attrs, cfg.optimizer);
    const std::size_t s = spec.scale_index();
    const double scale = mnl.estimates[s].value;
    for (std::size_t d = 0; d < spec.random.size(); ++d) {
      const double b = d == s ? scale : mnl.estimates[d].value / scale;
      p.set_value(lay.mean(d), std::log(std::max(std::abs(b), 1e-3)));
      p.set_value(lay.cholesky(d, d), 0.1);
    }
  }
  for (const auto& [name, v] : cfg.start) {
    const auto i = p.index_of(name);
    if (!i) throw Error(ErrorKind::config, "start value for unknown parameter '" + name + "'");
    p.set_value(*i, v);
  }
  for (const auto& [name, v] : cfg.fixed) {
    if (!p.index_of(name)) throw Error(ErrorKind::config, "cannot fix unknown parameter '" + name + "'");
    p.fix(name, v);
  }
  return p;
}

EstimationResult estimate_base(const Prepared& p, const RunConfig& cfg) {
  auto r = maximize(make_objective(*p.model), default_start(*p.model, cfg), cfg.optimizer);
  if (r.converged()) attach_inference(r, *p.model);
  return r;
}

Json solution_json(const EstimationResult& r, const RunConfig& cfg, const Prepared& p,
                   std::size_t id, const std::string& label, bool incumbent,
                   const std::vector<Lineage>* lineage = nullptr) {
  return solution_record({id, label, incumbent, &r, lineage}, cfg.model, cfg.wtp,
                         p.data->observations());
}

void write_text(const fs::path& path, const Provenance& prov, const std::string& body) {
  auto out = open_output(path);
  out << comment_header(prov) << body;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

ProfileSettings profile_settings(const RunConfig& cfg) {
  ProfileSettings s = cfg.search.profile;
  s.optimizer = cfg.optimizer;
  s.workers = cfg.workers;
  return s;
}

std::string profile_text(const ProfileRun& run) {
  std::ostringstream out;
  out << "profile pass: " << run.report.cells << " cells, " << run.report.estimations
      << " constrained fits, " << run.report.improvements << " improving, "
      << run.report.failures << " failed\n";
  char line[220];
  std::snprintf(line, sizeof line, "  %-14s %6s %8s %10s %10s %12s %12s\n", "parameter", "impr",
                "monotone", "drop(-1.96)", "drop(+1.96)", "PL lower", "PL upper");
  out << line;
  for (const auto& s : run.report.parameters) {
    if (s.skipped) {
      std::snprintf(line, sizeof line, "  %-14s skipped (no standard error)\n", s.parameter.c_str());
    } else {
      std::snprintf(line, sizeof line, "  %-14s %6zu %8s %10.4f %10.4f %12.5g%s %12.5g%s\n",
                    s.parameter.c_str(), s.improvements, s.monotone ? "yes" : "no", s.drop_lower,
                    s.drop_upper, s.interval.lower, s.interval.lower_open ? "*" : " ",
                    s.interval.upper, s.interval.upper_open ? "*" : " ");
    }
    out << line;
  }
  return out.str();
}

void fail_unconverged(const EstimationResult& r) {
  throw Error(ErrorKind::evaluation,
              "base estimation did not converge (" + to_string(r.convergence.status) + ")");
}

}  // namespace

int cmd_estimate(const RunConfig& cfg) {
  const auto p = prepare(cfg, "estimate");
  const auto r = estimate_base(p, cfg);
  const Json sol = solution_json(r, cfg, p, 0, "base", true);
  JsonlWriter out(cfg.output / "estimate.jsonl");
  out.write(provenance_record(p.prov));
  out.write(p.data_record);
  out.write(sol);
  write_text(cfg.output / "estimate.txt", p.prov, solution_table(sol));
  if (!r.converged()) fail_unconverged(r);
  return kExitOk;
}

int cmd_profile(const RunConfig& cfg) {
  const auto p = prepare(cfg, "profile");
  const auto base = estimate_base(p, cfg);
  if (!base.converged()) fail_unconverged(base);
  const auto run = run_profile(*p.model, base, profile_settings(cfg));
  const Json sol = solution_json(base, cfg, p, 0, "base", true);
  JsonlWriter out(cfg.output / "profile.jsonl");
  out.write(provenance_record(p.prov));
  out.write(p.data_record);
  out.write(sol);
  Json summary = profile_summary_record(run);
  summary["curve_file"] = "curves_round1_solution0.csv";
  out.write(summary);
  write_curve_csv(cfg.output / "curves_round1_solution0.csv", p.prov, run);
  write_text(cfg.output / "profile.txt", p.prov, solution_table(sol) + "\n" + profile_text(run));
  return kExitOk;
}

int cmd_search(const RunConfig& cfg) {
  const auto p = prepare(cfg, "search");
  const auto base = estimate_base(p, cfg);
  if (!base.converged()) fail_unconverged(base);
  SearchSettings s = cfg.search;
  s.profile = profile_settings(cfg);
  s.antithetic_draws = cfg.draws.antithetic;
  const auto res = iterate_search(*p.model, base, s);

  JsonlWriter out(cfg.output / "search.jsonl");
  out.write(provenance_record(p.prov));
  out.write(p.data_record);
  std::ostringstream text;
  for (const auto& round : res.rounds) {
    Json profiled = Json::array();
    for (const auto& ps : round.profiled) {
      const std::string file = "curves_round" + std::to_string(round.round) + "_solution" +
                               std::to_string(ps.solution_id) + ".csv";
      write_curve_csv(cfg.output / file, p.prov, ps.run);
      const Json summary = profile_summary_record(ps.run);
      profiled.push_back({{"solution_id", ps.solution_id},
                          {"loglik", ps.loglik},
                          {"improvements", ps.run.report.improvements},
                          {"failures", ps.run.report.failures},
                          {"refined", ps.refined},
                          {"refine_failures", ps.refine_failures},
                          {"curve_file", file},
                          {"parameters", summary["parameters"]}});
    }
    out.write({{"record", "round"},
               {"round", round.round},
               {"incumbent_before", round.incumbent_before},
               {"incumbent_after", round.incumbent_after},
               {"improvements", round.improvements},
               {"new_solutions", round.new_solutions},
               {"improved_incumbent", round.improved_incumbent},
               {"profiled", profiled}});
    char line[200];
    std::snprintf(line, sizeof line,
                  "round %zu: profiled %zu solution(s), %zu improving cells, %zu new, incumbent "
                  "%.4f -> %.4f\n",
                  round.round, round.profiled.size(), round.improvements, round.new_solutions.size(),
                  round.incumbent_before, round.incumbent_after);
    text << line;
  }
  text << (res.certified ? "certified: the last round found no improvement\n"
                         : "NOT certified: round budget exhausted\n")
       << "pool: " << res.pool.solutions.size() << " solution(s)\n\n";
  for (const auto& sol : res.pool.solutions) {
    const bool inc = sol.id == res.incumbent_id;
    const Json rec = solution_json(sol.result, cfg, p, sol.id, "s" + std::to_string(sol.id), inc,
                                   &sol.lineage);
    out.write(rec);
    text << solution_table(rec) << '\n';
  }
  out.write({{"record", "summary"},
             {"certified", res.certified},
             {"incumbent_id", res.incumbent_id},
             {"incumbent_loglik", res.pool.best().result.loglik},
             {"base_loglik", base.loglik},
             {"rounds", res.rounds.size()},
             {"pool_size", res.pool.solutions.size()}});
  write_text(cfg.output / "search.txt", p.prov, text.str());
  return res.certified ? kExitOk : kExitNotCertified;
}

int cmd_simulate(const RunConfig& cfg) {
  cfg.validate(false);
  if (!cfg.simulate) throw Error(ErrorKind::config, "simulate needs a 'simulate' section");
  const auto& sim = *cfg.simulate;
  const ParameterLayout lay(cfg.model);
  ParameterVector truth = lay.template_parameters();
  std::set<std::string> given;
  for (const auto& [name, v] : sim.truth) {
    const auto i = truth.index_of(name);
    if (!i) throw Error(ErrorKind::config, "true value for unknown parameter '" + name + "'");
    truth.set_value(*i, v);
    given.insert(name);
  }
  for (const auto& e : truth) {
    if (!e.fixed && !given.count(e.name)) {
      throw Error(ErrorKind::config, "simulate.truth is missing '" + e.name + "'");
    }
  }
  SyntheticDesign design;
  design.attributes = sim.attributes;
  design.alternatives = sim.alternatives;
  design.persons = sim.persons;
  design.tasks_per_person = sim.tasks;
  const auto ds = synthesize_dataset(truth, design, cfg.model, sim.seed);
  const fs::path path = cfg.dataset.path.empty() ? cfg.output / "dataset.csv" : cfg.dataset.path;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_dataset(ds, path);

  Provenance prov{"simulate", cfg.to_json(), sha256_file(path)};
  JsonlWriter out(cfg.output / "simulate.jsonl");
  out.write(provenance_record(prov));
  Json t = Json::object();
  for (const auto& e : truth) t[e.name] = e.value;
  out.write({{"record", "simulated"},
             {"dataset", path.generic_string()},
             {"persons", ds.persons()},
             {"observations", ds.observations()},
             {"truth", t}});
  return kExitOk;
}

// ---------------------------------------------------------------- report

namespace {

struct Bundle {
  fs::path dir;
  std::string name;
  Json provenance;
  std::vector<Json> solutions;
  std::vector<fs::path> curves;
};

Bundle read_bundle(const fs::path& in) {
  Bundle b;
  fs::path file;
  if (fs::is_regular_file(in)) {
    file = in;
    b.dir = in.parent_path();
  } else if (fs::is_directory(in)) {
    b.dir = in;
    for (const char* f : {"search.jsonl", "profile.jsonl", "estimate.jsonl"}) {
      if (fs::exists(in / f)) {
        file = in / f;
        break;
      }
    }
  }
  if (file.empty()) throw Error(ErrorKind::io, "no result bundle at '" + in.string() + "'");
  b.name = fs::absolute(b.dir).lexically_normal().filename().string();
  if (b.name.empty()) b.name = "bundle";
  std::ifstream src(file);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(src, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw DataError(ErrorKind::parse, "malformed record in '" + file.string() + "'", lineno);
    }
    const std::string kind = rec.value("record", "");
    if (kind == "provenance") b.provenance = rec;
    if (kind == "solution") b.solutions.push_back(rec);
  }
  if (b.provenance.is_null()) {
    throw Error(ErrorKind::parse, "'" + file.string() + "' has no provenance record");
  }
  for (const auto& e : fs::directory_iterator(b.dir)) {
    const auto fname = e.path().filename().string();
    if (fname.rfind("curves_", 0) == 0 && e.path().extension() == ".csv") b.curves.push_back(e.path());
  }
  std::sort(b.curves.begin(), b.curves.end());
  return b;
}

struct CurveRow {
  std::string param;
  std::string gamma, candidate, ll, converged, improved;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Per-parameter curve files with the reference lines LL_base and LL_base - 1.92.
void write_report_curves(const Bundle& b, const fs::path& out_dir, const Provenance& prov) {
  for (const auto& path : b.curves) {
    std::ifstream in(path);
    std::map<std::string, std::vector<CurveRow>> by_param;
    std::vector<std::string> order;
    std::string line;
    bool header = true;
    double ll_base = std::numeric_limits<double>::quiet_NaN();
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (header) {
        header = false;
        continue;
      }
      const auto c = split_csv(line);
      if (c.size() != 6) throw Error(ErrorKind::parse, "malformed curve row in '" + path.string() + "'");
      if (!by_param.count(c[0])) order.push_back(c[0]);
      by_param[c[0]].push_back({c[0], c[1], c[2], c[3], c[4], c[5]});
      if (std::stod(c[1]) == 0.0) ll_base = std::stod(c[3]);
    }
    for (const auto& param : order) {
      const fs::path file =
          out_dir / "curves" / (b.name + "_" + path.stem().string() + "_" + param + ".csv");
      auto out = open_output(file);
      out << comment_header(prov);
      out << "param,gamma,candidate_value,ll,converged,improved,ll_base,ll_base_minus_1_92\n";
      for (const auto& r : by_param[param]) {
        out << r.param << ',' << r.gamma << ',' << r.candidate << ',' << r.ll << ',' << r.converged
            << ',' << r.improved << ',' << number(ll_base) << ',' << number(ll_base - 1.92) << '\n';
      }
    }
  }
}

std::string interval_cell(double est, double se) {
  char buf[96];
  if (!std::isfinite(se)) {
    std::snprintf(buf, sizeof buf, "%.4f", est);
  } else {
    const auto ci = wald_ci(est, se);
    std::snprintf(buf, sizeof buf, "%.4f [%.4f, %.4f]", est, ci.lower, ci.upper);
  }
  return buf;
}

double json_number(const Json& j, const char* key) {
  return j.contains(key) && j[key].is_number() ? j[key].get<double>()
                                               : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

int cmd_report(const std::vector<fs::path>& inputs, const fs::path& output) {
  if (inputs.empty()) throw Error(ErrorKind::config, "report needs at least one bundle");
  std::vector<Bundle> bundles;
  for (const auto& in : inputs) bundles.push_back(read_bundle(in));
  const Json& model = bundles.front().provenance["config"]["model"];
  std::set<std::string> hashes;
  for (const auto& b : bundles) {
    if (b.provenance["config"]["model"] != model) {
      throw Error(ErrorKind::spec, "bundles are not comparable: '" + b.dir.string() +
                                       "' uses a different model specification");
    }
    hashes.insert(b.provenance.value("dataset_sha256", ""));
  }
  // Bundles from the same directory name get a numeric suffix.
  std::map<std::string, int> seen;
  for (auto& b : bundles) {
    if (seen[b.name]++ > 0) b.name += "_" + std::to_string(seen[b.name]);
  }

  Json bundle_paths = Json::array();
  for (const auto& in : inputs) bundle_paths.push_back(in.generic_string());
  Provenance prov{"report", {{"bundles", bundle_paths}, {"model", model}},
                  hashes.size() == 1 ? *hashes.begin() : "mixed"};

  // Columns: one per solution across bundles.
  struct Column {
    std::string label;
    const Json* sol;
  };
  std::vector<Column> cols;
  for (const auto& b : bundles) {
    for (const auto& s : b.solutions) {
      cols.push_back({b.name + ":" + s["label"].get<std::string>() +
                          (s.value("incumbent", false) ? "*" : ""),
                      &s});
    }
  }

  std::vector<std::string> rows;
  std::vector<std::string> wtp_rows;
  for (const auto& c : cols) {
    for (const auto& p : (*c.sol)["parameters"]) {
      const auto n = p["name"].get<std::string>();
      if (std::find(rows.begin(), rows.end(), n) == rows.end()) rows.push_back(n);
    }
    if (c.sol->contains("wtp")) {
      for (const auto& w : (*c.sol)["wtp"]) {
        const auto q = w["quantity"].get<std::string>();
        if (std::find(wtp_rows.begin(), wtp_rows.end(), q) == wtp_rows.end()) wtp_rows.push_back(q);
      }
    }
  }

  Json table = Json::array();
  std::ostringstream text;
  text << "estimates with 95% Wald intervals (robust SEs; * marks an incumbent)\n";
  char cell[96];
  std::snprintf(cell, sizeof cell, "%-22s", "");
  text << cell;
  for (const auto& c : cols) {
    std::snprintf(cell, sizeof cell, " %34s", c.label.c_str());
    text << cell;
  }
  text << '\n';

  auto emit_row = [&](const std::string& name, const std::string& kind, auto&& lookup) {
    Json row = {{"kind", kind}, {"name", name}, {"values", Json::array()}};
    std::snprintf(cell, sizeof cell, "%-22s", name.c_str());
    text << cell;
    for (const auto& c : cols) {
      const Json* hit = lookup(*c.sol);
      if (!hit) {
        row["values"].push_back(nullptr);
        std::snprintf(cell, sizeof cell, " %34s", "-");
      } else {
        const double est = json_number(*hit, "estimate");
        const double se = json_number(*hit, kind == "parameter" ? "se_robust" : "se");
        Json v = {{"solution", c.label}, {"estimate", est}};
        if (std::isfinite(se)) {
          const auto ci = wald_ci(est, se);
          v["se"] = se;
          v["lower"] = ci.lower;
          v["upper"] = ci.upper;
        }
        row["values"].push_back(v);
        std::snprintf(cell, sizeof cell, " %34s", interval_cell(est, se).c_str());
      }
      text << cell;
    }
    text << '\n';
    table.push_back(row);
  };

  for (const auto& name : rows) {
    emit_row(name, "parameter", [&](const Json& s) -> const Json* {
      for (const auto& p : s["parameters"]) {
        if (p["name"] == name) return &p;
      }
      return nullptr;
    });
  }
  for (const auto& q : wtp_rows) {
    emit_row(q, "wtp", [&](const Json& s) -> const Json* {
      if (!s.contains("wtp")) return nullptr;
      for (const auto& w : s["wtp"]) {
        if (w["quantity"] == q) return &w;
      }
      return nullptr;
    });
  }
  std::snprintf(cell, sizeof cell, "%-22s", "LL");
  text << cell;
  for (const auto& c : cols) {
    std::snprintf(cell, sizeof cell, " %34.4f", (*c.sol)["loglik"].get<double>());
    text << cell;
  }
  text << '\n';

  JsonlWriter out(output / "report.jsonl");
  out.write(provenance_record(prov));
  Json labels = Json::array();
  for (const auto& c : cols) labels.push_back(c.label);
  out.write({{"record", "comparison"}, {"columns", labels}, {"rows", table}});
  write_text(output / "report.txt", prov, text.str());
  for (const auto& b : bundles) write_report_curves(b, output, prov);
  return kExitOk;
}

}  // namespace dcpl::cli
