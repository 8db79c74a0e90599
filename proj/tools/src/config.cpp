#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace dcpl::cli {
namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::config, msg); }

void allow_keys(const Json& obj, const std::string& where, const std::set<std::string>& keys) {
  if (!obj.is_object()) fail("'" + where + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!keys.count(k)) fail("unknown key '" + k + "' in '" + where + "'");
  }
}

template <class T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail("'" + where + "." + key + "' has the wrong type");
  }
}

std::string layout_name(DataLayout l) { return l == DataLayout::wide ? "wide" : "long"; }

DataLayout parse_layout(const std::string& s) {
  if (s == "wide") return DataLayout::wide;
  if (s == "long") return DataLayout::long_format;
  fail("dataset.layout must be 'wide' or 'long', got '" + s + "'");
}

std::string sign_name(LognormalSign s) {
  return s == LognormalSign::positive ? "positive" : "negative";
}

LognormalSign parse_sign(const std::string& s) {
  if (s == "positive") return LognormalSign::positive;
  if (s == "negative") return LognormalSign::negative;
  fail("random coefficient sign must be 'positive' or 'negative', got '" + s + "'");
}

std::map<std::string, double> read_named_values(const Json& obj, const std::string& where) {
  if (!obj.is_object()) fail("'" + where + "' must map parameter names to numbers");
  std::map<std::string, double> out;
  for (const auto& [k, v] : obj.items()) {
    if (!v.is_number()) fail("'" + where + "." + k + "' must be a number");
    out[k] = v.get<double>();
  }
  return out;
}

ModelSpec parse_model(const Json& j) {
  allow_keys(j, "model", {"family", "attributes", "classes", "random", "scale"});
  std::string family = "mnl";
  read(j, "family", family, "model");
  ModelSpec spec;
  spec.family = parse_model_family(family);
  read(j, "attributes", spec.attributes, "model");
  read(j, "classes", spec.classes, "model");
  if (j.contains("random")) {
    if (!j["random"].is_array()) fail("'model.random' must be an array");
    for (const auto& r : j["random"]) {
      allow_keys(r, "model.random[]", {"name", "attribute", "sign"});
      RandomCoefficient rc;
      read(r, "name", rc.name, "model.random[]");
      read(r, "attribute", rc.attribute, "model.random[]");
      std::string sign = "positive";
      read(r, "sign", sign, "model.random[]");
      rc.sign = parse_sign(sign);
      spec.random.push_back(rc);
    }
  }
  read(j, "scale", spec.scale_coefficient, "model");
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(std::string("model: ") + e.what());
  }
  return spec;
}

std::vector<std::string> model_attributes(const ModelSpec& spec) {
  if (spec.family != ModelFamily::mixed_logit_wtp) return spec.attributes;
  std::vector<std::string> out;
  for (const auto& r : spec.random) out.push_back(r.attribute);
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

DatasetSchema DatasetConfig::schema() const {
  DatasetSchema s;
  s.alternatives = alternatives;
  s.choice_column = choice_column;
  s.person_column = person_column;
  s.alternative_column = alternative_column;
  s.layout = layout;
  for (const auto& a : attributes) s.columns.push_back({a, ColumnRole::alternative_attribute});
  for (const auto& c : covariates) s.columns.push_back({c, ColumnRole::person_covariate});
  return s;
}

RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  allow_keys(doc, "config", {"dataset", "model", "start", "fixed", "optimizer", "draws",
                             "profile", "dedup", "wtp", "workers", "output", "simulate"});
  RunConfig cfg;
  if (!doc.contains("model")) fail("config needs a 'model' section");
  cfg.model = parse_model(doc["model"]);

  if (doc.contains("dataset")) {
    const auto& d = doc["dataset"];
    allow_keys(d, "dataset", {"path", "layout", "alternatives", "attributes", "covariates",
                              "choice_column", "person_column", "alternative_column"});
    std::string path;
    read(d, "path", path, "dataset");
    cfg.dataset.path = resolve(path, base_dir);
    std::string layout = "wide";
    read(d, "layout", layout, "dataset");
    cfg.dataset.layout = parse_layout(layout);
    read(d, "alternatives", cfg.dataset.alternatives, "dataset");
    read(d, "attributes", cfg.dataset.attributes, "dataset");
    read(d, "covariates", cfg.dataset.covariates, "dataset");
    read(d, "choice_column", cfg.dataset.choice_column, "dataset");
    read(d, "person_column", cfg.dataset.person_column, "dataset");
    read(d, "alternative_column", cfg.dataset.alternative_column, "dataset");
  }
  if (cfg.dataset.attributes.empty()) cfg.dataset.attributes = model_attributes(cfg.model);

  if (doc.contains("start")) cfg.start = read_named_values(doc["start"], "start");
  if (doc.contains("fixed")) cfg.fixed = read_named_values(doc["fixed"], "fixed");

  if (doc.contains("optimizer")) {
    const auto& o = doc["optimizer"];
    allow_keys(o, "optimizer", {"g_tol", "f_tol", "max_iterations", "divergence_bound"});
    read(o, "g_tol", cfg.optimizer.g_tol, "optimizer");
    read(o, "f_tol", cfg.optimizer.f_tol, "optimizer");
    read(o, "max_iterations", cfg.optimizer.max_iterations, "optimizer");
    read(o, "divergence_bound", cfg.optimizer.divergence_bound, "optimizer");
  }

  if (doc.contains("draws")) {
    const auto& d = doc["draws"];
    allow_keys(d, "draws", {"per_person", "skip", "antithetic", "seed"});
    read(d, "per_person", cfg.draws.draws_per_person, "draws");
    read(d, "skip", cfg.draws.skip, "draws");
    read(d, "antithetic", cfg.draws.antithetic, "draws");
    if (d.contains("seed") && !d["seed"].is_null()) {
      std::uint64_t seed = 0;
      read(d, "seed", seed, "draws");
      cfg.draws.shift_seed = seed;
    }
  }
  cfg.draws.dimensions = std::max<std::size_t>(1, cfg.model.random.size());

  auto& prof = cfg.search.profile;
  if (doc.contains("profile")) {
    const auto& p = doc["profile"];
    allow_keys(p, "profile", {"gamma_a", "gamma_b", "points", "se_variant", "mode",
                              "round_budget", "improvement_tol"});
    read(p, "gamma_a", prof.gamma_a, "profile");
    read(p, "gamma_b", prof.gamma_b, "profile");
    read(p, "points", prof.points, "profile");
    std::string variant = to_string(prof.se_variant);
    read(p, "se_variant", variant, "profile");
    prof.se_variant = parse_covariance_variant(variant);
    std::string mode = to_string(cfg.search.mode);
    read(p, "mode", mode, "profile");
    try {
      cfg.search.mode = parse_search_mode(mode);
    } catch (const Error& e) {
      fail(e.what());
    }
    read(p, "round_budget", cfg.search.round_budget, "profile");
    read(p, "improvement_tol", prof.improvement_tol, "profile");
  }
  if (doc.contains("dedup")) {
    const auto& d = doc["dedup"];
    allow_keys(d, "dedup", {"loglik", "beta"});
    read(d, "loglik", cfg.search.dedup.loglik, "dedup");
    read(d, "beta", cfg.search.dedup.beta, "dedup");
  }

  if (doc.contains("wtp")) {
    if (!doc["wtp"].is_array()) fail("'wtp' must be an array");
    for (const auto& w : doc["wtp"]) {
      allow_keys(w, "wtp[]", {"name", "attribute", "cost", "multiplier", "unit"});
      WtpDefinition def;
      read(w, "name", def.name, "wtp[]");
      read(w, "attribute", def.attribute, "wtp[]");
      read(w, "cost", def.cost, "wtp[]");
      read(w, "multiplier", def.multiplier, "wtp[]");
      read(w, "unit", def.unit, "wtp[]");
      cfg.wtp.push_back(def);
    }
  }

  read(doc, "workers", cfg.workers, "config");
  std::string output = cfg.output.string();
  read(doc, "output", output, "config");
  cfg.output = resolve(output, base_dir);

  if (doc.contains("simulate")) {
    const auto& s = doc["simulate"];
    allow_keys(s, "simulate", {"attributes", "persons", "tasks", "alternatives", "seed", "truth"});
    SimulateConfig sim;
    if (s.contains("attributes")) {
      if (!s["attributes"].is_array()) fail("'simulate.attributes' must be an array");
      for (const auto& a : s["attributes"]) {
        allow_keys(a, "simulate.attributes[]", {"name", "low", "high"});
        AttributeRange r;
        read(a, "name", r.name, "simulate.attributes[]");
        read(a, "low", r.low, "simulate.attributes[]");
        read(a, "high", r.high, "simulate.attributes[]");
        sim.attributes.push_back(r);
      }
    }
    read(s, "persons", sim.persons, "simulate");
    read(s, "tasks", sim.tasks, "simulate");
    read(s, "alternatives", sim.alternatives, "simulate");
    read(s, "seed", sim.seed, "simulate");
    if (s.contains("truth")) sim.truth = read_named_values(s["truth"], "simulate.truth");
    cfg.simulate = sim;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    fail("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.data) cfg.dataset.path = *o.data;
  if (o.output) cfg.output = *o.output;
  if (o.workers) cfg.workers = *o.workers;
  if (o.mode) {
    try {
      cfg.search.mode = parse_search_mode(*o.mode);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (o.points) cfg.search.profile.points = *o.points;
  if (o.gamma_a) cfg.search.profile.gamma_a = *o.gamma_a;
  if (o.gamma_b) cfg.search.profile.gamma_b = *o.gamma_b;
  if (o.se_variant) cfg.search.profile.se_variant = parse_covariance_variant(*o.se_variant);
  if (o.round_budget) cfg.search.round_budget = *o.round_budget;
  if (o.draws) cfg.draws.draws_per_person = *o.draws;
  if (o.seed) cfg.draws.shift_seed = *o.seed;
  if (o.antithetic) cfg.draws.antithetic = *o.antithetic;
}

void RunConfig::validate(bool need_dataset) const {
  const auto& p = search.profile;
  if (!(std::isfinite(p.gamma_a) && std::isfinite(p.gamma_b) && p.gamma_a < p.gamma_b)) {
    fail("profile needs finite gamma_a < gamma_b");
  }
  if (p.points < 3) fail("profile.points must be at least 3");
  if (!(p.improvement_tol >= 0.0)) fail("profile.improvement_tol must be non-negative");
  if (search.round_budget < 1) fail("profile.round_budget must be at least 1");
  if (!(search.dedup.loglik > 0.0 && search.dedup.beta > 0.0)) {
    fail("dedup tolerances must be positive");
  }
  if (!(optimizer.g_tol > 0.0 && optimizer.f_tol > 0.0)) fail("optimizer tolerances must be positive");
  if (optimizer.max_iterations < 1) fail("optimizer.max_iterations must be at least 1");
  if (!(optimizer.divergence_bound > 0.0)) fail("optimizer.divergence_bound must be positive");
  if (workers < 1 || workers > 1024) fail("workers must be between 1 and 1024");
  if (dataset.alternatives < 2) fail("dataset.alternatives must be at least 2");
  if (model.family == ModelFamily::mixed_logit_wtp) {
    try {
      draws.validate();
    } catch (const Error& e) {
      fail(std::string("draws: ") + e.what());
    }
  }
  for (const auto& w : wtp) {
    if (w.name.empty() || w.attribute.empty()) fail("every wtp entry needs a name and an attribute");
    if (!std::isfinite(w.multiplier) || w.multiplier == 0.0) fail("wtp multiplier must be finite and nonzero");
  }
  if (need_dataset) {
    if (dataset.path.empty()) fail("no dataset path given (dataset.path or --data)");
    if (!std::filesystem::exists(dataset.path)) {
      throw Error(ErrorKind::io, "dataset '" + dataset.path.string() + "' does not exist");
    }
  }
}

Json RunConfig::to_json() const {
  Json j;
  j["dataset"] = {{"path", dataset.path.generic_string()},
                  {"layout", layout_name(dataset.layout)},
                  {"alternatives", dataset.alternatives},
                  {"attributes", dataset.attributes},
                  {"covariates", dataset.covariates},
                  {"choice_column", dataset.choice_column},
                  {"person_column", dataset.person_column},
                  {"alternative_column", dataset.alternative_column}};
  Json m;
  m["family"] = dcpl::to_string(model.family);
  if (model.family != ModelFamily::mixed_logit_wtp) m["attributes"] = model.attributes;
  if (model.family == ModelFamily::latent_class) m["classes"] = model.classes;
  if (model.family == ModelFamily::mixed_logit_wtp) {
    Json r = Json::array();
    for (const auto& rc : model.random) {
      r.push_back({{"name", rc.name}, {"attribute", rc.attribute}, {"sign", sign_name(rc.sign)}});
    }
    m["random"] = r;
    m["scale"] = model.scale_coefficient;
  }
  j["model"] = m;
  j["start"] = Json::object();
  for (const auto& [k, v] : start) j["start"][k] = v;
  j["fixed"] = Json::object();
  for (const auto& [k, v] : fixed) j["fixed"][k] = v;
  j["optimizer"] = {{"g_tol", optimizer.g_tol},
                    {"f_tol", optimizer.f_tol},
                    {"max_iterations", optimizer.max_iterations},
                    {"divergence_bound", optimizer.divergence_bound}};
  j["draws"] = {{"per_person", draws.draws_per_person},
                {"skip", draws.skip},
                {"antithetic", draws.antithetic},
                {"seed", draws.shift_seed ? Json(*draws.shift_seed) : Json(nullptr)}};
  const auto& p = search.profile;
  j["profile"] = {{"gamma_a", p.gamma_a},
                  {"gamma_b", p.gamma_b},
                  {"points", p.points},
                  {"se_variant", dcpl::to_string(p.se_variant)},
                  {"mode", dcpl::to_string(search.mode)},
                  {"round_budget", search.round_budget},
                  {"improvement_tol", p.improvement_tol}};
  j["dedup"] = {{"loglik", search.dedup.loglik}, {"beta", search.dedup.beta}};
  Json w = Json::array();
  for (const auto& d : wtp) {
    w.push_back({{"name", d.name},
                 {"attribute", d.attribute},
                 {"cost", d.cost},
                 {"multiplier", d.multiplier},
                 {"unit", d.unit}});
  }
  j["wtp"] = w;
  j["workers"] = workers;
  j["output"] = output.generic_string();
  if (simulate) {
    Json a = Json::array();
    for (const auto& r : simulate->attributes) {
      a.push_back({{"name", r.name}, {"low", r.low}, {"high", r.high}});
    }
    Json truth = Json::object();
    for (const auto& [k, v] : simulate->truth) truth[k] = v;
    j["simulate"] = {{"attributes", a},
                     {"persons", simulate->persons},
                     {"tasks", simulate->tasks},
                     {"alternatives", simulate->alternatives},
                     {"seed", simulate->seed},
                     {"truth", truth}};
  }
  return j;
}

}  // namespace dcpl::cli
