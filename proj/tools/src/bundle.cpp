#include "bundle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

namespace dcpl::cli {
namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double value_or_nan(const Json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

std::string fixed(double v, int width, int prec) {
  if (!std::isfinite(v)) return std::string(static_cast<std::size_t>(std::max(width - 1, 0)), ' ') + "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, prec, v);
  return buf;
}

Json covariance_json(const CovarianceEstimate& c) {
  Json j = {{"available", c.available}, {"rcond", num(c.rcond)}};
  if (!c.issue.empty()) j["issue"] = c.issue;
  return j;
}

}  // namespace

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Json provenance_record(const Provenance& p) {
  return {{"record", "provenance"},
          {"tool", "dcpl"},
          {"version", kToolVersion},
          {"command", p.command},
          {"dataset_sha256", p.dataset_sha256},
          {"config", p.config}};
}

std::string comment_header(const Provenance& p) {
  return "# dcpl " + std::string(kToolVersion) + " " + p.command + "\n# dataset_sha256: " +
         p.dataset_sha256 + "\n# config: " + p.config.dump() + "\n";
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  return out;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : out_(open_output(path)) {}

void JsonlWriter::write(const Json& record) {
  out_ << record.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
  if (!out_) throw Error(ErrorKind::io, "write failed");
}

Json solution_record(const SolutionView& s, const ModelSpec& spec,
                     const std::vector<WtpDefinition>& wtp, std::size_t observations) {
  const EstimationResult& r = *s.result;
  Json j;
  j["record"] = "solution";
  j["id"] = s.id;
  j["label"] = s.label;
  j["incumbent"] = s.incumbent;
  j["loglik"] = r.loglik;
  const double k = static_cast<double>(r.estimates.free_count());
  j["free_parameters"] = r.estimates.free_count();
  j["observations"] = observations;
  j["bic"] = bic(r.loglik, k, static_cast<double>(observations));
  j["convergence"] = {{"status", to_string(r.convergence.status)},
                      {"converged", r.converged()},
                      {"iterations", r.convergence.iterations},
                      {"evaluations", r.convergence.evaluations},
                      {"gradient_max_norm", num(r.convergence.gradient_max_norm)}};

  const CovarianceSet* cov = r.covariance ? &*r.covariance : nullptr;
  Json params = Json::array();
  std::size_t free_pos = 0;
  for (const auto& p : r.estimates) {
    Json e = {{"name", p.name}, {"estimate", p.value}, {"fixed", p.fixed}};
    if (!p.fixed && cov) {
      const auto idx = static_cast<Eigen::Index>(free_pos);
      for (const auto v : {CovarianceVariant::classical, CovarianceVariant::robust,
                           CovarianceVariant::bhhh}) {
        const auto& c = cov->get(v);
        const double se = c.available ? c.se[idx] : std::numeric_limits<double>::quiet_NaN();
        e["se_" + to_string(v)] = num(se);
        e["t_" + to_string(v)] = num(p.value / se);
      }
    }
    if (!p.fixed) ++free_pos;
    params.push_back(e);
  }
  j["parameters"] = params;

  if (cov) {
    j["covariance"] = {{"classical", covariance_json(cov->classical)},
                       {"robust", covariance_json(cov->robust)},
                       {"bhhh", covariance_json(cov->bhhh)}};
  }
  if (r.diagnostics) {
    const auto& d = *r.diagnostics;
    Json ev = Json::array();
    for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) ev.push_back(d.eigenvalues[i]);
    j["hessian"] = {{"max_eigenvalue", d.max_eigenvalue},
                    {"rcond", d.rcond},
                    {"negative_definite", d.negative_definite},
                    {"ill_conditioned", d.ill_conditioned},
                    {"eigenvalues", ev}};
  }

  // Valuations use robust standard errors when they exist.
  Eigen::MatrixXd V;
  std::string variant = "none";
  if (cov && cov->robust.available) {
    V = cov->robust.matrix;
    variant = "robust";
  } else if (cov && cov->classical.available) {
    V = cov->classical.matrix;
    variant = "classical";
  }
  if (!wtp.empty() || spec.family != ModelFamily::mnl) {
    Json w = Json::array();
    try {
      const auto rep = wtp_report(spec, r.estimates, V, wtp);
      for (const auto& e : rep.entries) {
        w.push_back({{"quantity", e.quantity},
                     {"estimate", num(e.estimate)},
                     {"se", num(e.se)},
                     {"t_ratio", num(e.t_ratio)},
                     {"unit", e.unit}});
      }
      if (!rep.note.empty()) j["wtp_note"] = rep.note;
    } catch (const Error& e) {
      j["wtp_error"] = e.what();
    }
    j["wtp"] = w;
    j["wtp_se_variant"] = variant;
  }

  if (s.lineage) {
    Json lin = Json::array();
    for (const auto& path : *s.lineage) {
      Json steps = Json::array();
      for (const auto& st : path) {
        steps.push_back({{"round", st.round},
                         {"from_solution", st.from_solution},
                         {"parameter", st.parameter},
                         {"m", st.m},
                         {"gamma", st.gamma}});
      }
      lin.push_back(steps);
    }
    j["lineage"] = lin;
  }
  return j;
}

std::string solution_table(const Json& s) {
  std::ostringstream out;
  out << "solution " << s["label"].get<std::string>() << " (id " << s["id"].get<std::size_t>()
      << (s["incumbent"].get<bool>() ? ", incumbent" : "") << ")\n";
  out << "  LL " << fixed(s["loglik"].get<double>(), 0, 4) << "   K "
      << s["free_parameters"].get<std::size_t>() << "   N " << s["observations"].get<std::size_t>()
      << "   BIC " << fixed(s["bic"].get<double>(), 0, 2) << "   "
      << s["convergence"]["status"].get<std::string>() << "\n";
  if (s.contains("hessian")) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  max eigenvalue %.4g   rcond %.4g%s\n",
                  s["hessian"]["max_eigenvalue"].get<double>(), s["hessian"]["rcond"].get<double>(),
                  s["hessian"]["negative_definite"].get<bool>() ? "" : "   NOT negative definite");
    out << buf;
  }
  char head[200];
  std::snprintf(head, sizeof head, "  %-14s %12s %10s %10s %10s %9s %9s %9s\n", "parameter",
                "estimate", "se(class)", "se(rob)", "se(bhhh)", "t(class)", "t(rob)", "t(bhhh)");
  out << head;
  for (const auto& p : s["parameters"]) {
    out << "  ";
    char name[32];
    std::snprintf(name, sizeof name, "%-14s", p["name"].get<std::string>().c_str());
    out << name << ' ' << fixed(p["estimate"].get<double>(), 12, 5);
    if (p["fixed"].get<bool>()) {
      out << "   (fixed)\n";
      continue;
    }
    for (const char* k : {"se_classical", "se_robust", "se_bhhh"}) {
      out << ' ' << fixed(value_or_nan(p.value(k, Json())), 10, 5);
    }
    for (const char* k : {"t_classical", "t_robust", "t_bhhh"}) {
      out << ' ' << fixed(value_or_nan(p.value(k, Json())), 9, 2);
    }
    out << '\n';
  }
  if (s.contains("wtp") && !s["wtp"].empty()) {
    out << "  valuations (" << s["wtp_se_variant"].get<std::string>() << " delta-method SEs)\n";
    for (const auto& w : s["wtp"]) {
      char line[200];
      std::snprintf(line, sizeof line, "  %-22s %12s %10s %9s  %s\n",
                    w["quantity"].get<std::string>().c_str(),
                    fixed(value_or_nan(w["estimate"]), 0, 4).c_str(),
                    fixed(value_or_nan(w["se"]), 0, 4).c_str(),
                    fixed(value_or_nan(w["t_ratio"]), 0, 2).c_str(),
                    w["unit"].get<std::string>().c_str());
      out << line;
    }
  }
  if (s.contains("wtp_note")) out << "  note: " << s["wtp_note"].get<std::string>() << '\n';
  return out.str();
}

void write_curve_csv(const std::filesystem::path& path, const Provenance& prov,
                     const ProfileRun& run) {
  auto out = open_output(path);
  out << comment_header(prov);
  out << "param,gamma,candidate_value,ll,converged,improved\n";
  for (const auto& f : run.fits) {
    out << f.parameter << ',' << number(f.gamma) << ',' << number(f.candidate) << ','
        << number(f.failed ? std::numeric_limits<double>::quiet_NaN() : f.loglik) << ','
        << (f.converged ? 1 : 0) << ',' << (f.improved ? 1 : 0) << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

Json profile_summary_record(const ProfileRun& run) {
  Json params = Json::array();
  for (const auto& p : run.report.parameters) {
    Json e = {{"parameter", p.parameter}, {"skipped", p.skipped}};
    if (!p.skipped) {
      e["improvements"] = p.improvements;
      e["failures"] = p.failures;
      e["monotone"] = p.monotone;
      e["drop_at_minus_1_96"] = num(p.drop_lower);
      e["drop_at_plus_1_96"] = num(p.drop_upper);
      e["asymptotic_ok"] = p.asymptotic_ok;
      e["profile_ci"] = {{"lower", num(p.interval.lower)},
                         {"upper", num(p.interval.upper)},
                         {"lower_open", p.interval.lower_open},
                         {"upper_open", p.interval.upper_open},
                         {"multimodal", p.interval.multimodal}};
    }
    params.push_back(e);
  }
  Json improved = Json::array();
  for (const auto& f : run.fits) {
    if (f.improved) {
      improved.push_back({{"parameter", f.parameter},
                          {"m", f.m},
                          {"gamma", f.gamma},
                          {"candidate_value", f.candidate},
                          {"ll", f.loglik},
                          {"gain", f.loglik - run.report.base_loglik}});
    }
  }
  return {{"record", "profile"},
          {"base_loglik", run.report.base_loglik},
          {"se_variant", to_string(run.grid.se_variant)},
          {"gamma", run.grid.gamma},
          {"cells", run.report.cells},
          {"estimations", run.report.estimations},
          {"improvements", run.report.improvements},
          {"failures", run.report.failures},
          {"skipped_cells", run.report.skipped_cells},
          {"parameters", params},
          {"improved_cells", improved}};
}

}  // namespace dcpl::cli
