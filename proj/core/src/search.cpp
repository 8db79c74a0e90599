#include <algorithm>
#include <cmath>

#include "dcpl/errors.hpp"
#include "dcpl/profile.hpp"

namespace dcpl {

std::string to_string(SearchMode mode) {
  return mode == SearchMode::exhaustive ? "exhaustive" : "pragmatic";
}

SearchMode parse_search_mode(const std::string& text) {
  if (text == "exhaustive") return SearchMode::exhaustive;
  if (text == "pragmatic") return SearchMode::pragmatic;
  throw Error(ErrorKind::config, "unknown search mode '" + text + "'");
}

// ---------------------------------------------------------------- pool

const Solution& SolutionPool::best() const {
  if (solutions.empty()) throw Error(ErrorKind::contract, "solution pool is empty");
  return solutions.front();
}

const Solution* SolutionPool::find(std::size_t id) const {
  for (const auto& s : solutions) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Solution* SolutionPool::find(std::size_t id) {
  for (auto& s : solutions) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

PoolCandidate make_candidate(EstimationResult result, const ModelSpec& spec, Lineage lineage,
                             bool antithetic_draws) {
  CanonicalForm cf = canonicalize(result.estimates, spec, antithetic_draws);
  PoolCandidate c;
  c.lineage = std::move(lineage);
  c.label_only_canonical = cf.label_only;
  if (cf.changed && !cf.label_only) {
    // Exact symmetry: adopt the relabeled estimate. Curvature information
    // refers to the old labels and is dropped.
    result.estimates = cf.params;
    result.hessian.reset();
    result.covariance.reset();
    result.diagnostics.reset();
  }
  c.canonical = std::move(cf.params);
  c.result = std::move(result);
  return c;
}

bool same_solution(const ParameterVector& a, double ll_a, const ParameterVector& b, double ll_b,
                   const DedupTolerance& tol) {
  if (!(std::abs(ll_a - ll_b) < tol.loglik)) return false;
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double scale = std::max(1.0, std::abs(b[k].value));
    if (!(std::abs(a[k].value - b[k].value) / scale < tol.beta)) return false;
  }
  return true;
}

std::vector<std::size_t> dedup_solutions(std::vector<PoolCandidate> candidates,
                                         SolutionPool& pool) {
  std::vector<std::size_t> added;
  for (auto& c : candidates) {
    Solution* match = nullptr;
    for (auto& s : pool.solutions) {
      if (same_solution(c.canonical, c.result.loglik, s.canonical, s.result.loglik, pool.tol)) {
        match = &s;
        break;
      }
    }
    if (match) {
      match->lineage.push_back(std::move(c.lineage));
      continue;
    }
    Solution s;
    s.id = pool.next_id++;
    s.result = std::move(c.result);
    s.canonical = std::move(c.canonical);
    s.lineage.push_back(std::move(c.lineage));
    s.label_only_canonical = c.label_only_canonical;
    added.push_back(s.id);
    pool.solutions.push_back(std::move(s));
  }
  std::stable_sort(pool.solutions.begin(), pool.solutions.end(),
                   [](const Solution& a, const Solution& b) {
                     return a.result.loglik > b.result.loglik;
                   });
  return added;
}

// ---------------------------------------------------------------- search

namespace {

void ensure_inference(EstimationResult& r, const ChoiceModel& model) {
  if (r.covariance && r.diagnostics) return;
  try {
    attach_inference(r, model);
  } catch (const Error&) {
    // Leaves the member without curvature information; its grid rows are
    // skipped when it is profiled.
  }
}

}  // namespace

SearchResult iterate_search(const ChoiceModel& model, const EstimationResult& base,
                            const SearchSettings& settings) {
  if (!base.converged()) {
    throw Error(ErrorKind::contract, "search requires a converged base estimate");
  }
  if (settings.round_budget == 0) throw Error(ErrorKind::config, "round budget must be >= 1");
  const ModelSpec& spec = model.spec();
  SearchResult out;
  out.pool.tol = settings.dedup;
  dedup_solutions({make_candidate(base, spec, {}, settings.antithetic_draws)}, out.pool);
  ensure_inference(out.pool.solutions.front().result, model);

  for (std::size_t round = 1; round <= settings.round_budget; ++round) {
    SearchRound rec;
    rec.round = round;
    rec.incumbent_before = out.pool.best().result.loglik;

    std::vector<std::size_t> targets;
    for (const auto& s : out.pool.solutions) {
      if (s.visited) continue;
      targets.push_back(s.id);
      if (settings.mode == SearchMode::pragmatic) break;
    }
    if (targets.empty()) {
      rec.incumbent_after = rec.incumbent_before;
      out.rounds.push_back(std::move(rec));
      out.certified = true;
      break;
    }

    std::vector<PoolCandidate> candidates;
    for (std::size_t id : targets) {
      Solution& target = *out.pool.find(id);
      target.visited = true;
      ProfiledSolution ps;
      ps.solution_id = id;
      ps.loglik = target.result.loglik;
      ps.run = run_profile(model, target.result, settings.profile);

      std::vector<const ConstrainedFit*> improving;
      for (const auto& f : ps.run.fits) {
        if (f.improved) improving.push_back(&f);
      }
      rec.improvements += improving.size();
      const auto refined = refine_solutions(model, improving, settings.profile);
      for (const auto& r : refined) {
        if (!r.ok) {
          ++ps.refine_failures;
          continue;
        }
        ++ps.refined;
        Lineage lineage = target.lineage.empty() ? Lineage{} : target.lineage.front();
        lineage.push_back({round, id, r.source->parameter, r.source->m, r.source->gamma});
        candidates.push_back(
            make_candidate(r.result, spec, std::move(lineage), settings.antithetic_draws));
      }
      rec.profiled.push_back(std::move(ps));
    }

    rec.new_solutions = dedup_solutions(std::move(candidates), out.pool);
    for (std::size_t id : rec.new_solutions) ensure_inference(out.pool.find(id)->result, model);
    rec.incumbent_after = out.pool.best().result.loglik;
    rec.improved_incumbent =
        rec.incumbent_after > rec.incumbent_before + settings.profile.improvement_tol;
    out.rounds.push_back(std::move(rec));
    if (!out.rounds.back().improved_incumbent) {
      out.certified = true;
      break;
    }
  }
  out.incumbent_id = out.pool.best().id;
  return out;
}

}  // namespace dcpl
