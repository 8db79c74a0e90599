#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dcpl/inference.hpp"
#include "dcpl/models.hpp"
#include "dcpl/optimize.hpp"
#include "dcpl/parameters.hpp"

namespace dcpl {

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

// ---------------------------------------------------------------- grid

struct GridRow {
  std::string parameter;
  std::size_t index = 0;       // position in the full parameter vector
  double estimate = 0.0;
  double se = 0.0;
  bool skipped = false;        // no usable standard error
  std::string warning;
  std::vector<double> candidates;  // one per gamma
};

struct ProfileGrid {
  std::vector<double> gamma;
  CovarianceVariant se_variant = CovarianceVariant::robust;
  std::size_t zero_index = kNoIndex;  // gamma exactly 0, if present
  std::vector<GridRow> rows;          // one per free parameter
};

// gamma_m = ((M-1-m) gamma_a + m gamma_b) / (M-1); candidates b_k + gamma_m se_k.
// `base` must carry a covariance set.
ProfileGrid build_candidate_grid(const EstimationResult& base, double gamma_a, double gamma_b,
                                 std::size_t points,
                                 CovarianceVariant se_variant = CovarianceVariant::robust);

// ---------------------------------------------------------------- profile pass

struct ProfileSettings {
  double gamma_a = -4.0;
  double gamma_b = 4.0;
  std::size_t points = 51;
  CovarianceVariant se_variant = CovarianceVariant::robust;
  double improvement_tol = 1e-6;  // improvement means LL > LL_base + tol
  OptimizerSettings optimizer;
  std::size_t workers = 1;
};

struct ConstrainedFit {
  std::size_t row = 0;          // grid row k
  std::size_t m = 0;            // grid column
  std::string parameter;
  double gamma = 0.0;
  double candidate = 0.0;
  bool noop = false;            // gamma = 0: the base solution, no estimation
  bool failed = false;          // optimizer raised; see error
  std::string error;
  EstimationResult result;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  bool improved = false;
};

struct ParameterProfileSummary {
  std::string parameter;
  bool skipped = false;
  std::size_t improvements = 0;
  std::size_t failures = 0;
  bool monotone = true;  // LL non-increasing moving away from gamma = 0
  // LL_base - LL_PL interpolated at gamma = -1.96 / +1.96 (NaN if not covered).
  double drop_lower = std::numeric_limits<double>::quiet_NaN();
  double drop_upper = std::numeric_limits<double>::quiet_NaN();
  bool asymptotic_ok = false;  // both drops within 1.92 +- 0.15
  ProfileInterval interval;    // 95% profile-likelihood interval
};

struct ProfileReport {
  double base_loglik = 0.0;
  std::size_t cells = 0;         // K * M, skipped rows included
  std::size_t estimations = 0;   // constrained fits actually run
  std::size_t improvements = 0;
  std::size_t failures = 0;
  std::size_t skipped_cells = 0;
  std::vector<ParameterProfileSummary> parameters;
};

struct ProfileRun {
  ProfileGrid grid;
  ProfileReport report;
  std::vector<ConstrainedFit> fits;  // row-major over (k, m); skipped rows omitted
};

ProfileRun run_profile(const ChoiceModel& model, const EstimationResult& base,
                       const ProfileGrid& grid, const ProfileSettings& settings = {});

// Convenience: grid from settings, then run_profile.
ProfileRun run_profile(const ChoiceModel& model, const EstimationResult& base,
                       const ProfileSettings& settings = {});

// ---------------------------------------------------------------- refinement

struct RefinedSolution {
  const ConstrainedFit* source = nullptr;
  EstimationResult result;
  bool ok = false;
  std::string error;
};

// Unconstrained re-estimation from each constrained optimum: the profiled
// entry is released, every other fixed entry stays fixed.
std::vector<RefinedSolution> refine_solutions(const ChoiceModel& model,
                                              const std::vector<const ConstrainedFit*>& fits,
                                              const ProfileSettings& settings = {});

// ---------------------------------------------------------------- canonical form

struct CanonicalForm {
  ParameterVector params;
  bool changed = false;
  // True when the relabeling is not an exact likelihood symmetry (mixed logit
  // sign flips without antithetic draws).
  bool label_only = false;
};

// LC: classes sorted by descending share (ties: first coefficient ascending),
// constants re-expressed against the last class. Mixed logit: each Cholesky
// column with a negative diagonal entry is negated. MNL: identity.
CanonicalForm canonicalize(const ParameterVector& params, const ModelSpec& spec,
                           bool antithetic_draws = false);

// ---------------------------------------------------------------- pool

struct LineageStep {
  std::size_t round = 0;
  std::size_t from_solution = 0;  // pool id of the profiled solution
  std::string parameter;
  std::size_t m = 0;
  double gamma = 0.0;
};
using Lineage = std::vector<LineageStep>;

// A pool member. `result` holds the canonical parameters whenever the
// canonical map is an exact symmetry; for label-only maps the estimate is
// kept as found and only `canonical` is relabeled.
struct Solution {
  std::size_t id = 0;
  EstimationResult result;
  ParameterVector canonical;  // used for duplicate detection
  std::vector<Lineage> lineage;  // first entry: how it was first found
  bool label_only_canonical = false;
  bool visited = false;          // already profiled
};

struct DedupTolerance {
  double loglik = 1e-4;
  double beta = 1e-3;  // relative to max(1, |b|)
};

struct SolutionPool {
  std::vector<Solution> solutions;  // descending LL
  DedupTolerance tol;
  std::size_t next_id = 0;

  const Solution& best() const;
  const Solution* find(std::size_t id) const;
  Solution* find(std::size_t id);
};

struct PoolCandidate {
  EstimationResult result;
  ParameterVector canonical;
  Lineage lineage;
  bool label_only_canonical = false;
};

// Builds a candidate from an estimate: canonicalizes it and, when the map is
// an exact symmetry, stores the canonical parameters in the result.
PoolCandidate make_candidate(EstimationResult result, const ModelSpec& spec, Lineage lineage,
                             bool antithetic_draws = false);

// |LL_a - LL_b| < tol.loglik and max_k |a_k - b_k| / max(1, |b_k|) < tol.beta.
bool same_solution(const ParameterVector& a, double ll_a, const ParameterVector& b, double ll_b,
                   const DedupTolerance& tol);

// Adds candidates in order: a candidate matching an existing member merges
// its lineage into that member; otherwise it joins as a new member. The pool
// is re-sorted by descending LL (stable). Returns ids of new members.
std::vector<std::size_t> dedup_solutions(std::vector<PoolCandidate> candidates,
                                         SolutionPool& pool);

// ---------------------------------------------------------------- search

enum class SearchMode { exhaustive, pragmatic };
std::string to_string(SearchMode mode);
SearchMode parse_search_mode(const std::string& text);

struct SearchSettings {
  ProfileSettings profile;
  SearchMode mode = SearchMode::exhaustive;
  std::size_t round_budget = 5;
  DedupTolerance dedup;
  bool antithetic_draws = false;  // makes mixed logit sign flips exact
};

struct ProfiledSolution {
  std::size_t solution_id = 0;
  double loglik = 0.0;
  ProfileRun run;
  std::size_t refined = 0;
  std::size_t refine_failures = 0;
};

struct SearchRound {
  std::size_t round = 0;
  double incumbent_before = 0.0;
  double incumbent_after = 0.0;
  std::vector<ProfiledSolution> profiled;
  std::size_t improvements = 0;
  std::vector<std::size_t> new_solutions;
  bool improved_incumbent = false;
};

struct SearchResult {
  SolutionPool pool;
  std::vector<SearchRound> rounds;
  bool certified = false;  // stopped because a round found nothing better
  std::size_t incumbent_id = 0;
};

// `base` must be converged. Every pool member gets a Hessian, covariance set
// and eigen diagnostics.
SearchResult iterate_search(const ChoiceModel& model, const EstimationResult& base,
                            const SearchSettings& settings = {});

}  // namespace dcpl
