#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "survadv/ehr.hpp"
#include "survadv/ontology.hpp"
#include "survadv/similarity.hpp"
#include "survadv/survival_model.hpp"

namespace survadv {

enum class Direction { increase, decrease };
enum class Termination { target_reached, candidates_exhausted, similarity_break };
enum class PopulationOrder { desc_true_time, asc_true_time };

const char* to_string(Direction d);
const char* to_string(Termination t);

struct AttackConfig {
    double lambda = 5.0;          // composite-score exponent; 0 disables the
                                  // similarity term (saliency-only ordering)
    double theta = 0.90;          // similarity threshold
    double cooccurrence_p = 0.75; // synonym-selection threshold
    bool break_on_breach = true;  // stop the attack at a similarity breach
    PopulationOrder order = PopulationOrder::desc_true_time;
    double epsilon_margin = 1e-6; // floor margin for bounded decrease attacks
    std::uint64_t seed = 0;
    // Per-patient cap on kept actions; unset means unlimited. Used to match
    // budgets across attackers when comparing them.
    std::optional<std::size_t> max_kept_actions;

    void validate() const;
};

// Shared read-only context for attack workers.
struct AttackContext {
    const SurvivalModel& victim;
    const RecordEncoder& encoder;
    const std::map<CodeId, SynonymSet>& synonyms;
};

// One scored candidate from the scoring pass. saliency and similarity are
// measured against the original record; score = saliency * exp(lambda * SI).
struct ScoredAction {
    AdversarialAction action;
    double saliency = 0.0;
    double similarity = 0.0;
    double score = 0.0;
    int direction_sign = 1;

    double signed_score() const { return direction_sign * score; }
};

// Applied-and-decided action, kept or reversed; reversed entries exist so
// the action log reflects the attack faithfully.
struct ActionLogEntry {
    AdversarialAction action;
    double saliency = 0.0;    // vs the record state the action was tried on
    double similarity = 0.0;  // vs the original record, after application
    bool kept = false;
};

struct KeptAction {
    AdversarialAction action;
    double saliency = 0.0;
    double similarity = 0.0;
    double predicted_after = 0.0;
};

struct AttackResult {
    PatientRecord original;
    PatientRecord adversarial;
    std::vector<KeptAction> kept_actions;
    std::vector<ActionLogEntry> log;
    double predicted_before = 0.0;
    double predicted_after = 0.0;
    double target_time = 0.0;
    Direction direction = Direction::increase;
    bool success = false;
    double final_similarity = 1.0;
    Termination termination = Termination::candidates_exhausted;
};

// h = dF * e^(lambda * SI). Exponential weighting promotes actions that keep
// the perturbed record close to the original.
double composite_score(double saliency, double similarity_index, double lambda);

// Scoring pass: one remove candidate per (code, visit) occurrence plus one
// add candidate per eligible synonym (anchored at the code's visit, skipping
// synonyms already anywhere in the record). Sorted by descending signed
// score; for the decrease direction scores are sign-flipped before sorting.
// Ties break by |saliency| desc, then (visit, code id, action kind) asc.
std::vector<ScoredAction> score_candidates(const PatientRecord& record,
                                           const AttackContext& ctx,
                                           const AttackConfig& config,
                                           Direction direction);

struct ReplacementChoice {
    CodeId synonym;
    double saliency = 0.0;        // vs the current record
    double similarity = 0.0;      // vs the current record
    double signed_score = 0.0;
    double predicted_outcome = 0.0;
};

// Best synonym to swap in for `target` at `visit_index` of the current
// record: argmax of the signed composite score over synonyms not already
// present. nullopt when the presence filter empties the synonym set.
std::optional<ReplacementChoice> select_replacement(const PatientRecord& current,
                                                    const CodeId& target,
                                                    std::size_t visit_index,
                                                    const AttackContext& ctx,
                                                    const AttackConfig& config,
                                                    Direction direction);

// Greedy per-patient attack toward target time t. Candidates are consumed in
// scoring order; an action is kept only when its prediction change points
// strictly toward the direction and similarity to the original record stays
// at or above theta. Remove candidates arbitrate against the best
// replacement. `floor` (used by the population strategy's bounded decrease)
// skips actions that would push the prediction to floor + epsilon_margin or
// below.
AttackResult greedy_attack(const PatientRecord& record, const AttackContext& ctx,
                           double target_time, const AttackConfig& config,
                           std::optional<double> floor = std::nullopt);

// Baseline: uniformly samples legal actions and keeps every applied one
// regardless of its effect, subject only to the similarity threshold.
AttackResult random_attack(const PatientRecord& record, const AttackContext& ctx,
                           double target_time, std::size_t budget,
                           const AttackConfig& config, std::uint64_t seed);

enum class AttackScope { censored_only, observed_only, all };
enum class AttackerKind { greedy, random };

const char* to_string(AttackScope s);

struct PopulationOutcome {
    std::map<std::string, AttackResult> attacked;  // by patient id
    // Highest predicted time among censored patients after step 1 (their
    // original predictions when censored patients are out of scope).
    double tmin_start = 0.0;
    // (patient id, t_min after that patient) for the observed chain.
    std::vector<std::pair<std::string, double>> tmin_trace;
    Cohort adversarial;  // target set with attacked records substituted
    std::map<std::string, std::string> failures;
};

// Population strategy: step 1 attacks every censored patient toward time 0;
// step 2 walks the observed patients ordered by true time, each targeting the
// running t_min (raising predictions over it, or decreasing onto it from
// above without crossing), then raises t_min to the post-attack prediction.
// Scope selects which step(s) run. Per-patient budget overrides cap kept
// actions (greedy) or draws (random). Step 1 may run on several workers;
// results are identical for any worker count.
PopulationOutcome population_attack(
    const Cohort& targets, const AttackContext& ctx, const AttackConfig& config,
    AttackScope scope = AttackScope::all,
    AttackerKind attacker = AttackerKind::greedy,
    std::size_t random_budget = 10,
    const std::map<std::string, std::size_t>* budget_overrides = nullptr,
    std::size_t workers = 1);

}  // namespace survadv
