#include "survadv/attack.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "survadv/errors.hpp"
#include "survadv/rng.hpp"

namespace survadv {

const char* to_string(Direction d) {
    return d == Direction::increase ? "increase" : "decrease";
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::target_reached: return "target_reached";
        case Termination::candidates_exhausted: return "candidates_exhausted";
        case Termination::similarity_break: return "similarity_break";
    }
    return "?";
}

const char* to_string(AttackScope s) {
    switch (s) {
        case AttackScope::censored_only: return "censored_only";
        case AttackScope::observed_only: return "observed_only";
        case AttackScope::all: return "all";
    }
    return "?";
}

void AttackConfig::validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("attack.lambda must be >= 0");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw ConfigError("attack.theta must be in [0, 1]");
    if (!(cooccurrence_p >= 0.0 && cooccurrence_p <= 1.0))
        throw ConfigError("attack.p must be in [0, 1]");
    if (!(epsilon_margin > 0.0))
        throw ConfigError("attack.epsilon_margin must be positive");
}

double composite_score(double saliency, double similarity_index, double lambda) {
    return saliency * std::exp(lambda * similarity_index);
}

namespace {

int sign_of(Direction d) { return d == Direction::increase ? 1 : -1; }

bool toward(double saliency, Direction d) {
    // Strict: a zero change never counts as progress.
    return d == Direction::increase ? saliency > 0.0 : saliency < 0.0;
}

// Sort key for the scored candidate list: the code id of an action is the
// code it touches (target for remove, inserted synonym for add).
const CodeId& acted_code(const ScoredAction& a) {
    return a.action.kind == ActionKind::add ? *a.action.synonym_code
                                            : a.action.target_code;
}

bool candidate_order(const ScoredAction& a, const ScoredAction& b) {
    const double sa = a.signed_score(), sb = b.signed_score();
    if (sa != sb) return sa > sb;
    const double fa = std::abs(a.saliency), fb = std::abs(b.saliency);
    if (fa != fb) return fa > fb;
    if (a.action.visit_index != b.action.visit_index)
        return a.action.visit_index < b.action.visit_index;
    if (acted_code(a) != acted_code(b)) return acted_code(a) < acted_code(b);
    if (a.action.kind != b.action.kind) return a.action.kind < b.action.kind;
    return a.action.target_code < b.action.target_code;
}

}  // namespace

std::vector<ScoredAction> score_candidates(const PatientRecord& record,
                                           const AttackContext& ctx,
                                           const AttackConfig& config,
                                           Direction direction) {
    config.validate();
    const double base_prediction = ctx.victim.predict_time(record);
    const int sign = sign_of(direction);
    std::vector<ScoredAction> out;
    std::set<std::pair<std::size_t, CodeId>> seen_adds;

    auto push = [&](AdversarialAction action, const PatientRecord& outcome) {
        ScoredAction scored;
        scored.action = std::move(action);
        scored.saliency = ctx.victim.predict_time(outcome) - base_prediction;
        scored.similarity = ctx.encoder.similarity(record, outcome);
        scored.score = composite_score(scored.saliency, scored.similarity, config.lambda);
        scored.direction_sign = sign;
        out.push_back(std::move(scored));
    };

    for (std::size_t n = 1; n <= record.visit_count(); ++n) {
        for (const CodeId& code : record.visit(n).codes) {
            AdversarialAction remove{ActionKind::remove, n, code, std::nullopt};
            const PatientRecord removed = apply_action(record, remove);
            // A record emptied by the removal has no embedding, so the
            // candidate cannot be similarity-checked; it is never emitted.
            if (removed.total_codes() > 0) push(std::move(remove), removed);

            auto syn_it = ctx.synonyms.find(code);
            if (syn_it == ctx.synonyms.end()) continue;
            for (const CodeId& synonym : syn_it->second.members) {
                if (record.contains(synonym)) continue;
                if (!seen_adds.emplace(n, synonym).second) continue;
                AdversarialAction add{ActionKind::add, n, code, synonym};
                const PatientRecord added = apply_action(record, add);
                push(std::move(add), added);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), candidate_order);
    return out;
}

std::optional<ReplacementChoice> select_replacement(const PatientRecord& current,
                                                    const CodeId& target,
                                                    std::size_t visit_index,
                                                    const AttackContext& ctx,
                                                    const AttackConfig& config,
                                                    Direction direction) {
    auto syn_it = ctx.synonyms.find(target);
    if (syn_it == ctx.synonyms.end() || syn_it->second.empty()) return std::nullopt;
    const double current_prediction = ctx.victim.predict_time(current);
    const int sign = sign_of(direction);
    std::optional<ReplacementChoice> best;
    for (const CodeId& synonym : syn_it->second.members) {
        if (current.contains(synonym)) continue;
        AdversarialAction replace{ActionKind::replace, visit_index, target, synonym};
        const PatientRecord outcome = apply_action(current, replace);
        ReplacementChoice choice;
        choice.synonym = synonym;
        choice.predicted_outcome = ctx.victim.predict_time(outcome);
        choice.saliency = choice.predicted_outcome - current_prediction;
        choice.similarity = ctx.encoder.similarity(current, outcome);
        choice.signed_score =
            sign * composite_score(choice.saliency, choice.similarity, config.lambda);
        // Ties resolve to the earlier synonym in catalog order.
        if (!best || choice.signed_score > best->signed_score) best = choice;
    }
    return best;
}

namespace {

// Shared state of one greedy run.
struct GreedyState {
    PatientRecord current;
    double prediction;
    AttackResult result;
    std::size_t kept = 0;
};

bool budget_exhausted(const AttackConfig& cfg, const GreedyState& st) {
    return cfg.max_kept_actions && st.kept >= *cfg.max_kept_actions;
}

bool check_success(double prediction, double target, Direction d) {
    return d == Direction::increase ? prediction > target : prediction < target;
}

}  // namespace

AttackResult greedy_attack(const PatientRecord& record, const AttackContext& ctx,
                           double target_time, const AttackConfig& config,
                           std::optional<double> floor) {
    config.validate();
    GreedyState st;
    st.current = record;
    st.prediction = ctx.victim.predict_time(record);
    st.result.original = record;
    st.result.predicted_before = st.prediction;
    st.result.target_time = target_time;
    st.result.direction =
        st.prediction < target_time ? Direction::increase : Direction::decrease;
    st.result.termination = Termination::candidates_exhausted;
    const Direction dir = st.result.direction;

    auto blocked_by_floor = [&](double outcome_prediction) {
        return floor && dir == Direction::decrease &&
               outcome_prediction <= *floor + config.epsilon_margin;
    };
    auto keep = [&](const AdversarialAction& action, PatientRecord&& outcome,
                    double outcome_prediction, double saliency,
                    double similarity_to_original) {
        st.current = std::move(outcome);
        st.prediction = outcome_prediction;
        st.kept += 1;
        st.result.kept_actions.push_back(
            {action, saliency, similarity_to_original, outcome_prediction});
        st.result.log.push_back({action, saliency, similarity_to_original, true});
    };

    const std::vector<ScoredAction> candidates =
        score_candidates(record, ctx, config, dir);

    for (const ScoredAction& cand : candidates) {
        if (budget_exhausted(config, st)) break;

        if (cand.action.kind == ActionKind::add) {
            const CodeId& synonym = *cand.action.synonym_code;
            if (st.current.contains(synonym)) continue;  // became present earlier
            PatientRecord outcome = apply_action(st.current, cand.action);
            const double outcome_prediction = ctx.victim.predict_time(outcome);
            const double saliency = outcome_prediction - st.prediction;
            if (!toward(saliency, dir)) continue;  // applied and reversed
            if (blocked_by_floor(outcome_prediction)) continue;
            const double similarity = ctx.encoder.similarity(record, outcome);
            if (similarity < config.theta) {
                st.result.log.push_back({cand.action, saliency, similarity, false});
                if (config.break_on_breach) {
                    st.result.termination = Termination::similarity_break;
                    break;
                }
                continue;
            }
            keep(cand.action, std::move(outcome), outcome_prediction, saliency,
                 similarity);
        } else {
            // Remove candidate: arbitrate the removal against the best
            // replacement, both evaluated from the current record and both
            // similarity-checked against the original.
            const std::size_t n = cand.action.visit_index;
            const CodeId& target = cand.action.target_code;
            if (!st.current.visit(n).has(target)) continue;  // already gone

            struct Outcome {
                AdversarialAction action;
                PatientRecord record;
                double prediction = 0.0;
                double saliency = 0.0;
                double similarity = 0.0;
                bool eligible = false;
                bool breach = false;
            };
            std::optional<Outcome> removal;
            PatientRecord removed = apply_action(st.current, cand.action);
            if (removed.total_codes() > 0) {
                Outcome o;
                o.action = cand.action;
                o.prediction = ctx.victim.predict_time(removed);
                o.saliency = o.prediction - st.prediction;
                o.similarity = ctx.encoder.similarity(record, removed);
                const bool directional =
                    toward(o.saliency, dir) && !blocked_by_floor(o.prediction);
                o.eligible = directional && o.similarity >= config.theta;
                o.breach = directional && o.similarity < config.theta;
                o.record = std::move(removed);
                removal = std::move(o);
            }
            std::optional<Outcome> replacement;
            if (auto choice = select_replacement(st.current, target, n, ctx, config, dir)) {
                Outcome o;
                o.action = AdversarialAction{ActionKind::replace, n, target,
                                             choice->synonym};
                o.record = apply_action(st.current, o.action);
                o.prediction = choice->predicted_outcome;
                o.saliency = o.prediction - st.prediction;
                o.similarity = ctx.encoder.similarity(record, o.record);
                const bool directional =
                    toward(o.saliency, dir) && !blocked_by_floor(o.prediction);
                o.eligible = directional && o.similarity >= config.theta;
                o.breach = directional && o.similarity < config.theta;
                replacement = std::move(o);
            }

            Outcome* chosen = nullptr;
            if (removal && removal->eligible && replacement && replacement->eligible)
                chosen = std::abs(removal->saliency) >= std::abs(replacement->saliency)
                             ? &*removal
                             : &*replacement;
            else if (removal && removal->eligible)
                chosen = &*removal;
            else if (replacement && replacement->eligible)
                chosen = &*replacement;

            // Reversed entries cover outcomes that passed the direction gate
            // and were then rejected (breach or lost arbitration); outcomes
            // pointing the wrong way never reach the keep stage.
            if (removal && (chosen != &*removal) && (removal->eligible || removal->breach))
                st.result.log.push_back(
                    {removal->action, removal->saliency, removal->similarity, false});
            if (replacement && (chosen != &*replacement) &&
                (replacement->eligible || replacement->breach))
                st.result.log.push_back({replacement->action, replacement->saliency,
                                         replacement->similarity, false});

            if (!chosen) {
                // A removal that breaches the threshold does not end the
                // attack by itself; the replacement was just tried. Only
                // when every direction-correct outcome for this code is
                // blocked by similarity does the attack stop.
                const bool any_breach = (removal && removal->breach) ||
                                        (replacement && replacement->breach);
                if (any_breach && config.break_on_breach) {
                    st.result.termination = Termination::similarity_break;
                    break;
                }
                continue;
            }
            keep(chosen->action, std::move(chosen->record), chosen->prediction,
                 chosen->saliency, chosen->similarity);
        }

        if (check_success(st.prediction, target_time, dir)) {
            st.result.termination = Termination::target_reached;
            break;
        }
    }

    st.result.adversarial = std::move(st.current);
    st.result.predicted_after = st.prediction;
    st.result.success = st.result.termination == Termination::target_reached;
    st.result.final_similarity =
        st.result.kept_actions.empty()
            ? 1.0
            : ctx.encoder.similarity(st.result.original, st.result.adversarial);
    return st.result;
}

namespace {

std::vector<AdversarialAction> legal_actions(const PatientRecord& current,
                                             const AttackContext& ctx) {
    std::vector<AdversarialAction> actions;
    for (std::size_t n = 1; n <= current.visit_count(); ++n) {
        for (const CodeId& code : current.visit(n).codes) {
            if (current.total_codes() > 1)
                actions.push_back({ActionKind::remove, n, code, std::nullopt});
            auto syn_it = ctx.synonyms.find(code);
            if (syn_it == ctx.synonyms.end()) continue;
            for (const CodeId& synonym : syn_it->second.members) {
                if (current.contains(synonym)) continue;
                actions.push_back({ActionKind::add, n, code, synonym});
                actions.push_back({ActionKind::replace, n, code, synonym});
            }
        }
    }
    return actions;
}

}  // namespace

AttackResult random_attack(const PatientRecord& record, const AttackContext& ctx,
                           double target_time, std::size_t budget,
                           const AttackConfig& config, std::uint64_t seed) {
    config.validate();
    AttackResult result;
    result.original = record;
    result.predicted_before = ctx.victim.predict_time(record);
    result.target_time = target_time;
    result.direction = result.predicted_before < target_time ? Direction::increase
                                                             : Direction::decrease;
    result.termination = Termination::candidates_exhausted;

    PatientRecord current = record;
    double prediction = result.predicted_before;
    SplitMix64 rng(seed);
    std::size_t kept = 0;
    // Reversed draws consume attempts, so a record whose every legal action
    // breaches the threshold still terminates.
    std::size_t attempts_left = budget * 10 + 100;

    while (kept < budget && attempts_left > 0) {
        const std::vector<AdversarialAction> actions = legal_actions(current, ctx);
        if (actions.empty()) break;
        --attempts_left;
        const AdversarialAction& action = actions[rng.below(actions.size())];
        PatientRecord outcome = apply_action(current, action);
        const double outcome_prediction = ctx.victim.predict_time(outcome);
        const double saliency = outcome_prediction - prediction;
        const double similarity = ctx.encoder.similarity(record, outcome);
        const bool keep = similarity >= config.theta;
        result.log.push_back({action, saliency, similarity, keep});
        if (!keep) continue;
        current = std::move(outcome);
        prediction = outcome_prediction;
        ++kept;
        result.kept_actions.push_back({action, saliency, similarity, prediction});
        if (check_success(prediction, target_time, result.direction)) {
            result.termination = Termination::target_reached;
            break;
        }
    }

    result.adversarial = std::move(current);
    result.predicted_after = prediction;
    result.success = result.termination == Termination::target_reached;
    result.final_similarity =
        result.kept_actions.empty()
            ? 1.0
            : ctx.encoder.similarity(result.original, result.adversarial);
    return result;
}

namespace {

struct PatientTask {
    std::size_t index;
    std::uint64_t seed;
    std::optional<std::size_t> budget;
};

AttackResult run_one(const Patient& patient, const AttackContext& ctx,
                     const AttackConfig& config, AttackerKind attacker,
                     double target, std::optional<double> floor,
                     const PatientTask& task, std::size_t random_budget) {
    if (attacker == AttackerKind::random) {
        const std::size_t budget = task.budget.value_or(random_budget);
        return random_attack(patient.record, ctx, target, budget, config, task.seed);
    }
    AttackConfig per_patient = config;
    if (task.budget) per_patient.max_kept_actions = task.budget;
    return greedy_attack(patient.record, ctx, target, per_patient, floor);
}

}  // namespace

PopulationOutcome population_attack(const Cohort& targets, const AttackContext& ctx,
                                    const AttackConfig& config, AttackScope scope,
                                    AttackerKind attacker, std::size_t random_budget,
                                    const std::map<std::string, std::size_t>* budgets,
                                    std::size_t workers) {
    config.validate();
    if (targets.patients.empty()) throw DataError("target cohort is empty");

    PopulationOutcome outcome;
    outcome.adversarial = targets;

    auto task_for = [&](std::size_t index) {
        PatientTask task;
        task.index = index;
        const std::string& id = targets.patients[index].record.id;
        task.seed = config.seed ^ fnv1a64(id);
        if (budgets) {
            auto it = budgets->find(id);
            if (it != budgets->end()) task.budget = it->second;
        }
        return task;
    };

    std::vector<std::size_t> censored, observed;
    for (std::size_t i = 0; i < targets.patients.size(); ++i)
        (targets.patients[i].label.observed() ? observed : censored).push_back(i);

    // Step 1: push every censored patient's prediction down toward zero.
    std::vector<std::optional<AttackResult>> step1(targets.patients.size());
    std::vector<std::pair<std::size_t, std::string>> step1_failures;
    if (scope != AttackScope::observed_only && !censored.empty()) {
        auto worker_fn = [&](std::size_t worker_id, std::size_t n_workers,
                             std::vector<std::pair<std::size_t, std::string>>* fails) {
            for (std::size_t k = worker_id; k < censored.size(); k += n_workers) {
                const std::size_t i = censored[k];
                try {
                    step1[i] = run_one(targets.patients[i], ctx, config, attacker,
                                       /*target=*/0.0, std::nullopt, task_for(i),
                                       random_budget);
                } catch (const Error& e) {
                    fails->emplace_back(i, e.what());
                }
            }
        };
        const std::size_t n_workers = std::max<std::size_t>(1, workers);
        if (n_workers == 1) {
            worker_fn(0, 1, &step1_failures);
        } else {
            std::vector<std::vector<std::pair<std::size_t, std::string>>> fails(n_workers);
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < n_workers; ++w)
                pool.emplace_back(worker_fn, w, n_workers, &fails[w]);
            for (auto& t : pool) t.join();
            for (auto& f : fails)
                step1_failures.insert(step1_failures.end(), f.begin(), f.end());
        }
        std::sort(step1_failures.begin(), step1_failures.end());
    }

    // t_min: highest post-step-1 prediction among censored patients; their
    // original predictions when censored patients are out of scope.
    double t_min = 0.0;
    for (std::size_t i : censored) {
        double pred;
        if (step1[i])
            pred = step1[i]->predicted_after;
        else
            pred = ctx.victim.predict_time(targets.patients[i].record);
        t_min = std::max(t_min, pred);
    }
    outcome.tmin_start = t_min;

    // Step 2: walk observed patients by true time, chaining the target.
    if (scope != AttackScope::censored_only && !observed.empty()) {
        std::vector<std::size_t> ordered = observed;
        std::sort(ordered.begin(), ordered.end(), [&](std::size_t a, std::size_t b) {
            const double ta = targets.patients[a].label.time;
            const double tb = targets.patients[b].label.time;
            if (ta != tb)
                return config.order == PopulationOrder::desc_true_time ? ta > tb
                                                                       : ta < tb;
            return targets.patients[a].record.id < targets.patients[b].record.id;
        });
        for (std::size_t i : ordered) {
            const Patient& patient = targets.patients[i];
            try {
                AttackResult r;
                if (attacker == AttackerKind::random) {
                    r = run_one(patient, ctx, config, attacker, /*target=*/0.0,
                                std::nullopt, task_for(i), random_budget);
                } else {
                    const double original = ctx.victim.predict_time(patient.record);
                    if (original < t_min) {
                        r = run_one(patient, ctx, config, attacker, t_min, std::nullopt,
                                    task_for(i), random_budget);
                    } else {
                        // Decrease onto t_min from above without crossing it.
                        r = run_one(patient, ctx, config, attacker, t_min, t_min,
                                    task_for(i), random_budget);
                    }
                    if (r.predicted_after > t_min) t_min = r.predicted_after;
                    outcome.tmin_trace.emplace_back(patient.record.id, t_min);
                }
                step1[i] = std::move(r);
            } catch (const Error& e) {
                step1_failures.emplace_back(i, e.what());
            }
        }
    }

    for (const auto& [index, message] : step1_failures)
        outcome.failures[targets.patients[index].record.id] = message;
    for (std::size_t i = 0; i < targets.patients.size(); ++i) {
        if (!step1[i]) continue;
        outcome.adversarial.patients[i].record = step1[i]->adversarial;
        outcome.attacked.emplace(targets.patients[i].record.id, std::move(*step1[i]));
    }
    return outcome;
}

}  // namespace survadv
