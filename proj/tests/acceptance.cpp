// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier than the unit suites: it runs the full population
// attack benchmark over several seeds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "survadv/attack.hpp"
#include "survadv/cohortgen.hpp"
#include "survadv/errors.hpp"
#include "survadv/metrics.hpp"
#include "survadv/pipeline.hpp"
#include "survadv/rng.hpp"
#include "survadv/victim.hpp"

using namespace survadv;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << name;
    if (!detail.empty()) std::cout << " -- " << detail;
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Benchmark harness: generated cohort, trained exponential victim, synonym
// catalog mined from the training split, and the three attackers under
// matched per-patient budgets.

struct Benchmark {
    GeneratorConfig gen;
    Ontology ontology;
    Cohort train;
    Cohort target;
    ExponentialHazardModel victim;
    std::unique_ptr<RecordEncoder> encoder;
    std::map<CodeId, SynonymSet> synonyms;
    AttackConfig attack;

    double pre_c_index = 0.0;
    double pre_mae = 0.0;
};

Benchmark make_benchmark(std::uint64_t seed) {
    Benchmark b;
    b.gen.ontology.branching = 4;
    b.gen.ontology.depth = 3;  // 128 leaves
    b.gen.cohort.patients = 1700;
    b.gen.cohort.visits = 5;
    b.gen.cohort.codes_per_visit_min = 4;
    b.gen.cohort.codes_per_visit_max = 8;
    b.gen.censoring.target_fraction = 0.84;
    b.gen.seed = seed;
    b.ontology = gen_ontology(b.gen);
    Cohort full = gen_cohort(b.gen, b.ontology);
    b.train.patients.assign(full.patients.begin(), full.patients.begin() + 1400);
    b.target.patients.assign(full.patients.begin() + 1400, full.patients.end());

    Featurizer feat(b.ontology.leaves(), 0.7);
    TrainConfig tcfg;
    tcfg.epochs = 300;
    tcfg.step_size = 0.3;
    tcfg.seed = seed;
    b.victim = train_exponential(b.train, feat, tcfg);

    EncoderConfig ecfg;
    ecfg.seed = seed ^ 0x656e63ull;
    b.encoder = std::make_unique<RecordEncoder>(b.ontology, ecfg);

    const CooccurrenceTable table = CooccurrenceTable::build(b.train);
    b.attack.cooccurrence_p = 0.75;
    b.attack.theta = 0.90;
    b.attack.lambda = 5.0;
    b.attack.seed = seed;
    b.synonyms = build_synonym_catalog(b.ontology, table, b.attack.cooccurrence_p);

    PredictionSet pre;
    for (const Patient& p : b.target.patients)
        pre.push_back({p.label.time, p.label.event, b.victim.predict_time(p.record)});
    b.pre_c_index = c_index(pre);
    b.pre_mae = mae(pre);
    return b;
}

PredictionSet post_predictions(const Benchmark& b, const PopulationOutcome& out) {
    PredictionSet post;
    for (std::size_t i = 0; i < b.target.patients.size(); ++i) {
        const Patient& p = b.target.patients[i];
        post.push_back({p.label.time, p.label.event,
                        b.victim.predict_time(out.adversarial.patients[i].record)});
    }
    return post;
}

struct SeedRun {
    Benchmark bench;
    PopulationOutcome greedy;
    PopulationOutcome nosym;
    PopulationOutcome random;
    double post_greedy_c = 0.0, post_nosym_c = 0.0, post_random_c = 0.0;
    double post_greedy_mae = 0.0;
};

SeedRun run_seed(std::uint64_t seed) {
    SeedRun run{make_benchmark(seed), {}, {}, {}};
    const Benchmark& b = run.bench;
    const AttackContext ctx{b.victim, *b.encoder, b.synonyms};

    run.greedy = population_attack(b.target, ctx, b.attack, AttackScope::all,
                                   AttackerKind::greedy, 10, nullptr, 2);

    // Matched per-patient budgets for the ablation and the baseline.
    std::map<std::string, std::size_t> budgets;
    for (const Patient& p : b.target.patients) {
        auto it = run.greedy.attacked.find(p.record.id);
        budgets[p.record.id] = it == run.greedy.attacked.end()
                                   ? 0
                                   : it->second.kept_actions.size();
    }
    AttackConfig nosym_cfg = b.attack;
    nosym_cfg.lambda = 0.0;
    run.nosym = population_attack(b.target, ctx, nosym_cfg, AttackScope::all,
                                  AttackerKind::greedy, 10, &budgets, 2);
    run.random = population_attack(b.target, ctx, b.attack, AttackScope::all,
                                   AttackerKind::random, 10, &budgets, 2);

    run.post_greedy_c = c_index(post_predictions(b, run.greedy));
    run.post_nosym_c = c_index(post_predictions(b, run.nosym));
    run.post_random_c = c_index(post_predictions(b, run.random));
    run.post_greedy_mae = mae(post_predictions(b, run.greedy));
    return run;
}

// --------------------------------------------------------------------------

void criterion_1_metric_oracle() {
    const auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(20240);
    int compared = 0;
    bool agree = true;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(29);
        PredictionSet preds;
        for (std::size_t i = 0; i < n; ++i)
            preds.push_back({static_cast<double>(rng.below(8)),
                             rng.next_double() < 0.6 ? 1 : 0,
                             static_cast<double>(rng.below(6)) * 0.5});
        double rule = 0, oracle = 0;
        bool rule_threw = false, oracle_threw = false;
        try {
            rule = c_index(preds);
        } catch (const NoPermissiblePairs&) {
            rule_threw = true;
        }
        try {
            oracle = testing::c_index_indicator_sum(preds);
        } catch (const NoPermissiblePairs&) {
            oracle_threw = true;
        }
        if (rule_threw != oracle_threw || (!rule_threw && rule != oracle)) {
            agree = false;
            break;
        }
        if (!rule_threw) ++compared;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(1, "rule-based c-index equals the indicator-sum oracle on 200 random sets",
           agree && compared > 100 && secs < 5.0,
           std::to_string(compared) + " comparable sets, " + fmt(secs) + " s");
}

void criterion_2_metric_anchors() {
    bool ok = true;
    std::string detail;
    const PredictionSet perfect{{1, 1, 1}, {2, 1, 2}, {3, 1, 3}};
    if (c_index(perfect) != 1.0) ok = false, detail += "perfect!=1 ";
    const PredictionSet reversed{{1, 1, 2}, {2, 1, 1}};
    if (c_index(reversed) != 0.0) ok = false, detail += "reversed!=0 ";
    const PredictionSet tied{{1, 1, 5}, {2, 1, 5}};
    if (c_index(tied) != 0.5) ok = false, detail += "tied!=0.5 ";
    const PredictionSet worked{{2, 1, 3}, {3, 0, 2}, {5, 1, 5}, {4, 0, 6}};
    if (std::abs(c_index(worked) - 2.0 / 3.0) > 1e-12) ok = false, detail += "4-patient!=2/3 ";
    const PredictionSet hand{{2, 1, 3}, {4, 1, 2}, {10, 0, 0}};
    if (mae(hand) != 1.5) ok = false, detail += "mae!=1.5 ";
    report(2, "metric anchor values", ok, detail.empty() ? "5/5 anchors" : detail);
}

void criterion_8_victim_numerics() {
    bool ok = true;
    std::string detail;

    GeneratorConfig gcfg;
    gcfg.cohort.patients = 120;
    gcfg.censoring.target_fraction = 0.5;
    gcfg.seed = 77;
    const Ontology onto = gen_ontology(gcfg);
    const Cohort cohort = gen_cohort(gcfg, onto);
    const Featurizer feat(onto.leaves(), 0.7);
    std::vector<FeatureVector> x;
    std::vector<SurvivalLabel> y;
    for (const Patient& p : cohort.patients) {
        x.push_back(feat.featurize(p.record));
        y.push_back(p.label);
    }
    SplitMix64 rng(5150);

    std::vector<double> w(feat.dim());
    for (double& v : w) v = 0.1 * rng.next_normal();
    const double bias = 0.07;
    const auto grad = ExponentialHazardModel::nll_gradient(x, y, w, bias);
    for (int probe = 0; probe < 5; ++probe) {
        const std::size_t j = rng.below(w.size());
        const double h = 1e-5;
        auto wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        const double fd = (ExponentialHazardModel::nll(x, y, wp, bias) -
                           ExponentialHazardModel::nll(x, y, wm, bias)) /
                          (2 * h);
        const double rel =
            std::abs(grad[j] - fd) / std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
        if (rel > 1e-4) ok = false, detail += "exp-grad rel=" + fmt(rel) + " ";
    }

    const std::size_t K = 6;
    std::vector<double> packed(K * (feat.dim() + 1));
    for (double& v : packed) v = 0.05 * rng.next_normal();
    const auto dgrad = DiscreteTimeHazardModel::nll_gradient(x, y, K, 0.7, packed);
    for (int probe = 0; probe < 5; ++probe) {
        const std::size_t j = rng.below(packed.size());
        const double h = 1e-5;
        auto pp = packed, pm = packed;
        pp[j] += h;
        pm[j] -= h;
        const double fd = (DiscreteTimeHazardModel::nll(x, y, K, 0.7, pp) -
                           DiscreteTimeHazardModel::nll(x, y, K, 0.7, pm)) /
                          (2 * h);
        const double rel =
            std::abs(dgrad[j] - fd) / std::max({std::abs(fd), std::abs(dgrad[j]), 1e-8});
        if (rel > 1e-4) ok = false, detail += "disc-grad rel=" + fmt(rel) + " ";
    }

    const Featurizer tiny({"a"}, 0.7);
    PatientRecord r;
    r.id = "p";
    r.visits.emplace_back();
    const ExponentialHazardModel flat(tiny, {0.0}, 0.0);
    if (flat.predict_time(r) != 1.0) ok = false, detail += "exp(0)!=1 ";
    const DiscreteTimeHazardModel half(tiny, 1.0, {{{0.0}}, {{0.0}}, {{0.0}}},
                                       {0.0, 0.0, 0.0});
    if (std::abs(half.predict_time(r) - 0.875) > 1e-15)
        ok = false, detail += "discrete!=0.875 ";
    report(8, "victim numerics (gradient checks and closed forms)", ok,
           detail.empty() ? "10 gradient probes + 2 closed forms" : detail);
}

void criterion_9_scs_invariants(const Benchmark& b) {
    const CooccurrenceTable table = CooccurrenceTable::build(b.train);
    std::size_t members = 0;
    bool ok = true;
    std::string detail;
    for (const auto& [anchor, set] : b.synonyms) {
        for (std::size_t i = 0; i < set.members.size(); ++i) {
            ++members;
            if (b.ontology.parent(set.members[i]) != b.ontology.parent(anchor)) {
                ok = false;
                detail = "member " + set.members[i] + " not a sibling of " + anchor;
            }
            const double p = table.conditional(anchor, set.members[i]);
            if (!(p > 0.75)) {
                ok = false;
                detail = "Pr(" + set.members[i] + "|" + anchor + ")=" + fmt(p);
            }
        }
    }
    report(9, "every synonym shares the anchor's parent at co-occurrence > 0.75",
           ok && members > 0, std::to_string(members) + " synonym entries checked");
}

void criterion_10_determinism() {
    const fs::path dir = fs::temp_directory_path() / "survadv_acceptance_det";
    fs::remove_all(dir);
    std::ostringstream cfg_json;
    cfg_json << "{\"seed\": 404, \"out\": \"" << (dir / "run").string() << "\","
             << "\"generator\": {\"cohort\": {\"patients\": 300}},"
             << "\"split\": {\"train\": 220, \"target\": 80},"
             << "\"victim\": {\"epochs\": 120}}";
    const RunConfig cfg = parse_run_config(cfg_json.str());
    std::string err;
    bool ok = true;
    std::string detail;
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    if (run_gen(cfg, &err) || run_train(cfg, &err) || run_attack(cfg, &err)) {
        ok = false;
        detail = err;
    } else {
        const std::string actions1 = slurp(cfg.paths.actions);
        const std::string summary1 = slurp(cfg.paths.summary);
        if (run_gen(cfg, &err) || run_train(cfg, &err) || run_attack(cfg, &err)) {
            ok = false;
            detail = err;
        } else {
            if (slurp(cfg.paths.actions) != actions1)
                ok = false, detail += "actions.jsonl differs ";
            if (slurp(cfg.paths.summary) != summary1)
                ok = false, detail += "summary.json differs ";
        }
    }
    fs::remove_all(dir);
    report(10, "full pipeline reruns are byte-identical", ok,
           ok ? "actions.jsonl and summary.json identical" : detail);
}

}  // namespace

int main() {
    const auto suite_start = std::chrono::steady_clock::now();
    criterion_1_metric_oracle();
    criterion_2_metric_anchors();

    // Benchmark runs shared by criteria 3 through 7.
    std::vector<SeedRun> runs;
    const auto bench_start = std::chrono::steady_clock::now();
    for (std::uint64_t seed : {11ull, 22ull, 33ull, 44ull, 55ull})
        runs.push_back(run_seed(seed));
    const double bench_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - bench_start)
            .count();

    // Criterion 3: similarity safety across every attack in the suite.
    {
        std::size_t attacks = 0, violations = 0;
        for (const SeedRun& run : runs) {
            for (const PopulationOutcome* out :
                 {&run.greedy, &run.nosym, &run.random}) {
                for (const auto& [id, res] : out->attacked) {
                    (void)id;
                    ++attacks;
                    // Recomputed from the records, not trusted from the result.
                    const double s =
                        res.kept_actions.empty()
                            ? 1.0
                            : run.bench.encoder->similarity(res.original, res.adversarial);
                    if (s < run.bench.attack.theta) ++violations;
                }
            }
        }
        report(3, "similarity safety similarity(V, V*) >= 0.90 for every attack",
               attacks >= 500 && violations == 0,
               std::to_string(attacks) + " attacks, " + std::to_string(violations) +
                   " violations");
    }

    // Criterion 4: greedy monotonicity and trace replay.
    {
        std::size_t checked = 0, monotone_bad = 0, replay_bad = 0;
        for (const SeedRun& run : runs) {
            for (const PopulationOutcome* out : {&run.greedy, &run.nosym}) {
                for (const auto& [id, res] : out->attacked) {
                    (void)id;
                    ++checked;
                    double prev = res.predicted_before;
                    for (const KeptAction& k : res.kept_actions) {
                        const bool up = res.direction == Direction::increase;
                        if ((up && !(k.predicted_after > prev)) ||
                            (!up && !(k.predicted_after < prev)))
                            ++monotone_bad;
                        prev = k.predicted_after;
                    }
                    PatientRecord replay = res.original;
                    for (const KeptAction& k : res.kept_actions)
                        replay = apply_action(replay, k.action);
                    if (!(replay == res.adversarial)) ++replay_bad;
                }
            }
            // Replay must hold for the random baseline too.
            for (const auto& [id, res] : run.random.attacked) {
                (void)id;
                PatientRecord replay = res.original;
                for (const KeptAction& k : res.kept_actions)
                    replay = apply_action(replay, k.action);
                if (!(replay == res.adversarial)) ++replay_bad;
            }
        }
        report(4, "greedy monotonicity and trace replay on every result",
               checked > 0 && monotone_bad == 0 && replay_bad == 0,
               std::to_string(checked) + " greedy results, " +
                   std::to_string(monotone_bad) + " monotonicity / " +
                   std::to_string(replay_bad) + " replay failures");
    }

    // Criterion 5: directional efficacy of the full attack.
    {
        std::vector<double> drops, posts, mae_deltas, pres;
        for (const SeedRun& run : runs) {
            pres.push_back(run.bench.pre_c_index);
            drops.push_back(run.bench.pre_c_index - run.post_greedy_c);
            posts.push_back(run.post_greedy_c);
            mae_deltas.push_back(run.post_greedy_mae - run.bench.pre_mae);
        }
        const bool premise =
            *std::min_element(pres.begin(), pres.end()) >= 0.65 &&
            runs[0].bench.target.size() >= 300 &&
            runs[0].bench.ontology.leaves().size() >= 100;
        const bool ok = premise && median(drops) >= 0.15 && median(posts) < 0.50 &&
                        median(mae_deltas) > 0.0 && bench_secs < 600.0;
        report(5, "full attack collapses the target c-index and inflates MAE",
               ok,
               "median pre=" + fmt(median(pres)) + " post=" + fmt(median(posts)) +
                   " drop=" + fmt(median(drops)) + " dMAE=" + fmt(median(mae_deltas)) +
                   " bench=" + fmt(bench_secs) + " s");
    }

    // Criterion 6: attacker ordering under matched budgets.
    {
        std::vector<double> g, n, r;
        for (const SeedRun& run : runs) {
            g.push_back(run.post_greedy_c);
            n.push_back(run.post_nosym_c);
            r.push_back(run.post_random_c);
        }
        const double mg = median(g), mn = median(n), mr = median(r);
        report(6, "median post-attack c-index orders greedy <= nosym <= random",
               mg <= mn && mn <= mr,
               "greedy=" + fmt(mg) + " nosym=" + fmt(mn) + " random=" + fmt(mr));
    }

    // Criterion 7: step-1 decrease property and the t_min chain invariant.
    {
        std::size_t censored_kept = 0, censored_bad = 0;
        std::size_t succeeded = 0, chain_bad = 0;
        for (const SeedRun& run : runs) {
            for (const Patient& p : run.bench.target.patients) {
                auto it = run.greedy.attacked.find(p.record.id);
                if (it == run.greedy.attacked.end()) continue;
                const AttackResult& res = it->second;
                if (!p.label.observed()) {
                    if (!res.kept_actions.empty()) {
                        ++censored_kept;
                        if (!(res.predicted_after < res.predicted_before))
                            ++censored_bad;
                    }
                } else if (res.success) {
                    ++succeeded;
                    if (!(res.predicted_after > run.greedy.tmin_start)) ++chain_bad;
                }
            }
        }
        report(7, "censored attacks strictly decrease; successful observed clear t_min",
               censored_kept > 0 && censored_bad == 0 && succeeded > 0 && chain_bad == 0,
               std::to_string(censored_kept) + " censored with kept actions, " +
                   std::to_string(succeeded) + " observed successes, " +
                   std::to_string(censored_bad + chain_bad) + " violations");
    }

    criterion_8_victim_numerics();
    criterion_9_scs_invariants(runs[0].bench);
    criterion_10_determinism();

    const double total_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start)
            .count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED")
              << " (" << total_secs << " s)" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
