#include "survadv/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "survadv/errors.hpp"
#include "survadv/metrics.hpp"
#include "survadv/report.hpp"
#include "survadv/rng.hpp"

namespace survadv {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(AttackerChoice a) {
    switch (a) {
        case AttackerChoice::greedy: return "greedy";
        case AttackerChoice::nosym: return "nosym";
        case AttackerChoice::random: return "random";
    }
    return "?";
}

AttackerChoice attacker_from_string(const std::string& s) {
    if (s == "greedy") return AttackerChoice::greedy;
    if (s == "nosym") return AttackerChoice::nosym;
    if (s == "random") return AttackerChoice::random;
    throw ConfigError("unknown attacker '" + s + "' (expected greedy|nosym|random)");
}

void RunConfig::resolve_paths() {
    auto def = [this](std::string& p, const char* name) {
        if (p.empty()) p = (fs::path(out) / name).string();
    };
    def(paths.ontology, "ontology.tsv");
    def(paths.cohort, "cohort.jsonl");
    def(paths.train_cohort, "train_cohort.jsonl");
    def(paths.target_cohort, "target_cohort.jsonl");
    def(paths.groundtruth, "groundtruth.json");
    def(paths.model, "model.json");
    def(paths.training_report, "training_report.json");
    def(paths.actions, "actions.jsonl");
    def(paths.summary, "summary.json");
    def(paths.adversarial_cohort, "adversarial_cohort.jsonl");
    def(paths.metrics, "metrics.json");
    if (paths.report_dir.empty()) paths.report_dir = out;
}

RunConfig default_run_config() {
    RunConfig c;
    c.resolve_paths();
    return c;
}

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return key == a;
            }) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

void parse_generator(const json& g, GeneratorConfig& out) {
    check_keys(g, "generator", {"ontology", "cohort", "risk", "censoring", "seed"});
    if (g.contains("ontology")) {
        const json& o = g["ontology"];
        check_keys(o, "generator.ontology", {"branching", "depth"});
        read_field(o, "branching", out.ontology.branching);
        read_field(o, "depth", out.ontology.depth);
    }
    if (g.contains("cohort")) {
        const json& c = g["cohort"];
        check_keys(c, "generator.cohort",
                   {"patients", "visits", "codes_per_visit_min", "codes_per_visit_max",
                    "branches_per_patient", "in_branch_probability"});
        read_field(c, "patients", out.cohort.patients);
        read_field(c, "visits", out.cohort.visits);
        read_field(c, "codes_per_visit_min", out.cohort.codes_per_visit_min);
        read_field(c, "codes_per_visit_max", out.cohort.codes_per_visit_max);
        read_field(c, "branches_per_patient", out.cohort.branches_per_patient);
        read_field(c, "in_branch_probability", out.cohort.in_branch_probability);
    }
    if (g.contains("risk")) {
        const json& r = g["risk"];
        check_keys(r, "generator.risk", {"high_risk_fraction", "weight_scale", "rho_f"});
        read_field(r, "high_risk_fraction", out.risk.high_risk_fraction);
        read_field(r, "weight_scale", out.risk.weight_scale);
        read_field(r, "rho_f", out.risk.rho_f);
    }
    if (g.contains("censoring")) {
        const json& c = g["censoring"];
        check_keys(c, "generator.censoring", {"target_fraction"});
        read_field(c, "target_fraction", out.censoring.target_fraction);
    }
    read_field(g, "seed", out.seed);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    check_keys(j, "config",
               {"seed", "out", "workers", "generator", "split", "encoder", "victim",
                "cooccurrence", "attack", "paths"});
    RunConfig c;
    read_field(j, "seed", c.seed);
    read_field(j, "out", c.out);
    read_field(j, "workers", c.workers);
    // Module seeds default to mixes of the master seed so one --seed flag
    // moves the whole pipeline.
    c.generator.seed = c.seed;
    c.encoder.seed = c.seed ^ 0x656e636f646572ull;
    c.victim.train.seed = c.seed ^ 0x747261696eull;
    c.attack.seed = c.seed ^ 0x61747461636bull;

    if (j.contains("generator")) parse_generator(j["generator"], c.generator);
    if (j.contains("split")) {
        const json& s = j["split"];
        check_keys(s, "split", {"train", "target"});
        c.split.enabled = true;
        read_field(s, "train", c.split.train);
        read_field(s, "target", c.split.target);
        if (c.split.train == 0 || c.split.target == 0)
            throw ConfigError("split.train and split.target must be >= 1");
        if (c.split.train + c.split.target > c.generator.cohort.patients)
            throw ConfigError("split sizes exceed generator.cohort.patients");
    }
    if (j.contains("encoder")) {
        const json& e = j["encoder"];
        check_keys(e, "encoder", {"dim", "gamma", "rho", "seed"});
        read_field(e, "dim", c.encoder.dim);
        read_field(e, "gamma", c.encoder.gamma);
        read_field(e, "rho", c.encoder.rho);
        read_field(e, "seed", c.encoder.seed);
    }
    if (j.contains("victim")) {
        const json& v = j["victim"];
        check_keys(v, "victim",
                   {"kind", "rho_f", "step_size", "epochs", "holdout_fraction",
                    "intervals", "seed"});
        std::string kind = to_string(c.victim.kind);
        read_field(v, "kind", kind);
        c.victim.kind = victim_kind_from_string(kind);
        read_field(v, "rho_f", c.victim.rho_f);
        read_field(v, "step_size", c.victim.train.step_size);
        read_field(v, "epochs", c.victim.train.epochs);
        read_field(v, "holdout_fraction", c.victim.train.holdout_fraction);
        read_field(v, "intervals", c.victim.intervals);
        read_field(v, "seed", c.victim.train.seed);
    }
    if (j.contains("cooccurrence")) {
        const json& o = j["cooccurrence"];
        check_keys(o, "cooccurrence", {"scope", "direction", "source"});
        std::string scope = "record", direction = "given_anchor";
        read_field(o, "scope", scope);
        read_field(o, "direction", direction);
        read_field(o, "source", c.cooccurrence.source);
        if (scope == "record")
            c.cooccurrence.scope = CooccurrenceScope::record;
        else if (scope == "visit")
            c.cooccurrence.scope = CooccurrenceScope::visit;
        else
            throw ConfigError("cooccurrence.scope must be record|visit");
        if (direction == "given_anchor")
            c.cooccurrence.direction = CooccurrenceDirection::given_anchor;
        else if (direction == "given_candidate")
            c.cooccurrence.direction = CooccurrenceDirection::given_candidate;
        else
            throw ConfigError("cooccurrence.direction must be given_anchor|given_candidate");
        if (c.cooccurrence.source != "train" && c.cooccurrence.source != "target")
            throw ConfigError("cooccurrence.source must be train|target");
    }
    if (j.contains("attack")) {
        const json& a = j["attack"];
        check_keys(a, "attack",
                   {"lambda", "theta", "p", "break_on_breach", "order",
                    "epsilon_margin", "seed", "attacker", "random_budget",
                    "max_kept_actions"});
        read_field(a, "lambda", c.attack.lambda);
        read_field(a, "theta", c.attack.theta);
        read_field(a, "p", c.attack.cooccurrence_p);
        read_field(a, "break_on_breach", c.attack.break_on_breach);
        std::string order = "desc_true_time";
        read_field(a, "order", order);
        if (order == "desc_true_time")
            c.attack.order = PopulationOrder::desc_true_time;
        else if (order == "asc_true_time")
            c.attack.order = PopulationOrder::asc_true_time;
        else
            throw ConfigError("attack.order must be desc_true_time|asc_true_time");
        read_field(a, "epsilon_margin", c.attack.epsilon_margin);
        read_field(a, "seed", c.attack.seed);
        std::string attacker = to_string(c.attacker);
        read_field(a, "attacker", attacker);
        c.attacker = attacker_from_string(attacker);
        read_field(a, "random_budget", c.random_budget);
        if (a.contains("max_kept_actions")) {
            std::size_t cap = 0;
            read_field(a, "max_kept_actions", cap);
            c.attack.max_kept_actions = cap;
        }
    }
    if (j.contains("paths")) {
        const json& p = j["paths"];
        check_keys(p, "paths",
                   {"ontology", "cohort", "train_cohort", "target_cohort",
                    "groundtruth", "model", "training_report", "actions", "summary",
                    "adversarial_cohort", "metrics", "report_dir"});
        read_field(p, "ontology", c.paths.ontology);
        read_field(p, "cohort", c.paths.cohort);
        read_field(p, "train_cohort", c.paths.train_cohort);
        read_field(p, "target_cohort", c.paths.target_cohort);
        read_field(p, "groundtruth", c.paths.groundtruth);
        read_field(p, "model", c.paths.model);
        read_field(p, "training_report", c.paths.training_report);
        read_field(p, "actions", c.paths.actions);
        read_field(p, "summary", c.paths.summary);
        read_field(p, "adversarial_cohort", c.paths.adversarial_cohort);
        read_field(p, "metrics", c.paths.metrics);
        read_field(p, "report_dir", c.paths.report_dir);
    }
    c.generator.validate();
    c.encoder.validate();
    c.attack.validate();
    c.resolve_paths();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

void apply_master_seed(RunConfig& config, std::uint64_t seed) {
    config.seed = seed;
    config.generator.seed = seed;
    config.encoder.seed = seed ^ 0x656e636f646572ull;
    config.victim.train.seed = seed ^ 0x747261696eull;
    config.attack.seed = seed ^ 0x61747461636bull;
}

namespace {

ordered_json config_body(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["generator"] = {
        {"ontology",
         {{"branching", c.generator.ontology.branching},
          {"depth", c.generator.ontology.depth}}},
        {"cohort",
         {{"patients", c.generator.cohort.patients},
          {"visits", c.generator.cohort.visits},
          {"codes_per_visit_min", c.generator.cohort.codes_per_visit_min},
          {"codes_per_visit_max", c.generator.cohort.codes_per_visit_max},
          {"branches_per_patient", c.generator.cohort.branches_per_patient},
          {"in_branch_probability", c.generator.cohort.in_branch_probability}}},
        {"risk",
         {{"high_risk_fraction", c.generator.risk.high_risk_fraction},
          {"weight_scale", c.generator.risk.weight_scale},
          {"rho_f", c.generator.risk.rho_f}}},
        {"censoring", {{"target_fraction", c.generator.censoring.target_fraction}}},
        {"seed", c.generator.seed}};
    if (c.split.enabled)
        j["split"] = {{"train", c.split.train}, {"target", c.split.target}};
    j["encoder"] = {{"dim", c.encoder.dim},
                    {"gamma", c.encoder.gamma},
                    {"rho", c.encoder.rho},
                    {"seed", c.encoder.seed}};
    j["victim"] = {{"kind", to_string(c.victim.kind)},
                   {"rho_f", c.victim.rho_f},
                   {"step_size", c.victim.train.step_size},
                   {"epochs", c.victim.train.epochs},
                   {"holdout_fraction", c.victim.train.holdout_fraction},
                   {"intervals", c.victim.intervals},
                   {"seed", c.victim.train.seed}};
    j["cooccurrence"] = {
        {"scope", c.cooccurrence.scope == CooccurrenceScope::record ? "record" : "visit"},
        {"direction", c.cooccurrence.direction == CooccurrenceDirection::given_anchor
                          ? "given_anchor"
                          : "given_candidate"},
        {"source", c.cooccurrence.source}};
    j["attack"] = {{"lambda", c.attack.lambda},
                   {"theta", c.attack.theta},
                   {"p", c.attack.cooccurrence_p},
                   {"break_on_breach", c.attack.break_on_breach},
                   {"order", c.attack.order == PopulationOrder::desc_true_time
                                 ? "desc_true_time"
                                 : "asc_true_time"},
                   {"epsilon_margin", c.attack.epsilon_margin},
                   {"seed", c.attack.seed},
                   {"attacker", to_string(c.attacker)},
                   {"random_budget", c.random_budget}};
    if (c.attack.max_kept_actions)
        j["attack"]["max_kept_actions"] = *c.attack.max_kept_actions;
    return j;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_text(const std::string& path, const std::string& text) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

int map_exit(const std::function<void()>& body, std::string* error) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        if (error) *error = e.what();
        return kExitConfig;
    } catch (const CompatibilityError& e) {
        if (error) *error = e.what();
        return kExitCompatibility;
    } catch (const DataError& e) {
        if (error) *error = e.what();
        return kExitData;
    } catch (const Error& e) {
        if (error) *error = e.what();
        return 1;
    }
}

// Shared attack machinery assembled from artifacts on disk.
struct AttackSetup {
    Ontology ontology;
    std::unique_ptr<SurvivalModel> victim;
    std::unique_ptr<RecordEncoder> encoder;
    std::map<CodeId, SynonymSet> synonyms;
    Cohort targets;
};

AttackSetup load_attack_setup(const RunConfig& c) {
    AttackSetup s;
    s.ontology = load_ontology(c.paths.ontology);
    std::vector<CodeId> vocab;
    s.victim = load_model(c.paths.model, nullptr, &vocab);
    const std::string target_path =
        c.split.enabled ? c.paths.target_cohort : c.paths.cohort;
    s.targets = read_cohort(target_path);
    if (s.targets.patients.empty())
        throw DataError("target cohort '" + target_path + "' is empty");

    // Vocabulary drift between artifacts is a hard error: a record the model
    // or the encoder cannot consume means the files come from different runs.
    std::set<CodeId> vocab_set(vocab.begin(), vocab.end());
    for (const Patient& p : s.targets.patients) {
        for (const Visit& v : p.record.visits) {
            for (const CodeId& code : v.codes) {
                if (!vocab_set.count(code))
                    throw CompatibilityError("code '" + code + "' of patient '" +
                                             p.record.id +
                                             "' is missing from the model vocabulary");
                if (!s.ontology.is_leaf(code))
                    throw CompatibilityError("code '" + code + "' of patient '" +
                                             p.record.id +
                                             "' is not a leaf of the ontology");
            }
        }
    }
    s.encoder = std::make_unique<RecordEncoder>(s.ontology, c.encoder);

    const std::string cooc_path = (c.cooccurrence.source == "train" && c.split.enabled)
                                      ? c.paths.train_cohort
                                      : (c.cooccurrence.source == "target" && c.split.enabled)
                                            ? c.paths.target_cohort
                                            : c.paths.cohort;
    const Cohort cooc_cohort = read_cohort(cooc_path);
    const CooccurrenceTable table =
        CooccurrenceTable::build(cooc_cohort, c.cooccurrence.scope);
    s.synonyms = build_synonym_catalog(s.ontology, table, c.attack.cooccurrence_p,
                                       c.cooccurrence.direction);
    return s;
}

PredictionSet predictions_for(const SurvivalModel& model, const Cohort& labels,
                              const Cohort& records) {
    PredictionSet preds;
    for (std::size_t i = 0; i < labels.patients.size(); ++i) {
        const Patient& p = labels.patients[i];
        preds.push_back({p.label.time, p.label.event,
                         model.predict_time(records.patients[i].record)});
    }
    return preds;
}

ordered_json metrics_json(const PredictionSet& preds) {
    ordered_json out;
    PairTallies tallies;
    try {
        out["c_index"] = c_index(preds, &tallies);
    } catch (const NoPermissiblePairs&) {
        out["c_index"] = nullptr;
    }
    try {
        out["mae"] = mae(preds);
    } catch (const NoObservedPatients&) {
        out["mae"] = nullptr;
    }
    out["pairs"] = {{"permissible", tallies.permissible},
                    {"concordant", tallies.concordant},
                    {"discordant", tallies.discordant},
                    {"tied", tallies.tied}};
    return out;
}

}  // namespace

std::string run_config_json(const RunConfig& c) {
    ordered_json j = config_body(c);
    j["out"] = c.out;
    j["paths"] = {{"ontology", c.paths.ontology},
                  {"cohort", c.paths.cohort},
                  {"train_cohort", c.paths.train_cohort},
                  {"target_cohort", c.paths.target_cohort},
                  {"groundtruth", c.paths.groundtruth},
                  {"model", c.paths.model},
                  {"training_report", c.paths.training_report},
                  {"actions", c.paths.actions},
                  {"summary", c.paths.summary},
                  {"adversarial_cohort", c.paths.adversarial_cohort},
                  {"metrics", c.paths.metrics},
                  {"report_dir", c.paths.report_dir}};
    return j.dump(2);
}

std::string run_config_hash(const RunConfig& c) {
    // Paths excluded: moving artifacts must not change the run identity.
    return hex64(fnv1a64(config_body(c).dump()));
}

int run_gen(const RunConfig& config, std::string* error) {
    return map_exit(
        [&] {
            RunConfig c = config;
            c.resolve_paths();
            c.generator.validate();
            const std::string hash = run_config_hash(c);

            write_text(c.paths.ontology, ontology_tsv(c.generator));
            const Ontology ontology = gen_ontology(c.generator);
            GroundTruth gt;
            Cohort cohort = gen_cohort(c.generator, ontology, &gt);
            cohort.config_hash = hash;
            ensure_parent_dir(c.paths.cohort);
            write_cohort(cohort, c.paths.cohort);
            write_text(c.paths.groundtruth, ground_truth_json(gt, hash) + "\n");

            if (c.split.enabled) {
                Cohort train, target;
                train.seed = target.seed = cohort.seed;
                train.config_hash = target.config_hash = hash;
                for (std::size_t i = 0; i < c.split.train; ++i)
                    train.patients.push_back(cohort.patients[i]);
                for (std::size_t i = 0; i < c.split.target; ++i)
                    target.patients.push_back(cohort.patients[c.split.train + i]);
                ensure_parent_dir(c.paths.train_cohort);
                write_cohort(train, c.paths.train_cohort);
                ensure_parent_dir(c.paths.target_cohort);
                write_cohort(target, c.paths.target_cohort);
            }
        },
        error);
}

int run_train(const RunConfig& config, std::string* error) {
    return map_exit(
        [&] {
            RunConfig c = config;
            c.resolve_paths();
            const std::string hash = run_config_hash(c);
            const Ontology ontology = load_ontology(c.paths.ontology);
            const std::string train_path =
                c.split.enabled ? c.paths.train_cohort : c.paths.cohort;
            const Cohort cohort = read_cohort(train_path);
            for (const Patient& p : cohort.patients)
                for (const Visit& v : p.record.visits)
                    for (const CodeId& code : v.codes)
                        if (!ontology.is_leaf(code))
                            throw CompatibilityError(
                                "cohort code '" + code +
                                "' is not a leaf of the provided ontology");

            Featurizer featurizer(ontology.leaves(), c.victim.rho_f);
            TrainingReport report;
            if (c.victim.kind == VictimKind::exponential) {
                ExponentialHazardModel model =
                    train_exponential(cohort, featurizer, c.victim.train, &report);
                ensure_parent_dir(c.paths.model);
                save_model(model, c.paths.model, hash);
            } else {
                DiscreteTimeHazardModel model = train_discrete(
                    cohort, featurizer, c.victim.train, c.victim.intervals, &report);
                ensure_parent_dir(c.paths.model);
                save_model(model, c.paths.model, hash);
            }
            ordered_json rj;
            rj["config_hash"] = hash;
            rj["kind"] = to_string(c.victim.kind);
            rj["train_patients"] = report.train_patients;
            rj["holdout_patients"] = report.holdout_patients;
            if (report.holdout_c_index)
                rj["holdout_c_index"] = *report.holdout_c_index;
            else
                rj["holdout_c_index"] = nullptr;
            rj["epoch_loss"] = report.epoch_loss;
            rj["config"] = json::parse(run_config_json(c));
            write_text(c.paths.training_report, rj.dump(2) + "\n");
        },
        error);
}

namespace {

ordered_json case_summary(const SurvivalModel& victim, const Cohort& targets,
                          const PopulationOutcome& outcome) {
    ordered_json j;
    j["pre"] = metrics_json(predictions_for(victim, targets, targets));
    j["post"] = metrics_json(predictions_for(victim, targets, outcome.adversarial));
    j["attacked_patients"] = outcome.attacked.size();
    std::size_t kept = 0;
    std::map<std::string, std::size_t> terminations;
    std::size_t successes = 0;
    for (const auto& [id, result] : outcome.attacked) {
        (void)id;
        kept += result.kept_actions.size();
        terminations[to_string(result.termination)] += 1;
        if (result.success) ++successes;
    }
    j["kept_actions"] = kept;
    j["successes"] = successes;
    j["terminations"] = terminations;
    j["failures"] = outcome.failures.size();
    j["tmin_start"] = outcome.tmin_start;
    return j;
}

}  // namespace

int run_attack(const RunConfig& config, std::string* error) {
    return map_exit(
        [&] {
            RunConfig c = config;
            c.resolve_paths();
            const std::string hash = run_config_hash(c);
            AttackConfig attack_cfg = c.attack;
            AttackerKind kind = AttackerKind::greedy;
            if (c.attacker == AttackerChoice::nosym) attack_cfg.lambda = 0.0;
            if (c.attacker == AttackerChoice::random) kind = AttackerKind::random;

            const AttackSetup setup = load_attack_setup(c);
            const AttackContext ctx{*setup.victim, *setup.encoder, setup.synonyms};

            bool any_censored = false;
            for (const Patient& p : setup.targets.patients)
                if (!p.label.observed()) any_censored = true;

            ordered_json summary;
            summary["config_hash"] = hash;
            summary["seed"] = c.seed;
            summary["attacker"] = to_string(c.attacker);
            ordered_json cases;
            PopulationOutcome full;  // the ct (or cob) run, kept for artifacts
            for (AttackScope scope :
                 {AttackScope::censored_only, AttackScope::observed_only,
                  AttackScope::all}) {
                PopulationOutcome outcome =
                    population_attack(setup.targets, ctx, attack_cfg, scope, kind,
                                      c.random_budget, nullptr, c.workers);
                const char* name = scope == AttackScope::censored_only ? "c1"
                                   : scope == AttackScope::observed_only ? "c2"
                                                                         : "ct";
                cases[name] = case_summary(*setup.victim, setup.targets, outcome);
                if (scope == AttackScope::all) {
                    if (!any_censored) cases["cob"] = cases["ct"];
                    full = std::move(outcome);
                }
            }
            summary["cases"] = std::move(cases);

            ActionLog log;
            log.meta.config_hash = hash;
            log.meta.seed = c.seed;
            for (const Patient& p : setup.targets.patients) {
                auto it = full.attacked.find(p.record.id);
                if (it == full.attacked.end()) continue;
                auto recs = collect_log_records(p.record.id, it->second);
                log.records.insert(log.records.end(), recs.begin(), recs.end());
            }
            ensure_parent_dir(c.paths.actions);
            write_action_log(log, c.paths.actions);
            ensure_parent_dir(c.paths.adversarial_cohort);
            write_cohort(full.adversarial, c.paths.adversarial_cohort);

            summary["config"] = json::parse(run_config_json(c));
            write_text(c.paths.summary, summary.dump(2) + "\n");
        },
        error);
}

int run_report(const RunConfig& config, std::string* error) {
    return map_exit(
        [&] {
            RunConfig c = config;
            c.resolve_paths();
            const std::string hash = run_config_hash(c);
            const ActionLog log = read_action_log(c.paths.actions);
            if (!log.meta.config_hash.empty() && log.meta.config_hash != hash)
                throw CompatibilityError(
                    "action log was produced under config " + log.meta.config_hash +
                    ", current config is " + hash);
            const std::string target_path =
                c.split.enabled ? c.paths.target_cohort : c.paths.cohort;
            const Cohort cohort = read_cohort(target_path);
            std::size_t max_visit = 1;
            for (const Patient& p : cohort.patients)
                max_visit = std::max(max_visit, p.record.visit_count());
            for (const ActionLogRecord& r : log.records)
                max_visit = std::max(max_visit, r.visit);

            const fs::path dir(c.paths.report_dir);
            fs::create_directories(dir);
            write_text((dir / "code_freq.csv").string(),
                       code_frequency_csv(log.records));
            write_text((dir / "visit_freq.csv").string(),
                       visit_frequency_csv(log.records, max_visit));
            write_text((dir / "heatmap.csv").string(),
                       heatmap_csv(log.records, max_visit));
            write_text((dir / "cases.md").string(),
                       cases_markdown(log.records, cohort));
        },
        error);
}

int run_eval(const RunConfig& config, std::string* error) {
    return map_exit(
        [&] {
            RunConfig c = config;
            c.resolve_paths();
            const AttackSetup setup = load_attack_setup(c);
            ordered_json j =
                metrics_json(predictions_for(*setup.victim, setup.targets, setup.targets));
            j["config_hash"] = run_config_hash(c);
            j["config"] = json::parse(run_config_json(c));
            write_text(c.paths.metrics, j.dump(2) + "\n");
        },
        error);
}

}  // namespace survadv
