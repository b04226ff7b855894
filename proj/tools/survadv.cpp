// survadv: adversarial robustness testing for survival models on coded
// event sequences. Subcommands: gen, train, attack, report, eval.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "survadv/errors.hpp"
#include "survadv/pipeline.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
};

struct AttackOptions {
    std::optional<std::string> attacker;
    std::optional<std::size_t> budget;
    std::optional<double> lambda;
    std::optional<double> theta;
};

int load_and_run(const GlobalOptions& g, const AttackOptions* a,
                 const std::optional<std::string>& victim_kind,
                 int (*runner)(const survadv::RunConfig&, std::string*)) {
    survadv::RunConfig config;
    std::string error;
    try {
        config = g.config_path.empty() ? survadv::default_run_config()
                                       : survadv::load_run_config(g.config_path);
        if (g.seed) survadv::apply_master_seed(config, *g.seed);
        if (g.out) {
            config.out = *g.out;
            config.paths = {};
            config.resolve_paths();
        }
        if (g.workers) config.workers = *g.workers;
        if (victim_kind)
            config.victim.kind = survadv::victim_kind_from_string(*victim_kind);
        if (a) {
            if (a->attacker) config.attacker = survadv::attacker_from_string(*a->attacker);
            if (a->budget) config.random_budget = *a->budget;
            if (a->lambda) config.attack.lambda = *a->lambda;
            if (a->theta) config.attack.theta = *a->theta;
            config.attack.validate();
        }
    } catch (const survadv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return survadv::kExitConfig;
    }
    const int code = runner(config, &error);
    if (code != survadv::kExitOk) std::cerr << "error: " << error << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial robustness testing for survival models over "
                 "longitudinal coded event sequences"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions global;
    app.add_option("--config", global.config_path, "Run configuration JSON file");
    app.add_option("--seed", global.seed, "Master seed (overrides the config)");
    app.add_option("--out", global.out, "Output directory (overrides the config)");
    app.add_option("--workers", global.workers, "Worker threads for the attack");

    auto* gen = app.add_subcommand(
        "gen", "Generate ontology, cohort and ground truth (optionally split)");
    auto* train = app.add_subcommand("train", "Fit a victim model on the cohort");
    std::optional<std::string> victim_kind;
    train->add_option("--kind", victim_kind, "Victim kind: exponential|discrete");

    auto* attack = app.add_subcommand(
        "attack", "Run the population attack and write logs plus a summary");
    AttackOptions attack_opts;
    attack->add_option("--attacker", attack_opts.attacker,
                       "Attacker: greedy|nosym|random");
    attack->add_option("--budget", attack_opts.budget,
                       "Kept-action budget for the random attacker");
    attack->add_option("--lambda", attack_opts.lambda,
                       "Composite-score exponent (0 = saliency-only ordering)");
    attack->add_option("--theta", attack_opts.theta, "Similarity threshold");

    auto* report = app.add_subcommand(
        "report", "Aggregate an action log into frequency tables and case summaries");
    auto* eval = app.add_subcommand("eval", "Metrics of a model over a cohort");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) return load_and_run(global, nullptr, std::nullopt, survadv::run_gen);
    if (train->parsed())
        return load_and_run(global, nullptr, victim_kind, survadv::run_train);
    if (attack->parsed())
        return load_and_run(global, &attack_opts, std::nullopt, survadv::run_attack);
    if (report->parsed())
        return load_and_run(global, nullptr, std::nullopt, survadv::run_report);
    if (eval->parsed()) return load_and_run(global, nullptr, std::nullopt, survadv::run_eval);
    return survadv::kExitConfig;
}
