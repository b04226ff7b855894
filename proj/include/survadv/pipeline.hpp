#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "survadv/attack.hpp"
#include "survadv/cohortgen.hpp"
#include "survadv/similarity.hpp"
#include "survadv/victim.hpp"

namespace survadv {

// Exit-code contract shared by the CLI and the command runners.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCompatibility = 3;
inline constexpr int kExitData = 4;

enum class AttackerChoice { greedy, nosym, random };

const char* to_string(AttackerChoice a);
AttackerChoice attacker_from_string(const std::string& s);

// Optional train/target partition of the generated cohort.
struct SplitSpec {
    bool enabled = false;
    std::size_t train = 0;
    std::size_t target = 0;
};

struct CooccurrenceConfig {
    CooccurrenceScope scope = CooccurrenceScope::record;
    CooccurrenceDirection direction = CooccurrenceDirection::given_anchor;
    // Cohort the statistics are mined from; the training cohort by default so
    // attack-set statistics never leak into synonym selection.
    std::string source = "train";  // train | target
};

struct VictimConfig {
    VictimKind kind = VictimKind::exponential;
    double rho_f = 0.7;
    TrainConfig train;
    std::size_t intervals = 20;  // discrete victim only
};

// One JSON document drives every command; unknown keys are rejected and
// missing keys take the documented defaults. The master seed feeds every
// module-level seed unless a module overrides its own.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string out = "runs/default";
    std::size_t workers = 1;
    GeneratorConfig generator;
    SplitSpec split;
    EncoderConfig encoder;
    VictimConfig victim;
    CooccurrenceConfig cooccurrence;
    AttackConfig attack;
    AttackerChoice attacker = AttackerChoice::greedy;
    std::size_t random_budget = 10;

    // Artifact locations; empty entries resolve to defaults under `out`.
    struct Paths {
        std::string ontology;
        std::string cohort;
        std::string train_cohort;
        std::string target_cohort;
        std::string groundtruth;
        std::string model;
        std::string training_report;
        std::string actions;
        std::string summary;
        std::string adversarial_cohort;
        std::string metrics;
        std::string report_dir;
    } paths;

    void resolve_paths();
};

RunConfig default_run_config();
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Rewrites the master seed and every module seed derived from it (generator,
// encoder, victim training, attack), as the --seed flag does.
void apply_master_seed(RunConfig& config, std::uint64_t seed);

// Effective configuration as JSON (defaults filled in), and its fingerprint.
// Paths and the output directory are excluded from the hash: artifacts are
// "the same run" wherever they live on disk.
std::string run_config_json(const RunConfig& config);
std::string run_config_hash(const RunConfig& config);

// Command runners shared by the CLI and the test suites. Each returns an
// exit code per the contract above and writes its artifacts under the
// configured paths.
int run_gen(const RunConfig& config, std::string* error = nullptr);
int run_train(const RunConfig& config, std::string* error = nullptr);
int run_attack(const RunConfig& config, std::string* error = nullptr);
int run_report(const RunConfig& config, std::string* error = nullptr);
int run_eval(const RunConfig& config, std::string* error = nullptr);

}  // namespace survadv
