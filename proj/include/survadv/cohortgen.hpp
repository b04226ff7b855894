#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "survadv/ehr.hpp"
#include "survadv/ontology.hpp"

namespace survadv {

// Synthetic ontology: a perfect B-ary forest of the given depth under two
// roots (diagnosis-like "DX", drug-like "RX"), with path-encoded node ids
// such as DX.2.0.3.
struct OntologySpec {
    std::size_t branching = 4;
    std::size_t depth = 3;
};

struct CohortSpec {
    std::size_t patients = 400;
    std::size_t visits = 5;
    std::size_t codes_per_visit_min = 4;
    std::size_t codes_per_visit_max = 8;
    // Patients draw most codes from a few preferred leaf-parent branches;
    // this clustering is what gives sibling pairs the high patient-level
    // co-occurrence the synonym filter needs.
    std::size_t branches_per_patient = 2;
    double in_branch_probability = 0.95;
};

struct RiskSpec {
    double high_risk_fraction = 0.15;  // codes carrying nonzero true weight
    double weight_scale = 0.8;
    double rho_f = 0.7;  // recency weighting of the true-risk features
};

struct CensoringSpec {
    double target_fraction = 0.84;
};

struct GeneratorConfig {
    OntologySpec ontology;
    CohortSpec cohort;
    RiskSpec risk;
    CensoringSpec censoring;
    std::uint64_t seed = 1;

    void validate() const;
};

// Generation internals kept for training diagnostics; never handed to the
// attack pipeline.
struct GroundTruth {
    std::map<CodeId, double> weights;  // zero-weight codes omitted
    double censor_rate = 0.0;
    std::map<std::string, double> event_time;
    std::map<std::string, double> censor_time;
};

// Deterministic: equal config (including seed) gives byte-identical TSV.
std::string ontology_tsv(const GeneratorConfig& config);
Ontology gen_ontology(const GeneratorConfig& config);

// Informational kind of a generated code: the RX root holds the drug-like
// hierarchy, everything else is diagnosis-like.
CodeKind generated_code_kind(const Ontology& ontology, const CodeId& code);

// Visit code sets cluster within ontology branches; event times are
// exponential with rate exp(w*.x); censoring is an independent exponential
// whose rate is solved so the expected censored fraction matches the target.
Cohort gen_cohort(const GeneratorConfig& config, const Ontology& ontology,
                  GroundTruth* ground_truth = nullptr);

std::string ground_truth_json(const GroundTruth& gt, const std::string& config_hash);

}  // namespace survadv
