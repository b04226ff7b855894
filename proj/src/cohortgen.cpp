#include "survadv/cohortgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "survadv/errors.hpp"
#include "survadv/rng.hpp"
#include "survadv/victim.hpp"

namespace survadv {

void GeneratorConfig::validate() const {
    if (ontology.branching < 2) throw ConfigError("generator.ontology.branching must be >= 2");
    if (ontology.depth < 2) throw ConfigError("generator.ontology.depth must be >= 2");
    if (cohort.patients == 0) throw ConfigError("generator.cohort.patients must be >= 1");
    if (cohort.visits == 0) throw ConfigError("generator.cohort.visits must be >= 1");
    if (cohort.codes_per_visit_min == 0)
        throw ConfigError("generator.cohort.codes_per_visit_min must be >= 1");
    if (cohort.codes_per_visit_max < cohort.codes_per_visit_min)
        throw ConfigError("generator.cohort codes_per_visit range is inverted");
    if (cohort.branches_per_patient == 0)
        throw ConfigError("generator.cohort.branches_per_patient must be >= 1");
    if (!(cohort.in_branch_probability >= 0.0 && cohort.in_branch_probability <= 1.0))
        throw ConfigError("generator.cohort.in_branch_probability must be in [0, 1]");
    if (!(risk.high_risk_fraction > 0.0 && risk.high_risk_fraction <= 1.0))
        throw ConfigError("generator.risk.high_risk_fraction must be in (0, 1]");
    if (!(risk.rho_f > 0.0 && risk.rho_f <= 1.0))
        throw ConfigError("generator.risk.rho_f must be in (0, 1]");
    if (!(censoring.target_fraction > 0.0 && censoring.target_fraction < 1.0))
        throw ConfigError("generator.censoring.target_fraction must be in (0, 1)");
}

namespace {

void emit_subtree(std::ostringstream& out, const std::string& node,
                  std::size_t level, const OntologySpec& spec) {
    if (level == spec.depth) return;
    for (std::size_t b = 0; b < spec.branching; ++b) {
        const std::string child = node + "." + std::to_string(b);
        out << child << '\t' << node << '\n';
        emit_subtree(out, child, level + 1, spec);
    }
}

}  // namespace

std::string ontology_tsv(const GeneratorConfig& config) {
    config.validate();
    std::ostringstream out;
    for (const char* root : {"DX", "RX"}) {
        out << root << '\t' << Ontology::kRoot << '\n';
        emit_subtree(out, root, 0, config.ontology);
    }
    return out.str();
}

Ontology gen_ontology(const GeneratorConfig& config) {
    return parse_ontology(ontology_tsv(config), "<generated>");
}

CodeKind generated_code_kind(const Ontology& ontology, const CodeId& code) {
    return ontology.root_of(code) == "RX" ? CodeKind::drug : CodeKind::diagnosis;
}

namespace {

std::string patient_id(std::size_t index, std::size_t total) {
    std::size_t width = 1;
    for (std::size_t v = total; v >= 10; v /= 10) ++width;
    width = std::max<std::size_t>(width, 4);
    std::string digits = std::to_string(index + 1);
    return "p" + std::string(width - digits.size(), '0') + digits;
}

// Solves for the global censoring rate c such that the mean of
// c / (c + rate_i) over patients equals the target censored fraction.
double solve_censor_rate(const std::vector<double>& event_rates, double target) {
    auto censored_fraction = [&](double c) {
        double total = 0.0;
        for (double r : event_rates) total += c / (c + r);
        return total / static_cast<double>(event_rates.size());
    };
    double lo = 1e-12, hi = 1e12;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = std::sqrt(lo * hi);  // bisect in log space
        if (censored_fraction(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

}  // namespace

Cohort gen_cohort(const GeneratorConfig& config, const Ontology& ontology,
                  GroundTruth* ground_truth) {
    config.validate();
    const std::vector<CodeId>& leaves = ontology.leaves();

    // Leaf-parents define the branches patients cluster in.
    std::vector<std::string> branches;
    {
        std::set<std::string> parents;
        for (const CodeId& leaf : leaves) parents.insert(ontology.parent(leaf));
        branches.assign(parents.begin(), parents.end());
    }

    // True per-code risk weights: a sparse subset carries weight, both signs.
    SplitMix64 risk_rng(config.seed ^ 0x7261736b5f772aull);
    std::map<CodeId, double> weights;
    for (const CodeId& leaf : leaves) {
        if (risk_rng.next_double() < config.risk.high_risk_fraction)
            weights[leaf] = config.risk.weight_scale * risk_rng.next_normal();
    }

    // Pass 1: records.
    SplitMix64 record_rng(config.seed ^ 0x7265636f7264732aull);
    Cohort cohort;
    cohort.seed = config.seed;
    for (std::size_t p = 0; p < config.cohort.patients; ++p) {
        PatientRecord record;
        record.id = patient_id(p, config.cohort.patients);
        std::vector<std::string> preferred;
        for (std::size_t b = 0; b < config.cohort.branches_per_patient; ++b)
            preferred.push_back(branches[record_rng.below(branches.size())]);
        for (std::size_t n = 0; n < config.cohort.visits; ++n) {
            const std::size_t span =
                config.cohort.codes_per_visit_max - config.cohort.codes_per_visit_min + 1;
            const std::size_t count =
                config.cohort.codes_per_visit_min + record_rng.below(span);
            Visit visit;
            for (std::size_t c = 0; c < count; ++c) {
                // A handful of draw attempts; a saturated branch falls back
                // to the global pool, a saturated visit simply stays smaller.
                for (int attempt = 0; attempt < 8; ++attempt) {
                    CodeId code;
                    if (record_rng.next_double() < config.cohort.in_branch_probability) {
                        const std::string& branch =
                            preferred[record_rng.below(preferred.size())];
                        const auto& kids = ontology.children(branch);
                        code = kids[record_rng.below(kids.size())];
                    } else {
                        code = leaves[record_rng.below(leaves.size())];
                    }
                    if (visit.insert(code)) break;
                }
            }
            record.visits.push_back(std::move(visit));
        }
        cohort.patients.push_back({std::move(record), SurvivalLabel{}});
    }

    // Pass 2: event rates from the true risk model.
    Featurizer featurizer(leaves, config.risk.rho_f);
    std::vector<double> w(leaves.size(), 0.0);
    for (std::size_t j = 0; j < leaves.size(); ++j) {
        auto it = weights.find(leaves[j]);
        if (it != weights.end()) w[j] = it->second;
    }
    std::vector<double> event_rates;
    for (const Patient& patient : cohort.patients) {
        const FeatureVector x = featurizer.featurize(patient.record);
        double eta = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) eta += w[j] * x[j];
        event_rates.push_back(std::exp(std::clamp(eta, -30.0, 30.0)));
    }
    const double censor_rate =
        solve_censor_rate(event_rates, config.censoring.target_fraction);

    // Pass 3: labels.
    SplitMix64 time_rng(config.seed ^ 0x74696d65735f2a2aull);
    GroundTruth gt;
    gt.weights = weights;
    gt.censor_rate = censor_rate;
    for (std::size_t p = 0; p < cohort.patients.size(); ++p) {
        Patient& patient = cohort.patients[p];
        const double event_time = time_rng.next_exponential(event_rates[p]);
        const double censor_time = time_rng.next_exponential(censor_rate);
        patient.label.time = std::min(event_time, censor_time);
        patient.label.event = event_time <= censor_time ? 1 : 0;
        gt.event_time[patient.record.id] = event_time;
        gt.censor_time[patient.record.id] = censor_time;
    }
    if (ground_truth) *ground_truth = std::move(gt);
    return cohort;
}

std::string ground_truth_json(const GroundTruth& gt, const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["censor_rate"] = gt.censor_rate;
    nlohmann::ordered_json weights = nlohmann::ordered_json::object();
    for (const auto& [code, w] : gt.weights) weights[code] = w;
    j["weights"] = std::move(weights);
    nlohmann::ordered_json events = nlohmann::ordered_json::object();
    for (const auto& [id, t] : gt.event_time) events[id] = t;
    j["event_time"] = std::move(events);
    nlohmann::ordered_json censors = nlohmann::ordered_json::object();
    for (const auto& [id, t] : gt.censor_time) censors[id] = t;
    j["censor_time"] = std::move(censors);
    return j.dump(2);
}

}  // namespace survadv
