#pragma once

// Shared fixtures for the unit suites: tiny ontologies, record builders, and
// a transparent stub victim whose predictions are trivially traceable.

#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "survadv/ehr.hpp"
#include "survadv/ontology.hpp"
#include "survadv/survival_model.hpp"

namespace survadv::testing {

inline PatientRecord make_record(
    std::string id, std::initializer_list<std::vector<CodeId>> visits) {
    PatientRecord r;
    r.id = std::move(id);
    for (const auto& codes : visits) r.visits.emplace_back(codes);
    return r;
}

// Two-branch toy forest:
//   P -> {a, b, c}, Q -> {x, y, z}
inline Ontology toy_ontology() {
    return Ontology::from_edges({{"P", "ROOT"},
                                 {"Q", "ROOT"},
                                 {"a", "P"},
                                 {"b", "P"},
                                 {"c", "P"},
                                 {"x", "Q"},
                                 {"y", "Q"},
                                 {"z", "Q"}});
}

// F(V) = base - sum of per-occurrence code weights. Removing a code with
// weight w changes the prediction by +w; adding by -w. Implements only the
// black-box interface, so it doubles as the opacity check for attack code.
class StubVictim : public SurvivalModel {
  public:
    StubVictim(double base, std::map<CodeId, double> weights)
        : base_(base), weights_(std::move(weights)) {}

    double predict_time(const PatientRecord& record) const override {
        double t = base_;
        for (const Visit& v : record.visits)
            for (const CodeId& code : v.codes) {
                auto it = weights_.find(code);
                if (it != weights_.end()) t -= it->second;
            }
        return t;
    }

  private:
    double base_;
    std::map<CodeId, double> weights_;
};

}  // namespace survadv::testing
