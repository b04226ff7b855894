#pragma once

#include <optional>

#include "survadv/ehr.hpp"

namespace survadv {

// Black-box victim contract. Attack code depends on this header only, never
// on concrete model headers, so victims stay opaque to the attacker.
class SurvivalModel {
  public:
    virtual ~SurvivalModel() = default;

    // Predicted survival time: the integral of the survival function.
    // Deterministic and side-effect-free; safe to call concurrently.
    virtual double predict_time(const PatientRecord& record) const = 0;

    // P(survive beyond t | record); nullopt when the model has no survival
    // function surface.
    virtual std::optional<double> survival_probability(const PatientRecord& record,
                                                       double t) const {
        (void)record;
        (void)t;
        return std::nullopt;
    }
};

}  // namespace survadv
