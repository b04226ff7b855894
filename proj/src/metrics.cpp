#include "survadv/metrics.hpp"

#include <cmath>

#include <json.hpp>

#include "survadv/errors.hpp"

namespace survadv {

namespace {

enum class PairClass { concordant, discordant, tied, excluded };

// Classifies the unordered pair {a, b} by the censoring rules. `a` and `b`
// may arrive in any order; ranking is by the earlier true time.
PairClass classify_pair(const Prediction& a, const Prediction& b) {
    const bool a_obs = a.event == 1;
    const bool b_obs = b.event == 1;
    if (!a_obs && !b_obs) return PairClass::excluded;  // unrankable

    const Prediction* earlier = nullptr;
    const Prediction* later = nullptr;
    if (a_obs && b_obs) {
        if (a.time == b.time) return PairClass::excluded;  // no defined order
        earlier = a.time < b.time ? &a : &b;
        later = a.time < b.time ? &b : &a;
    } else {
        // Mixed pair: rankable only when the observed member's event happened
        // strictly before the censored member's last known survival time.
        const Prediction& obs = a_obs ? a : b;
        const Prediction& cen = a_obs ? b : a;
        if (!(obs.time < cen.time)) return PairClass::excluded;
        earlier = &obs;
        later = &cen;
    }
    if (earlier->predicted < later->predicted) return PairClass::concordant;
    if (earlier->predicted == later->predicted) return PairClass::tied;
    return PairClass::discordant;
}

}  // namespace

double c_index(const PredictionSet& preds, PairTallies* tallies) {
    PairTallies t;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t j = i + 1; j < preds.size(); ++j) {
            switch (classify_pair(preds[i], preds[j])) {
                case PairClass::concordant:
                    ++t.permissible;
                    ++t.concordant;
                    break;
                case PairClass::discordant:
                    ++t.permissible;
                    ++t.discordant;
                    break;
                case PairClass::tied:
                    ++t.permissible;
                    ++t.tied;
                    break;
                case PairClass::excluded:
                    break;
            }
        }
    }
    if (tallies) *tallies = t;
    if (t.permissible == 0)
        throw NoPermissiblePairs("no rankable pair under the censoring rules");
    return (static_cast<double>(t.concordant) + 0.5 * static_cast<double>(t.tied)) /
           static_cast<double>(t.permissible);
}

double mae(const PredictionSet& preds) {
    double total = 0.0;
    std::int64_t n_observed = 0;
    for (const Prediction& p : preds) {
        if (p.event != 1) continue;
        total += std::abs(p.time - p.predicted);
        ++n_observed;
    }
    if (n_observed == 0)
        throw NoObservedPatients("MAE undefined without observed patients");
    return total / static_cast<double>(n_observed);
}

std::string metric_report_json(const PredictionSet& preds) {
    nlohmann::ordered_json j;
    PairTallies t;
    j["c_index"] = c_index(preds, &t);
    try {
        j["mae"] = mae(preds);
    } catch (const NoObservedPatients&) {
        j["mae"] = nullptr;
    }
    j["pairs"] = {{"permissible", t.permissible},
                  {"concordant", t.concordant},
                  {"discordant", t.discordant},
                  {"tied", t.tied}};
    return j.dump();
}

}  // namespace survadv
