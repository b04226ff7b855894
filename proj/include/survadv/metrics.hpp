#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace survadv {

// One patient's evaluation row: true time, event indicator, predicted time.
struct Prediction {
    double time = 0.0;
    int event = 0;
    double predicted = 0.0;
};

using PredictionSet = std::vector<Prediction>;

struct PairTallies {
    std::int64_t permissible = 0;
    std::int64_t concordant = 0;
    std::int64_t discordant = 0;
    std::int64_t tied = 0;
};

// Harrell's concordance index under the censoring pair rules:
//   - observed-observed pairs are ranked by true time (ties in true time are
//     not rankable and are excluded);
//   - censored-censored pairs are excluded;
//   - a censored/observed pair is permissible only when the observed member's
//     time is strictly earlier.
// Returns (concordant + 0.5 * tied) / permissible. Throws NoPermissiblePairs.
double c_index(const PredictionSet& preds, PairTallies* tallies = nullptr);

// Mean absolute error of predicted times over observed patients only.
// Throws NoObservedPatients.
double mae(const PredictionSet& preds);

// {"c_index":..., "mae":..., "pairs":{...}} as a JSON string. MAE is null
// when no patient is observed.
std::string metric_report_json(const PredictionSet& preds);

}  // namespace survadv
