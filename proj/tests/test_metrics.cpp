#include <doctest.h>

#include "oracles.hpp"
#include "survadv/errors.hpp"
#include "survadv/metrics.hpp"
#include "survadv/rng.hpp"

#include <json.hpp>

using namespace survadv;
using testing::c_index_indicator_sum;

TEST_CASE("c-index anchors") {
    SUBCASE("perfect predictions on observed data give 1.0") {
        PredictionSet preds{{1, 1, 1}, {2, 1, 2}, {3, 1, 3}};
        CHECK(c_index(preds) == 1.0);
    }
    SUBCASE("reversed predictions give 0.0, all-tied gives 0.5") {
        PredictionSet reversed{{1, 1, 2}, {2, 1, 1}};
        CHECK(c_index(reversed) == 0.0);
        PredictionSet tied{{1, 1, 5}, {2, 1, 5}};
        CHECK(c_index(tied) == 0.5);
    }
    SUBCASE("the four-patient worked example gives 2/3") {
        // A(T=2,k=1,p=3) B(T=3,k=0,p=2) C(T=5,k=1,p=5) D(T=4,k=0,p=6):
        // permissible = {(A,B),(A,C),(A,D)}, concordant = {(A,C),(A,D)}.
        PredictionSet preds{{2, 1, 3}, {3, 0, 2}, {5, 1, 5}, {4, 0, 6}};
        PairTallies t;
        CHECK(c_index(preds, &t) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(t.permissible == 3);
        CHECK(t.concordant == 2);
        CHECK(t.discordant == 1);
        CHECK(t.tied == 0);
    }
    SUBCASE("censored-censored and uninformative mixed pairs are excluded") {
        PredictionSet preds{{1, 0, 1}, {2, 0, 2}};
        CHECK_THROWS_AS(c_index(preds), NoPermissiblePairs);
        // Observed later than censored: unrankable.
        PredictionSet mixed{{1, 0, 1}, {2, 1, 2}};
        CHECK_THROWS_AS(c_index(mixed), NoPermissiblePairs);
    }
    SUBCASE("ties in true time among observed are excluded") {
        PredictionSet preds{{2, 1, 1}, {2, 1, 9}, {3, 1, 5}};
        PairTallies t;
        c_index(preds, &t);
        CHECK(t.permissible == 2);  // only the two pairs against T=3
    }
}

TEST_CASE("mae") {
    SUBCASE("exact predictions give zero") {
        PredictionSet preds{{1, 1, 1}, {4, 1, 4}};
        CHECK(mae(preds) == 0.0);
    }
    SUBCASE("hand case with a censored patient excluded") {
        PredictionSet preds{{2, 1, 3}, {4, 1, 2}, {10, 0, 0}};
        CHECK(mae(preds) == doctest::Approx(1.5).epsilon(1e-15));
    }
    SUBCASE("adding censored patients never changes MAE") {
        PredictionSet preds{{2, 1, 3}, {4, 1, 2}};
        const double base = mae(preds);
        preds.push_back({7, 0, 123});
        preds.push_back({1, 0, -5});
        CHECK(mae(preds) == base);
    }
    SUBCASE("all censored is an error") {
        PredictionSet preds{{2, 0, 3}};
        CHECK_THROWS_AS(mae(preds), NoObservedPatients);
    }
}

namespace {

PredictionSet random_prediction_set(SplitMix64& rng) {
    const std::size_t n = 2 + rng.below(29);
    PredictionSet preds;
    for (std::size_t i = 0; i < n; ++i) {
        Prediction p;
        // Coarse grids force plenty of ties in both true and predicted time.
        p.time = static_cast<double>(rng.below(8));
        p.event = rng.next_double() < 0.6 ? 1 : 0;
        p.predicted = static_cast<double>(rng.below(6)) * 0.5;
        preds.push_back(p);
    }
    return preds;
}

}  // namespace

TEST_CASE("rule-based c-index equals the indicator-sum oracle exactly") {
    SplitMix64 rng(2024);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const PredictionSet preds = random_prediction_set(rng);
        double rule = -1.0, oracle = -2.0;
        bool rule_threw = false, oracle_threw = false;
        try {
            rule = c_index(preds);
        } catch (const NoPermissiblePairs&) {
            rule_threw = true;
        }
        try {
            oracle = c_index_indicator_sum(preds);
        } catch (const NoPermissiblePairs&) {
            oracle_threw = true;
        }
        REQUIRE(rule_threw == oracle_threw);
        if (!rule_threw) {
            REQUIRE(rule == oracle);  // bitwise equality, same count arithmetic
            ++compared;
        }
    }
    CHECK(compared > 150);
}

TEST_CASE("negating predictions flips the c-index without ties") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + rng.below(20);
        PredictionSet preds;
        for (std::size_t i = 0; i < n; ++i) {
            // Distinct times and predictions: no ties anywhere.
            preds.push_back({static_cast<double>(i) + rng.next_double() * 0.5, 1,
                             rng.next_double() * 100.0});
        }
        PredictionSet negated = preds;
        for (Prediction& p : negated) p.predicted = -p.predicted;
        CHECK(c_index(negated) == doctest::Approx(1.0 - c_index(preds)).epsilon(1e-12));
    }
}

TEST_CASE("metrics are permutation invariant") {
    PredictionSet preds{{2, 1, 3}, {3, 0, 2}, {5, 1, 5}, {4, 0, 6}, {1, 1, 0.5}};
    PredictionSet shuffled{preds[3], preds[0], preds[4], preds[2], preds[1]};
    CHECK(c_index(preds) == c_index(shuffled));
    CHECK(mae(preds) == mae(shuffled));
}

TEST_CASE("metric report JSON carries the pair tallies") {
    PredictionSet preds{{2, 1, 3}, {3, 0, 2}, {5, 1, 5}, {4, 0, 6}};
    const auto j = nlohmann::json::parse(metric_report_json(preds));
    CHECK(j.at("c_index").get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(j.at("pairs").at("permissible").get<int>() == 3);
    CHECK(j.at("mae").is_number());
}
