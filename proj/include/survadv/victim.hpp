#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "survadv/ehr.hpp"
#include "survadv/survival_model.hpp"

namespace survadv {

using FeatureVector = std::vector<double>;

// Bag-of-codes featurization with visit recency weighting: entry j holds
// sum over visits n of rho_f^(N-n) * [code j in visit n]. Later visits weigh
// more, so perturbations near the end of the history move predictions most.
class Featurizer {
  public:
    Featurizer() = default;
    Featurizer(std::vector<CodeId> vocab, double rho_f);

    FeatureVector featurize(const PatientRecord& record) const;

    const std::vector<CodeId>& vocab() const { return vocab_; }
    double rho_f() const { return rho_f_; }
    std::size_t dim() const { return vocab_.size(); }
    bool knows(const CodeId& code) const { return index_.count(code) > 0; }

  private:
    std::vector<CodeId> vocab_;
    std::map<CodeId, std::size_t> index_;
    double rho_f_ = 0.7;
};

struct TrainConfig {
    double step_size = 0.5;
    std::size_t epochs = 400;
    double holdout_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct TrainingReport {
    std::vector<double> epoch_loss;      // mean NLL per epoch, before the step
    std::optional<double> holdout_c_index;
    std::size_t train_patients = 0;
    std::size_t holdout_patients = 0;
};

// Constant-hazard victim: lambda = exp(w.x + b), S(t) = exp(-lambda t),
// predicted time = 1/lambda in closed form. Linear enough to hand-check
// attack traces exactly.
class ExponentialHazardModel : public SurvivalModel {
  public:
    ExponentialHazardModel() = default;
    ExponentialHazardModel(Featurizer featurizer, std::vector<double> weights,
                           double bias);

    double predict_time(const PatientRecord& record) const override;
    std::optional<double> survival_probability(const PatientRecord& record,
                                               double t) const override;

    const Featurizer& featurizer() const;
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

    // Mean censored negative log-likelihood and its analytic gradient
    // (gradient layout: weights then bias). Exposed for training and for
    // finite-difference verification.
    static double nll(const std::vector<FeatureVector>& x,
                      const std::vector<SurvivalLabel>& y,
                      const std::vector<double>& weights, double bias);
    static std::vector<double> nll_gradient(const std::vector<FeatureVector>& x,
                                            const std::vector<SurvivalLabel>& y,
                                            const std::vector<double>& weights,
                                            double bias);

  private:
    Featurizer featurizer_;
    std::vector<double> weights_;
    double bias_ = 0.0;
    bool trained_ = false;
};

// Discrete-time hazard victim: K intervals of width delta with per-interval
// logistic hazards h_k = sigmoid(w_k.x + b_k); predicted time is the
// discretized integral sum_k S(t_k) * delta with S(t_k) = prod_{j<=k}(1-h_j).
class DiscreteTimeHazardModel : public SurvivalModel {
  public:
    DiscreteTimeHazardModel() = default;
    DiscreteTimeHazardModel(Featurizer featurizer, double delta,
                            std::vector<std::vector<double>> weights,
                            std::vector<double> biases);

    double predict_time(const PatientRecord& record) const override;
    std::optional<double> survival_probability(const PatientRecord& record,
                                               double t) const override;

    const Featurizer& featurizer() const;
    std::size_t intervals() const { return biases_.size(); }
    double delta() const { return delta_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    const std::vector<double>& biases() const { return biases_; }

    // Mean censored discrete-time NLL over person-intervals; parameters are
    // packed row-major as K*(dim+1) values: w_1, b_1, w_2, b_2, ...
    static double nll(const std::vector<FeatureVector>& x,
                      const std::vector<SurvivalLabel>& y, std::size_t k_intervals,
                      double delta, const std::vector<double>& packed);
    static std::vector<double> nll_gradient(const std::vector<FeatureVector>& x,
                                            const std::vector<SurvivalLabel>& y,
                                            std::size_t k_intervals, double delta,
                                            const std::vector<double>& packed);

  private:
    std::vector<double> hazards(const PatientRecord& record) const;

    Featurizer featurizer_;
    double delta_ = 0.0;
    std::vector<std::vector<double>> weights_;  // K x dim
    std::vector<double> biases_;                // K
    bool trained_ = false;
};

enum class VictimKind { exponential, discrete };

const char* to_string(VictimKind kind);
VictimKind victim_kind_from_string(const std::string& s);

// Full-batch gradient descent on the censored negative log-likelihood.
// Deterministic: fixed step size, fixed epoch count, seeded holdout split.
// Throws DegenerateCohort when the cohort is all-censored or all-observed,
// NonFiniteLoss when the loss leaves the finite range.
ExponentialHazardModel train_exponential(const Cohort& cohort, Featurizer featurizer,
                                         const TrainConfig& config,
                                         TrainingReport* report = nullptr);

// K intervals covering [0, 1.5 * max observed time] of the training cohort.
DiscreteTimeHazardModel train_discrete(const Cohort& cohort, Featurizer featurizer,
                                       const TrainConfig& config,
                                       std::size_t k_intervals = 20,
                                       TrainingReport* report = nullptr);

// Model file round-trip (JSON: kind, vocab, parameter arrays, featurizer
// config). Serialization uses shortest round-trip decimals, so save/load
// reproduces parameters bit-exactly.
void save_model(const SurvivalModel& model, const std::string& path,
                const std::string& config_hash);
std::unique_ptr<SurvivalModel> load_model(const std::string& path,
                                          std::string* config_hash = nullptr,
                                          std::vector<CodeId>* vocab = nullptr);

}  // namespace survadv
