#include "survadv/victim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "survadv/errors.hpp"
#include "survadv/metrics.hpp"
#include "survadv/rng.hpp"

namespace survadv {

Featurizer::Featurizer(std::vector<CodeId> vocab, double rho_f)
    : vocab_(std::move(vocab)), rho_f_(rho_f) {
    std::sort(vocab_.begin(), vocab_.end());
    vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
    for (std::size_t i = 0; i < vocab_.size(); ++i) index_[vocab_[i]] = i;
    if (!(rho_f_ > 0.0 && rho_f_ <= 1.0))
        throw ConfigError("featurizer rho_f must be in (0, 1]");
}

FeatureVector Featurizer::featurize(const PatientRecord& record) const {
    FeatureVector x(vocab_.size(), 0.0);
    const std::size_t n_visits = record.visit_count();
    for (std::size_t n = 1; n <= n_visits; ++n) {
        const double w = std::pow(rho_f_, static_cast<double>(n_visits - n));
        for (const CodeId& code : record.visits[n - 1].codes) {
            auto it = index_.find(code);
            if (it == index_.end())
                throw UnknownCode("code '" + code + "' not in victim vocabulary");
            x[it->second] += w;
        }
    }
    return x;
}

namespace {

double dot_plus_bias(const FeatureVector& x, const std::vector<double>& w, double b) {
    double eta = b;
    for (std::size_t i = 0; i < x.size(); ++i) eta += w[i] * x[i];
    return eta;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

ExponentialHazardModel::ExponentialHazardModel(Featurizer featurizer,
                                               std::vector<double> weights,
                                               double bias)
    : featurizer_(std::move(featurizer)), weights_(std::move(weights)), bias_(bias),
      trained_(true) {
    if (weights_.size() != featurizer_.dim())
        throw ConfigError("weight vector length does not match vocabulary size");
}

const Featurizer& ExponentialHazardModel::featurizer() const {
    if (!trained_) throw UntrainedModel("exponential model is not parameterized");
    return featurizer_;
}

double ExponentialHazardModel::predict_time(const PatientRecord& record) const {
    if (!trained_) throw UntrainedModel("exponential model is not parameterized");
    double eta = dot_plus_bias(featurizer_.featurize(record), weights_, bias_);
    eta = std::clamp(eta, -700.0, 700.0);
    return std::exp(-eta);  // integral of exp(-lambda t) = 1/lambda
}

std::optional<double> ExponentialHazardModel::survival_probability(
    const PatientRecord& record, double t) const {
    if (!trained_) throw UntrainedModel("exponential model is not parameterized");
    const double eta =
        std::clamp(dot_plus_bias(featurizer_.featurize(record), weights_, bias_),
                   -700.0, 700.0);
    return std::exp(-std::exp(eta) * t);
}

double ExponentialHazardModel::nll(const std::vector<FeatureVector>& x,
                                   const std::vector<SurvivalLabel>& y,
                                   const std::vector<double>& weights, double bias) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double eta = dot_plus_bias(x[i], weights, bias);
        total += std::exp(eta) * y[i].time - y[i].event * eta;
    }
    return total / static_cast<double>(x.size());
}

std::vector<double> ExponentialHazardModel::nll_gradient(
    const std::vector<FeatureVector>& x, const std::vector<SurvivalLabel>& y,
    const std::vector<double>& weights, double bias) {
    std::vector<double> grad(weights.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double eta = dot_plus_bias(x[i], weights, bias);
        const double r = std::exp(eta) * y[i].time - y[i].event;
        for (std::size_t j = 0; j < weights.size(); ++j) grad[j] += r * x[i][j];
        grad.back() += r;
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (double& g : grad) g *= inv_n;
    return grad;
}

DiscreteTimeHazardModel::DiscreteTimeHazardModel(
    Featurizer featurizer, double delta, std::vector<std::vector<double>> weights,
    std::vector<double> biases)
    : featurizer_(std::move(featurizer)), delta_(delta), weights_(std::move(weights)),
      biases_(std::move(biases)), trained_(true) {
    if (biases_.size() < 2) throw ConfigError("discrete model needs K >= 2 intervals");
    if (weights_.size() != biases_.size())
        throw ConfigError("per-interval weight rows must match bias count");
    for (const auto& row : weights_)
        if (row.size() != featurizer_.dim())
            throw ConfigError("weight row length does not match vocabulary size");
    if (!(delta_ > 0.0)) throw ConfigError("interval width must be positive");
}

const Featurizer& DiscreteTimeHazardModel::featurizer() const {
    if (!trained_) throw UntrainedModel("discrete model is not parameterized");
    return featurizer_;
}

std::vector<double> DiscreteTimeHazardModel::hazards(
    const PatientRecord& record) const {
    const FeatureVector x = featurizer_.featurize(record);
    std::vector<double> h(biases_.size());
    for (std::size_t k = 0; k < h.size(); ++k)
        h[k] = sigmoid(dot_plus_bias(x, weights_[k], biases_[k]));
    return h;
}

double DiscreteTimeHazardModel::predict_time(const PatientRecord& record) const {
    if (!trained_) throw UntrainedModel("discrete model is not parameterized");
    const std::vector<double> h = hazards(record);
    double survival = 1.0;
    double expected = 0.0;
    for (double hk : h) {
        survival *= (1.0 - hk);
        expected += survival * delta_;
    }
    return expected;
}

std::optional<double> DiscreteTimeHazardModel::survival_probability(
    const PatientRecord& record, double t) const {
    if (!trained_) throw UntrainedModel("discrete model is not parameterized");
    const std::vector<double> h = hazards(record);
    double survival = 1.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (static_cast<double>(k + 1) * delta_ > t) break;
        survival *= (1.0 - h[k]);
    }
    return survival;
}

namespace {

// Person-interval expansion of one label: number of fully survived intervals
// and (for observed patients) the event interval, all 1-based; 0 means none.
struct IntervalSpan {
    std::size_t survived;  // intervals contributing log(1 - h)
    std::size_t event;     // interval contributing log h, or 0
};

IntervalSpan interval_span(const SurvivalLabel& y, std::size_t k_intervals,
                           double delta) {
    if (y.observed()) {
        auto e = static_cast<std::size_t>(std::ceil(y.time / delta));
        e = std::clamp<std::size_t>(e, 1, k_intervals);
        return {e - 1, e};
    }
    auto s = static_cast<std::size_t>(std::floor(y.time / delta));
    return {std::min(s, k_intervals), 0};
}

}  // namespace

double DiscreteTimeHazardModel::nll(const std::vector<FeatureVector>& x,
                                    const std::vector<SurvivalLabel>& y,
                                    std::size_t k_intervals, double delta,
                                    const std::vector<double>& packed) {
    const std::size_t dim = packed.size() / k_intervals - 1;
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const IntervalSpan span = interval_span(y[i], k_intervals, delta);
        const std::size_t at_risk = std::max(span.survived, span.event);
        for (std::size_t k = 1; k <= at_risk; ++k) {
            const double* wk = packed.data() + (k - 1) * (dim + 1);
            double eta = wk[dim];
            for (std::size_t j = 0; j < dim; ++j) eta += wk[j] * x[i][j];
            // log(1+e^eta) computed stably.
            const double log1pexp =
                eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
            if (k == span.event)
                total += log1pexp - eta;  // -log h
            else
                total += log1pexp;  // -log(1 - h)
        }
    }
    return total / static_cast<double>(x.size());
}

std::vector<double> DiscreteTimeHazardModel::nll_gradient(
    const std::vector<FeatureVector>& x, const std::vector<SurvivalLabel>& y,
    std::size_t k_intervals, double delta, const std::vector<double>& packed) {
    const std::size_t dim = packed.size() / k_intervals - 1;
    std::vector<double> grad(packed.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const IntervalSpan span = interval_span(y[i], k_intervals, delta);
        const std::size_t at_risk = std::max(span.survived, span.event);
        for (std::size_t k = 1; k <= at_risk; ++k) {
            const double* wk = packed.data() + (k - 1) * (dim + 1);
            double eta = wk[dim];
            for (std::size_t j = 0; j < dim; ++j) eta += wk[j] * x[i][j];
            const double residual = sigmoid(eta) - (k == span.event ? 1.0 : 0.0);
            double* gk = grad.data() + (k - 1) * (dim + 1);
            for (std::size_t j = 0; j < dim; ++j) gk[j] += residual * x[i][j];
            gk[dim] += residual;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (double& g : grad) g *= inv_n;
    return grad;
}

const char* to_string(VictimKind kind) {
    return kind == VictimKind::exponential ? "exponential" : "discrete";
}

VictimKind victim_kind_from_string(const std::string& s) {
    if (s == "exponential") return VictimKind::exponential;
    if (s == "discrete") return VictimKind::discrete;
    throw ConfigError("unknown victim kind '" + s + "'");
}

namespace {

struct TrainSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> holdout;
};

TrainSplit split_cohort(std::size_t n, double holdout_fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(seed ^ 0x5e6f70818293a4b5ull);
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_holdout = static_cast<std::size_t>(
        std::floor(holdout_fraction * static_cast<double>(n)));
    TrainSplit split;
    split.holdout.assign(order.begin(), order.begin() + n_holdout);
    split.train.assign(order.begin() + n_holdout, order.end());
    return split;
}

void require_mixed_censoring(const Cohort& cohort) {
    bool any_observed = false, any_censored = false;
    for (const Patient& p : cohort.patients)
        (p.label.observed() ? any_observed : any_censored) = true;
    if (!any_observed || !any_censored)
        throw DegenerateCohort(
            "training cohort must contain both censored and observed patients");
}

std::optional<double> holdout_c_index(const SurvivalModel& model,
                                      const Cohort& cohort,
                                      const std::vector<std::size_t>& holdout) {
    if (holdout.empty()) return std::nullopt;
    PredictionSet preds;
    for (std::size_t i : holdout) {
        const Patient& p = cohort.patients[i];
        preds.push_back({p.label.time, p.label.event, model.predict_time(p.record)});
    }
    try {
        return c_index(preds);
    } catch (const NoPermissiblePairs&) {
        return std::nullopt;
    }
}

}  // namespace

ExponentialHazardModel train_exponential(const Cohort& cohort, Featurizer featurizer,
                                         const TrainConfig& config,
                                         TrainingReport* report) {
    require_mixed_censoring(cohort);
    const TrainSplit split =
        split_cohort(cohort.size(), config.holdout_fraction, config.seed);
    std::vector<FeatureVector> x;
    std::vector<SurvivalLabel> y;
    for (std::size_t i : split.train) {
        x.push_back(featurizer.featurize(cohort.patients[i].record));
        y.push_back(cohort.patients[i].label);
    }
    std::vector<double> w(featurizer.dim(), 0.0);
    double b = 0.0;
    TrainingReport local;
    TrainingReport& rep = report ? *report : local;
    rep.epoch_loss.clear();
    rep.train_patients = split.train.size();
    rep.holdout_patients = split.holdout.size();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss = ExponentialHazardModel::nll(x, y, w, b);
        if (!std::isfinite(loss))
            throw NonFiniteLoss("exponential training diverged at epoch " +
                                std::to_string(epoch));
        rep.epoch_loss.push_back(loss);
        const std::vector<double> grad = ExponentialHazardModel::nll_gradient(x, y, w, b);
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= config.step_size * grad[j];
        b -= config.step_size * grad.back();
    }
    ExponentialHazardModel model(std::move(featurizer), std::move(w), b);
    rep.holdout_c_index = holdout_c_index(model, cohort, split.holdout);
    return model;
}

DiscreteTimeHazardModel train_discrete(const Cohort& cohort, Featurizer featurizer,
                                       const TrainConfig& config,
                                       std::size_t k_intervals,
                                       TrainingReport* report) {
    require_mixed_censoring(cohort);
    if (k_intervals < 2) throw ConfigError("discrete victim needs K >= 2");
    const TrainSplit split =
        split_cohort(cohort.size(), config.holdout_fraction, config.seed);
    std::vector<FeatureVector> x;
    std::vector<SurvivalLabel> y;
    double max_observed = 0.0;
    for (std::size_t i : split.train) {
        x.push_back(featurizer.featurize(cohort.patients[i].record));
        y.push_back(cohort.patients[i].label);
        if (cohort.patients[i].label.observed())
            max_observed = std::max(max_observed, cohort.patients[i].label.time);
    }
    if (!(max_observed > 0.0))
        throw DegenerateCohort("no positive observed time in the training split");
    const double delta =
        1.5 * max_observed / static_cast<double>(k_intervals);
    const std::size_t dim = featurizer.dim();
    std::vector<double> packed(k_intervals * (dim + 1), 0.0);
    TrainingReport local;
    TrainingReport& rep = report ? *report : local;
    rep.epoch_loss.clear();
    rep.train_patients = split.train.size();
    rep.holdout_patients = split.holdout.size();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss =
            DiscreteTimeHazardModel::nll(x, y, k_intervals, delta, packed);
        if (!std::isfinite(loss))
            throw NonFiniteLoss("discrete training diverged at epoch " +
                                std::to_string(epoch));
        rep.epoch_loss.push_back(loss);
        const std::vector<double> grad =
            DiscreteTimeHazardModel::nll_gradient(x, y, k_intervals, delta, packed);
        for (std::size_t j = 0; j < packed.size(); ++j)
            packed[j] -= config.step_size * grad[j];
    }
    std::vector<std::vector<double>> w(k_intervals, std::vector<double>(dim));
    std::vector<double> biases(k_intervals);
    for (std::size_t k = 0; k < k_intervals; ++k) {
        for (std::size_t j = 0; j < dim; ++j) w[k][j] = packed[k * (dim + 1) + j];
        biases[k] = packed[k * (dim + 1) + dim];
    }
    DiscreteTimeHazardModel model(std::move(featurizer), delta, std::move(w),
                                  std::move(biases));
    rep.holdout_c_index = holdout_c_index(model, cohort, split.holdout);
    return model;
}

void save_model(const SurvivalModel& model, const std::string& path,
                const std::string& config_hash) {
    nlohmann::ordered_json j;
    if (const auto* exp = dynamic_cast<const ExponentialHazardModel*>(&model)) {
        j["kind"] = "exponential";
        j["config_hash"] = config_hash;
        j["rho_f"] = exp->featurizer().rho_f();
        j["vocab"] = exp->featurizer().vocab();
        j["weights"] = exp->weights();
        j["bias"] = exp->bias();
    } else if (const auto* disc = dynamic_cast<const DiscreteTimeHazardModel*>(&model)) {
        j["kind"] = "discrete";
        j["config_hash"] = config_hash;
        j["rho_f"] = disc->featurizer().rho_f();
        j["vocab"] = disc->featurizer().vocab();
        j["delta"] = disc->delta();
        j["weights"] = disc->weights();
        j["biases"] = disc->biases();
    } else {
        throw Error("cannot serialize unknown model type");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file '" + path + "'");
    out << j.dump(2) << "\n";
}

std::unique_ptr<SurvivalModel> load_model(const std::string& path,
                                          std::string* config_hash,
                                          std::vector<CodeId>* vocab) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid model file '" + path + "': " + e.what());
    }
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (config_hash) *config_hash = j.value("config_hash", std::string());
        auto codes = j.at("vocab").get<std::vector<CodeId>>();
        if (vocab) *vocab = codes;
        Featurizer feat(codes, j.at("rho_f").get<double>());
        if (kind == "exponential") {
            return std::make_unique<ExponentialHazardModel>(
                std::move(feat), j.at("weights").get<std::vector<double>>(),
                j.at("bias").get<double>());
        }
        if (kind == "discrete") {
            return std::make_unique<DiscreteTimeHazardModel>(
                std::move(feat), j.at("delta").get<double>(),
                j.at("weights").get<std::vector<std::vector<double>>>(),
                j.at("biases").get<std::vector<double>>());
        }
        throw ParseError("unknown model kind '" + kind + "' in '" + path + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model file '" + path + "' is missing fields: " + e.what());
    }
}

}  // namespace survadv
