#include "survadv/similarity.hpp"

#include <cmath>

#include "survadv/errors.hpp"
#include "survadv/rng.hpp"

namespace survadv {

void EncoderConfig::validate() const {
    if (dim == 0) throw ConfigError("encoder.dim must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ConfigError("encoder.gamma must be in (0, 1]");
    if (!(rho > 0.0 && rho <= 1.0))
        throw ConfigError("encoder.rho must be in (0, 1]");
}

namespace {

// Seeded pseudo-random unit vector for one ontology node.
EmbeddingVector node_vector(const std::string& node_id, const EncoderConfig& cfg) {
    SplitMix64 rng(fnv1a64(node_id) ^ (cfg.seed * 0x9e3779b97f4a7c15ull + 1));
    EmbeddingVector v(cfg.dim);
    double norm2 = 0.0;
    for (double& x : v) {
        x = rng.next_normal();
        norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

}  // namespace

RecordEncoder::RecordEncoder(const Ontology& ontology, EncoderConfig config)
    : config_(config) {
    config_.validate();
    // Node vectors are only needed transiently; what encode() uses are the
    // per-leaf sums over the ancestor chain.
    std::map<std::string, EmbeddingVector> node_vectors;
    auto vector_of = [&](const std::string& id) -> const EmbeddingVector& {
        auto it = node_vectors.find(id);
        if (it == node_vectors.end())
            it = node_vectors.emplace(id, node_vector(id, config_)).first;
        return it->second;
    };
    for (const CodeId& leaf : ontology.leaves()) {
        EmbeddingVector e(config_.dim, 0.0);
        const std::size_t leaf_depth = ontology.depth(leaf);
        auto accumulate = [&](const std::string& node) {
            const double w =
                std::pow(config_.gamma,
                         static_cast<double>(leaf_depth - ontology.depth(node)));
            const EmbeddingVector& u = vector_of(node);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += w * u[i];
        };
        accumulate(leaf);
        for (const std::string& anc : ontology.ancestors(leaf)) accumulate(anc);
        code_embeddings_.emplace(leaf, std::move(e));
    }
}

const EmbeddingVector& RecordEncoder::code_embedding(const CodeId& code) const {
    auto it = code_embeddings_.find(code);
    if (it == code_embeddings_.end())
        throw UnknownCode("code '" + code + "' is not a leaf of the encoder's ontology");
    return it->second;
}

EmbeddingVector RecordEncoder::encode(const PatientRecord& record) const {
    if (record.total_codes() == 0)
        throw DegenerateRecord("record '" + record.id +
                               "' has no codes; embedding undefined");
    const std::size_t n_visits = record.visit_count();
    EmbeddingVector e(config_.dim, 0.0);
    for (std::size_t n = 1; n <= n_visits; ++n) {
        const Visit& v = record.visits[n - 1];
        if (v.empty()) continue;  // empty visit contributes the zero vector
        const double visit_weight =
            std::pow(config_.rho, static_cast<double>(n_visits - n)) /
            static_cast<double>(v.size());
        for (const CodeId& code : v.codes) {
            const EmbeddingVector& c = code_embedding(code);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += visit_weight * c[i];
        }
    }
    double norm2 = 0.0;
    for (double x : e) norm2 += x * x;
    if (!(norm2 > 1e-300))
        throw DegenerateRecord("record '" + record.id + "' embeds to the zero vector");
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : e) x *= inv;
    return e;
}

double RecordEncoder::similarity(const PatientRecord& a, const PatientRecord& b) const {
    return cosine_similarity(encode(a), encode(b));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size())
        throw PreconditionViolation("cosine of vectors with different dimensions");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0))
        throw PreconditionViolation("cosine of a zero vector is undefined");
    return dot / std::sqrt(na * nb);
}

}  // namespace survadv
