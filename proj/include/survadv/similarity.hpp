#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "survadv/ehr.hpp"
#include "survadv/ontology.hpp"

namespace survadv {

using EmbeddingVector = std::vector<double>;

struct EncoderConfig {
    std::size_t dim = 64;
    double gamma = 0.5;  // ancestor decay, (0, 1]
    double rho = 0.8;    // visit recency weight, (0, 1]
    std::uint64_t seed = 0;

    void validate() const;
};

// Deterministic record encoder: each ontology node gets a seeded
// pseudo-random unit vector; a code embeds as the decay-weighted sum over
// itself and its ancestors; a visit as the mean of its codes; the record as
// the recency-weighted sum of visits, normalized to unit length. Codes that
// share ancestry produce nearby embeddings, which is the property the
// similarity constraint relies on.
//
// Node vectors are built once per (ontology, config); encode/similarity are pure
// and safe to call concurrently.
class RecordEncoder {
  public:
    RecordEncoder(const Ontology& ontology, EncoderConfig config);

    const EncoderConfig& config() const { return config_; }

    // Unit-length record embedding. Throws UnknownCode for non-leaf codes
    // and DegenerateRecord when every visit is empty (a zero vector has no
    // direction, so no embedding is returned for it).
    EmbeddingVector encode(const PatientRecord& record) const;

    // Semantic similarity: cosine of the two record embeddings, in [-1, 1].
    double similarity(const PatientRecord& a, const PatientRecord& b) const;

  private:
    const EmbeddingVector& code_embedding(const CodeId& code) const;

    EncoderConfig config_;
    std::map<CodeId, EmbeddingVector> code_embeddings_;
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace survadv
