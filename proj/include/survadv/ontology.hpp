#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "survadv/ehr.hpp"

namespace survadv {

// Medical-concept forest. Every node has exactly one parent; top-level
// concepts hang off the virtual root "ROOT" (which is not itself a node).
// Only leaves may appear in patient records; internal nodes are grouping
// concepts.
class Ontology {
  public:
    static constexpr const char* kRoot = "ROOT";

    // child -> parent edges. Throws StructureError on duplicate children,
    // cycles, parents that never reach ROOT, or an empty edge set.
    static Ontology from_edges(
        const std::vector<std::pair<std::string, std::string>>& edges);

    bool is_node(const std::string& id) const { return parent_.count(id) > 0; }
    bool is_leaf(const CodeId& id) const { return leaves_.count(id) > 0; }

    // Parent id; kRoot for top-level concepts. Throws UnknownCode.
    const std::string& parent(const std::string& id) const;

    // Depth below the virtual root (top-level concepts have depth 1).
    std::size_t depth(const std::string& id) const;

    // Chain of ancestors from the immediate parent upward, excluding ROOT.
    std::vector<std::string> ancestors(const std::string& id) const;

    // Other leaf children of the code's parent. The code itself is never
    // included. Throws UnknownCode when the code is not a leaf.
    std::vector<CodeId> siblings(const CodeId& code) const;

    // Children in sorted order (empty for leaves).
    const std::vector<std::string>& children(const std::string& id) const;

    // Top-level concepts, sorted.
    const std::vector<std::string>& roots() const { return roots_; }

    // All leaves, sorted; the attackable vocabulary.
    const std::vector<CodeId>& leaves() const { return sorted_leaves_; }

    // Root concept the code descends from; diagnosis/drug classification in
    // generated ontologies keys off this.
    const std::string& root_of(const std::string& id) const;

    std::size_t node_count() const { return parent_.size(); }

  private:
    std::map<std::string, std::string> parent_;
    std::map<std::string, std::vector<std::string>> children_;
    std::map<std::string, std::size_t> depth_;
    std::map<std::string, std::string> root_of_;
    std::set<CodeId> leaves_;
    std::vector<CodeId> sorted_leaves_;
    std::vector<std::string> roots_;
};

// TSV edge list, one `<child_id>\t<parent_id>` per line; lines starting with
// '#' are ignored. Throws ParseError / StructureError.
Ontology load_ontology(const std::string& path);
Ontology parse_ontology(const std::string& tsv_text, const std::string& origin);

enum class CooccurrenceScope { record, visit };

// Direction of the conditional probability used by synonym selection:
// given_anchor is Pr(candidate | anchor).
enum class CooccurrenceDirection { given_anchor, given_candidate };

// Patient-level (or visit-level) conditional co-occurrence statistics.
// Probabilities are exact integer-count ratios; no smoothing.
class CooccurrenceTable {
  public:
    static CooccurrenceTable build(const Cohort& cohort,
                                   CooccurrenceScope scope = CooccurrenceScope::record);

    // Units (patients for record scope, visits for visit scope) containing
    // the code.
    std::int64_t support(const CodeId& code) const;

    // Pr(candidate | anchor). Defined only when support(anchor) > 0;
    // throws PreconditionViolation otherwise.
    double conditional(const CodeId& anchor, const CodeId& candidate) const;

    CooccurrenceScope scope() const { return scope_; }

  private:
    CooccurrenceScope scope_ = CooccurrenceScope::record;
    std::map<CodeId, std::int64_t> support_;
    std::map<CodeId, std::map<CodeId, std::int64_t>> joint_;
};

// Ontology siblings of the anchor that pass the co-occurrence threshold,
// ordered by descending probability then ascending code id.
struct SynonymSet {
    CodeId anchor;
    std::vector<CodeId> members;
    std::vector<double> probabilities;  // aligned with members

    bool empty() const { return members.empty(); }
};

// members = { s in siblings(anchor) : Pr(s|anchor) > p } (direction
// configurable). Strict comparison. Throws UnknownCode when the anchor is not
// an ontology leaf.
SynonymSet synonym_set(const Ontology& ontology, const CooccurrenceTable& table,
                       const CodeId& anchor, double p,
                       CooccurrenceDirection direction = CooccurrenceDirection::given_anchor);

// Synonym sets for every ontology leaf, precomputed once and shared
// read-only by attack workers.
std::map<CodeId, SynonymSet> build_synonym_catalog(
    const Ontology& ontology, const CooccurrenceTable& table, double p,
    CooccurrenceDirection direction = CooccurrenceDirection::given_anchor);

}  // namespace survadv
