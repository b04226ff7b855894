#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace survadv {

class Ontology;

using CodeId = std::string;

// Informational classification of a code, derived from its ontology root.
enum class CodeKind { diagnosis, drug };

// One hospital visit: an unordered set of medical codes. Codes are kept as a
// sorted, duplicate-free vector so that iteration order (and therefore every
// downstream artifact) is deterministic. A visit may be empty after
// perturbation; the slot is retained so visit indices stay stable.
struct Visit {
    std::vector<CodeId> codes;

    Visit() = default;
    explicit Visit(std::vector<CodeId> raw);

    bool has(const CodeId& code) const;
    // Inserts keeping sorted order; returns false if already present.
    bool insert(const CodeId& code);
    // Removes; returns false if absent.
    bool erase(const CodeId& code);
    bool empty() const { return codes.empty(); }
    std::size_t size() const { return codes.size(); }

    bool operator==(const Visit&) const = default;
};

// A patient's longitudinal covariate: ordered visits, 1-based indexing at
// every API boundary.
struct PatientRecord {
    std::string id;
    std::vector<Visit> visits;

    std::size_t visit_count() const { return visits.size(); }
    const Visit& visit(std::size_t index_1based) const;
    Visit& visit(std::size_t index_1based);
    // True if the code appears in any visit.
    bool contains(const CodeId& code) const;
    std::size_t total_codes() const;

    bool operator==(const PatientRecord&) const = default;
};

// True time and event indicator (censored 0 / observed 1).
struct SurvivalLabel {
    double time = 0.0;
    int event = 0;

    bool observed() const { return event == 1; }
    bool operator==(const SurvivalLabel&) const = default;
};

struct Patient {
    PatientRecord record;
    SurvivalLabel label;

    bool operator==(const Patient&) const = default;
};

struct Cohort {
    std::vector<Patient> patients;
    // Generator metadata; zero / empty for cohorts read from external files.
    std::uint64_t seed = 0;
    std::string config_hash;

    std::size_t size() const { return patients.size(); }
};

enum class ActionKind { remove, add, replace };

const char* to_string(ActionKind kind);
ActionKind action_kind_from_string(const std::string& s);

// One candidate perturbation. For `add`, target_code is the anchor whose
// synonym is inserted; it is informational and need not still be present when
// the action is applied.
struct AdversarialAction {
    ActionKind kind = ActionKind::remove;
    std::size_t visit_index = 1;  // 1-based
    CodeId target_code;
    std::optional<CodeId> synonym_code;

    bool operator==(const AdversarialAction&) const = default;
};

// Diagnostic invariant check; returns one human-readable violation per
// problem (empty record, duplicate codes in a visit, codes missing from the
// attached ontology). Empty result means the record is well-formed.
std::vector<std::string> validate_record(const PatientRecord& record,
                                         const Ontology* ontology = nullptr);

// Applies one perturbation, returning a new record; the input is never
// mutated. Throws PreconditionViolation when the target code is missing from
// the named visit (remove/replace) or the synonym is already present anywhere
// in the record (add/replace) -- either signals a scorer bookkeeping bug.
PatientRecord apply_action(const PatientRecord& record,
                           const AdversarialAction& action);

// --- Cohort file format (JSON Lines, one patient per line) -----------------
//
//   {"id":"p0001","visits":[["D410","R07A"],["D410"]],"time":4.25,"event":1}
//
// Field order is fixed as shown; readers reject unknown top-level keys,
// duplicate codes within a visit, and duplicate patient ids.

std::string patient_to_json_line(const Patient& patient);
Patient patient_from_json_line(const std::string& line);

Cohort read_cohort(const std::string& path);
void write_cohort(const Cohort& cohort, const std::string& path);

}  // namespace survadv
