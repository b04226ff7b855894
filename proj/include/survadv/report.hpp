#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "survadv/attack.hpp"
#include "survadv/ehr.hpp"

namespace survadv {

// One line of the per-action log (kept and reversed actions both appear).
struct ActionLogRecord {
    std::string patient;
    ActionKind kind = ActionKind::remove;
    std::size_t visit = 1;
    CodeId code;                    // target code (anchor for add)
    std::optional<CodeId> synonym;  // inserted code for add/replace
    double saliency = 0.0;
    double similarity = 0.0;
    bool kept = false;
};

struct ActionLogMeta {
    std::string config_hash;
    std::uint64_t seed = 0;
};

struct ActionLog {
    ActionLogMeta meta;
    std::vector<ActionLogRecord> records;
};

std::string action_log_record_to_json_line(const ActionLogRecord& r);

// JSON Lines; the first line is a meta record carrying the config hash and
// seed so artifacts from different runs cannot be silently mixed.
void write_action_log(const ActionLog& log, const std::string& path);

// Throws DataError on any malformed line.
ActionLog read_action_log(const std::string& path);

std::vector<ActionLogRecord> collect_log_records(const std::string& patient_id,
                                                 const AttackResult& result);

// The code an action acted on: the removed/replaced target, or the inserted
// synonym for add.
const CodeId& attacked_code(const ActionLogRecord& r);

// Attack-frequency tables over kept actions, mirroring per-code, per-visit
// and code-x-visit aggregation of the attack trace. Percentages are per
// action kind (columns sum to 100 when the kind occurred at all); the
// heatmap is normalized over all kept actions.
std::string code_frequency_csv(const std::vector<ActionLogRecord>& records);
std::string visit_frequency_csv(const std::vector<ActionLogRecord>& records,
                                std::size_t max_visit);
std::string heatmap_csv(const std::vector<ActionLogRecord>& records,
                        std::size_t max_visit);

// Per-patient case summaries: original code counts, perturbations and
// remove/replace/add tallies per visit.
std::string cases_markdown(const std::vector<ActionLogRecord>& records,
                           const Cohort& cohort);

// Shortest round-trip decimal formatting (used by the CSV writers).
std::string format_double(double value);

}  // namespace survadv
