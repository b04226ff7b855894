#include "survadv/ehr.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "survadv/errors.hpp"
#include "survadv/ontology.hpp"

namespace survadv {

Visit::Visit(std::vector<CodeId> raw) : codes(std::move(raw)) {
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
}

bool Visit::has(const CodeId& code) const {
    return std::binary_search(codes.begin(), codes.end(), code);
}

bool Visit::insert(const CodeId& code) {
    auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it != codes.end() && *it == code) return false;
    codes.insert(it, code);
    return true;
}

bool Visit::erase(const CodeId& code) {
    auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it == codes.end() || *it != code) return false;
    codes.erase(it);
    return true;
}

const Visit& PatientRecord::visit(std::size_t index_1based) const {
    if (index_1based < 1 || index_1based > visits.size())
        throw PreconditionViolation("visit index " + std::to_string(index_1based) +
                                    " out of range for record '" + id + "'");
    return visits[index_1based - 1];
}

Visit& PatientRecord::visit(std::size_t index_1based) {
    return const_cast<Visit&>(
        static_cast<const PatientRecord&>(*this).visit(index_1based));
}

bool PatientRecord::contains(const CodeId& code) const {
    for (const Visit& v : visits)
        if (v.has(code)) return true;
    return false;
}

std::size_t PatientRecord::total_codes() const {
    std::size_t n = 0;
    for (const Visit& v : visits) n += v.size();
    return n;
}

const char* to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::remove: return "remove";
        case ActionKind::add: return "add";
        case ActionKind::replace: return "replace";
    }
    return "?";
}

ActionKind action_kind_from_string(const std::string& s) {
    if (s == "remove") return ActionKind::remove;
    if (s == "add") return ActionKind::add;
    if (s == "replace") return ActionKind::replace;
    throw ParseError("unknown action kind '" + s + "'");
}

std::vector<std::string> validate_record(const PatientRecord& record,
                                         const Ontology* ontology) {
    std::vector<std::string> out;
    if (record.id.empty()) out.push_back("record has empty id");
    if (record.visits.empty()) {
        out.push_back("record '" + record.id + "' has no visits");
        return out;
    }
    std::size_t total = 0;
    for (std::size_t n = 1; n <= record.visits.size(); ++n) {
        const Visit& v = record.visits[n - 1];
        total += v.size();
        for (std::size_t i = 0; i < v.codes.size(); ++i) {
            const CodeId& code = v.codes[i];
            if (code.empty())
                out.push_back("visit " + std::to_string(n) + " has an empty code id");
            if (i > 0 && v.codes[i - 1] == code)
                out.push_back("visit " + std::to_string(n) + " has duplicate code '" +
                              code + "'");
            if (ontology && !ontology->is_leaf(code))
                out.push_back("visit " + std::to_string(n) + " has unknown code '" +
                              code + "' (not an ontology leaf)");
        }
        // Codes added through Visit stay sorted; a hand-built vector might not be.
        if (!std::is_sorted(v.codes.begin(), v.codes.end()))
            out.push_back("visit " + std::to_string(n) + " codes are not in canonical order");
    }
    if (total == 0) out.push_back("record '" + record.id + "' has no codes");
    return out;
}

PatientRecord apply_action(const PatientRecord& record,
                           const AdversarialAction& action) {
    if (action.visit_index < 1 || action.visit_index > record.visits.size())
        throw PreconditionViolation("action visit index " +
                                    std::to_string(action.visit_index) +
                                    " out of range for record '" + record.id + "'");
    const bool needs_synonym =
        action.kind == ActionKind::add || action.kind == ActionKind::replace;
    if (needs_synonym) {
        if (!action.synonym_code)
            throw PreconditionViolation(std::string(to_string(action.kind)) +
                                        " action without synonym code");
        if (*action.synonym_code == action.target_code)
            throw PreconditionViolation("synonym equals target code '" +
                                        action.target_code + "'");
        if (record.contains(*action.synonym_code))
            throw PreconditionViolation("synonym '" + *action.synonym_code +
                                        "' already present in record '" + record.id + "'");
    } else if (action.synonym_code) {
        throw PreconditionViolation("remove action carries a synonym code");
    }

    PatientRecord out = record;
    Visit& v = out.visit(action.visit_index);
    switch (action.kind) {
        case ActionKind::remove:
        case ActionKind::replace:
            if (!v.erase(action.target_code))
                throw PreconditionViolation("code '" + action.target_code +
                                            "' not present in visit " +
                                            std::to_string(action.visit_index) +
                                            " of record '" + record.id + "'");
            if (action.kind == ActionKind::replace) v.insert(*action.synonym_code);
            break;
        case ActionKind::add:
            v.insert(*action.synonym_code);
            break;
    }
    return out;
}

namespace {

nlohmann::ordered_json patient_to_json(const Patient& patient) {
    nlohmann::ordered_json j;
    j["id"] = patient.record.id;
    nlohmann::ordered_json visits = nlohmann::ordered_json::array();
    for (const Visit& v : patient.record.visits) visits.push_back(v.codes);
    j["visits"] = std::move(visits);
    j["time"] = patient.label.time;
    j["event"] = patient.label.event;
    return j;
}

}  // namespace

std::string patient_to_json_line(const Patient& patient) {
    return patient_to_json(patient).dump();
}

Patient patient_from_json_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid patient line: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("patient line is not a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "id" && key != "visits" && key != "time" && key != "event")
            throw ParseError("unknown key '" + key + "' in patient line");
    }
    if (!j.contains("id") || !j.contains("visits") || !j.contains("time") ||
        !j.contains("event"))
        throw ParseError("patient line missing one of id/visits/time/event");
    Patient p;
    if (!j["id"].is_string()) throw ParseError("patient id must be a string");
    p.record.id = j["id"].get<std::string>();
    if (!j["visits"].is_array()) throw ParseError("visits must be an array");
    for (const auto& visit_json : j["visits"]) {
        if (!visit_json.is_array())
            throw ParseError("visit of '" + p.record.id + "' is not an array");
        Visit v;
        for (const auto& code_json : visit_json) {
            if (!code_json.is_string())
                throw ParseError("code in record '" + p.record.id + "' is not a string");
            CodeId code = code_json.get<std::string>();
            if (code.empty())
                throw ParseError("empty code id in record '" + p.record.id + "'");
            if (!v.insert(code))
                throw ParseError("duplicate code '" + code + "' in a visit of record '" +
                                 p.record.id + "'");
        }
        p.record.visits.push_back(std::move(v));
    }
    if (!j["time"].is_number())
        throw ParseError("time of '" + p.record.id + "' must be a number");
    p.label.time = j["time"].get<double>();
    if (!(p.label.time >= 0.0) || !std::isfinite(p.label.time))
        throw ParseError("time of '" + p.record.id + "' must be finite and >= 0");
    if (!j["event"].is_number_integer())
        throw ParseError("event of '" + p.record.id + "' must be 0 or 1");
    p.label.event = j["event"].get<int>();
    if (p.label.event != 0 && p.label.event != 1)
        throw ParseError("event of '" + p.record.id + "' must be 0 or 1");
    return p;
}

Cohort read_cohort(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open cohort file '" + path + "'");
    Cohort cohort;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Patient p;
        try {
            p = patient_from_json_line(line);
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!ids.insert(p.record.id).second)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": duplicate patient id '" + p.record.id + "'");
        cohort.patients.push_back(std::move(p));
    }
    return cohort;
}

void write_cohort(const Cohort& cohort, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write cohort file '" + path + "'");
    for (const Patient& p : cohort.patients) out << patient_to_json_line(p) << "\n";
}

}  // namespace survadv
