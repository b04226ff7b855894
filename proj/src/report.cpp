#include "survadv/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "survadv/errors.hpp"

namespace survadv {

std::string format_double(double value) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    (void)ec;
    return std::string(buf.data(), ptr);
}

std::string action_log_record_to_json_line(const ActionLogRecord& r) {
    nlohmann::ordered_json j;
    j["patient"] = r.patient;
    j["kind"] = to_string(r.kind);
    j["visit"] = r.visit;
    j["code"] = r.code;
    if (r.synonym)
        j["synonym"] = *r.synonym;
    else
        j["synonym"] = nullptr;
    j["dF"] = r.saliency;
    j["si"] = r.similarity;
    j["kept"] = r.kept;
    return j.dump();
}

void write_action_log(const ActionLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write action log '" + path + "'");
    nlohmann::ordered_json meta;
    meta["meta"] = {{"config_hash", log.meta.config_hash}, {"seed", log.meta.seed}};
    out << meta.dump() << "\n";
    for (const ActionLogRecord& r : log.records)
        out << action_log_record_to_json_line(r) << "\n";
}

ActionLog read_action_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open action log '" + path + "'");
    ActionLog log;
    std::string line;
    std::size_t lineno = 0;
    bool meta_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object())
            throw DataError(path + ":" + std::to_string(lineno) + ": not a JSON object");
        if (j.contains("meta")) {
            if (meta_seen || lineno != 1)
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": stray meta record");
            meta_seen = true;
            try {
                log.meta.config_hash = j["meta"].at("config_hash").get<std::string>();
                log.meta.seed = j["meta"].at("seed").get<std::uint64_t>();
            } catch (const nlohmann::json::exception& e) {
                throw DataError(path + ":1: bad meta record: " + e.what());
            }
            continue;
        }
        ActionLogRecord r;
        try {
            r.patient = j.at("patient").get<std::string>();
            r.kind = action_kind_from_string(j.at("kind").get<std::string>());
            r.visit = j.at("visit").get<std::size_t>();
            r.code = j.at("code").get<std::string>();
            if (j.contains("synonym") && !j.at("synonym").is_null())
                r.synonym = j.at("synonym").get<std::string>();
            r.saliency = j.at("dF").get<double>();
            r.similarity = j.at("si").get<double>();
            r.kept = j.at("kept").get<bool>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const ParseError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (r.visit == 0)
            throw DataError(path + ":" + std::to_string(lineno) + ": visit must be >= 1");
        log.records.push_back(std::move(r));
    }
    return log;
}

std::vector<ActionLogRecord> collect_log_records(const std::string& patient_id,
                                                 const AttackResult& result) {
    std::vector<ActionLogRecord> out;
    for (const ActionLogEntry& e : result.log) {
        ActionLogRecord r;
        r.patient = patient_id;
        r.kind = e.action.kind;
        r.visit = e.action.visit_index;
        r.code = e.action.target_code;
        r.synonym = e.action.synonym_code;
        r.saliency = e.saliency;
        r.similarity = e.similarity;
        r.kept = e.kept;
        out.push_back(std::move(r));
    }
    return out;
}

const CodeId& attacked_code(const ActionLogRecord& r) {
    return r.kind == ActionKind::add && r.synonym ? *r.synonym : r.code;
}

namespace {

constexpr std::array<ActionKind, 3> kKinds = {ActionKind::add, ActionKind::remove,
                                              ActionKind::replace};

std::size_t kind_slot(ActionKind kind) {
    switch (kind) {
        case ActionKind::add: return 0;
        case ActionKind::remove: return 1;
        case ActionKind::replace: return 2;
    }
    return 0;
}

double percentage(std::int64_t count, std::int64_t total) {
    return total == 0 ? 0.0
                      : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

std::string code_frequency_csv(const std::vector<ActionLogRecord>& records) {
    std::map<CodeId, std::array<std::int64_t, 3>> counts;
    std::array<std::int64_t, 3> totals{};
    for (const ActionLogRecord& r : records) {
        if (!r.kept) continue;
        counts[attacked_code(r)][kind_slot(r.kind)] += 1;
        totals[kind_slot(r.kind)] += 1;
    }
    std::ostringstream out;
    out << "code,add_pct,remove_pct,replace_pct\n";
    for (const auto& [code, row] : counts) {
        out << code;
        for (std::size_t k = 0; k < kKinds.size(); ++k)
            out << ',' << format_double(percentage(row[k], totals[k]));
        out << '\n';
    }
    return out.str();
}

std::string visit_frequency_csv(const std::vector<ActionLogRecord>& records,
                                std::size_t max_visit) {
    std::vector<std::array<std::int64_t, 3>> counts(max_visit + 1,
                                                    std::array<std::int64_t, 3>{});
    std::array<std::int64_t, 3> totals{};
    for (const ActionLogRecord& r : records) {
        if (!r.kept || r.visit > max_visit) continue;
        counts[r.visit][kind_slot(r.kind)] += 1;
        totals[kind_slot(r.kind)] += 1;
    }
    std::ostringstream out;
    out << "visit,add_pct,remove_pct,replace_pct\n";
    for (std::size_t v = 1; v <= max_visit; ++v) {
        out << v;
        for (std::size_t k = 0; k < kKinds.size(); ++k)
            out << ',' << format_double(percentage(counts[v][k], totals[k]));
        out << '\n';
    }
    return out.str();
}

std::string heatmap_csv(const std::vector<ActionLogRecord>& records,
                        std::size_t max_visit) {
    std::map<CodeId, std::vector<std::int64_t>> counts;
    std::int64_t total = 0;
    for (const ActionLogRecord& r : records) {
        if (!r.kept || r.visit > max_visit) continue;
        auto& row = counts[attacked_code(r)];
        if (row.empty()) row.assign(max_visit + 1, 0);
        row[r.visit] += 1;
        ++total;
    }
    std::ostringstream out;
    out << "code";
    for (std::size_t v = 1; v <= max_visit; ++v) out << ",visit_" << v;
    out << '\n';
    for (const auto& [code, row] : counts) {
        out << code;
        for (std::size_t v = 1; v <= max_visit; ++v)
            out << ',' << format_double(percentage(row[v], total));
        out << '\n';
    }
    return out.str();
}

std::string cases_markdown(const std::vector<ActionLogRecord>& records,
                           const Cohort& cohort) {
    std::map<std::string, const PatientRecord*> by_id;
    for (const Patient& p : cohort.patients) by_id[p.record.id] = &p.record;

    // patient -> visit -> [add, remove, replace] kept counts
    std::map<std::string, std::map<std::size_t, std::array<std::int64_t, 3>>> kept;
    for (const ActionLogRecord& r : records) {
        if (!r.kept) continue;
        kept[r.patient][r.visit][kind_slot(r.kind)] += 1;
    }

    std::ostringstream out;
    out << "# Attack case summaries\n";
    for (const auto& [patient, visits] : kept) {
        auto rec_it = by_id.find(patient);
        out << "\n## " << patient << "\n\n";
        const std::size_t n_visits =
            rec_it != by_id.end() ? rec_it->second->visit_count() : 0;
        std::size_t max_visit = n_visits;
        for (const auto& [v, row] : visits) {
            (void)row;
            max_visit = std::max(max_visit, v);
        }
        out << "| visit |";
        for (std::size_t v = 1; v <= max_visit; ++v) out << ' ' << v << " |";
        out << " total |\n|---|";
        for (std::size_t v = 1; v <= max_visit; ++v) out << "---|";
        out << "---|\n";

        out << "| codes |";
        std::size_t total_codes = 0;
        for (std::size_t v = 1; v <= max_visit; ++v) {
            const std::size_t c =
                (rec_it != by_id.end() && v <= n_visits)
                    ? rec_it->second->visit(v).size()
                    : 0;
            total_codes += c;
            out << ' ' << c << " |";
        }
        out << ' ' << total_codes << " |\n";

        out << "| perturbations |";
        std::int64_t total_perturbations = 0;
        for (std::size_t v = 1; v <= max_visit; ++v) {
            std::int64_t n = 0;
            auto it = visits.find(v);
            if (it != visits.end()) n = it->second[0] + it->second[1] + it->second[2];
            total_perturbations += n;
            out << ' ' << n << " |";
        }
        out << ' ' << total_perturbations << " |\n";

        out << "| rem/rep/add |";
        std::array<std::int64_t, 3> total{};
        for (std::size_t v = 1; v <= max_visit; ++v) {
            std::array<std::int64_t, 3> row{};
            auto it = visits.find(v);
            if (it != visits.end()) row = it->second;
            for (std::size_t k = 0; k < 3; ++k) total[k] += row[k];
            out << ' ' << row[kind_slot(ActionKind::remove)] << '/'
                << row[kind_slot(ActionKind::replace)] << '/'
                << row[kind_slot(ActionKind::add)] << " |";
        }
        out << ' ' << total[kind_slot(ActionKind::remove)] << '/'
            << total[kind_slot(ActionKind::replace)] << '/'
            << total[kind_slot(ActionKind::add)] << " |\n";
    }
    return out.str();
}

}  // namespace survadv
