#include "gpa/matching.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace gpa {

using nlohmann::json;

std::string to_string(MatchMode mode) {
    return mode == MatchMode::AUTO ? "AUTO" : "ADJUDICATED";
}

MatchRecord auto_match(const JudgeVerdict& verdict, const AnnotatedError& error) {
    if (verdict.trace_id != error.trace_id) {
        throw Error(ErrorCode::TraceMismatch, "verdict trace '" + verdict.trace_id +
                                                  "' vs error trace '" + error.trace_id + "'");
    }
    MatchRecord record;
    record.error_id = error.error_id;
    record.judge_id = verdict.judge_id;
    record.run_index = verdict.run_index;
    record.mode = MatchMode::AUTO;

    // A perfect score flags nothing, so it can neither identify nor localize.
    bool flags_issue = verdict.score_raw < 3;
    std::set<std::string> intersection;
    std::set_intersection(verdict.cited_span_ids.begin(), verdict.cited_span_ids.end(),
                          error.span_ids.begin(), error.span_ids.end(),
                          std::inserter(intersection, intersection.begin()));
    record.localized = flags_issue && !intersection.empty();
    record.identified = record.localized;
    if (record.localized) {
        record.matched_span_ids = std::move(intersection);
    }
    return record;
}

std::vector<MatchRecord> apply_adjudication(std::vector<MatchRecord> records,
                                            const std::vector<AdjudicationEntry>& entries) {
    for (const AdjudicationEntry& entry : entries) {
        if (entry.localized && !entry.identified) {
            throw Error(ErrorCode::InconsistentEntry,
                        "entry for error '" + entry.error_id + "' judge " +
                            to_string(entry.judge_id) + " is localized but not identified");
        }
        bool touched = false;
        for (MatchRecord& record : records) {
            if (record.error_id != entry.error_id || record.judge_id != entry.judge_id) continue;
            if (entry.run_index.has_value() && record.run_index != *entry.run_index) continue;
            record.identified = entry.identified;
            record.localized = entry.localized;
            record.mode = MatchMode::ADJUDICATED;
            touched = true;
        }
        if (!touched) {
            throw Error(ErrorCode::UnknownErrorRef,
                        "entry references unknown record (error '" + entry.error_id +
                            "', judge " + to_string(entry.judge_id) + ")");
        }
    }
    return records;
}

std::vector<AdjudicationEntry> load_adjudications(const std::string& document) {
    std::vector<AdjudicationEntry> out;
    std::istringstream in(document);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw Error(ErrorCode::MalformedDocument,
                        "adjudication line " + std::to_string(lineno) + " is not valid JSON");
        }
        AdjudicationEntry entry;
        entry.error_id = rec.value("error_id", "");
        auto judge = judge_id_from_string(rec.value("judge_id", ""));
        if (entry.error_id.empty() || !judge.has_value()) {
            throw Error(ErrorCode::MalformedDocument,
                        "adjudication line " + std::to_string(lineno) +
                            " needs error_id and judge_id");
        }
        entry.judge_id = *judge;
        if (rec.contains("run_index") && !rec["run_index"].is_null()) {
            entry.run_index = rec["run_index"].get<int>();
        }
        entry.identified = rec.value("identified", false);
        entry.localized = rec.value("localized", false);
        entry.note = rec.value("note", "");
        out.push_back(std::move(entry));
    }
    return out;
}

std::string serialize_adjudication_skeleton(const std::vector<MatchRecord>& records) {
    std::ostringstream out;
    for (const MatchRecord& record : records) {
        json rec;
        rec["error_id"] = record.error_id;
        rec["judge_id"] = to_string(record.judge_id);
        rec["run_index"] = record.run_index;
        rec["identified"] = record.identified;
        rec["localized"] = record.localized;
        rec["note"] = "";
        out << rec.dump() << '\n';
    }
    return out.str();
}

const CoverageCell& CoverageTable::cell(const std::string& judge,
                                        const std::string& impact) const {
    static const CoverageCell empty{};
    auto j = cells.find(judge);
    if (j == cells.end()) return empty;
    auto i = j->second.find(impact);
    return i == j->second.end() ? empty : i->second;
}

CoverageTable coverage_counts(const std::vector<MatchRecord>& records,
                              const std::vector<GpaMapping>& mappings,
                              const std::vector<AnnotatedError>& errors) {
    std::map<std::string, std::set<JudgeId>> mapped;
    for (const GpaMapping& m : mappings) {
        mapped[m.error_id].insert(m.judges.begin(), m.judges.end());
    }
    std::map<std::string, const AnnotatedError*> error_index;
    for (const AnnotatedError& e : errors) {
        error_index[e.error_id] = &e;
    }

    // (error, judge) -> identified / localized at least once across runs.
    std::map<std::pair<std::string, JudgeId>, std::pair<bool, bool>> outcomes;
    for (const MatchRecord& r : records) {
        if (mapped.find(r.error_id) == mapped.end()) {
            throw Error(ErrorCode::UnmappedError, "record for error '" + r.error_id +
                                                      "' has no GPA mapping");
        }
        auto& [identified, localized] = outcomes[{r.error_id, r.judge_id}];
        identified = identified || r.identified;
        localized = localized || r.localized;
    }

    CoverageTable table;
    auto bump = [&](const std::string& judge, const std::string& impact, bool caught,
                    bool localized) {
        CoverageCell& cell = table.cells[judge][impact];
        cell.total += 1;
        if (caught) cell.caught += 1;
        if (localized) cell.localized += 1;
    };

    for (const AnnotatedError& e : errors) {
        auto m = mapped.find(e.error_id);
        if (m == mapped.end()) continue;  // unannotated-by-mapping errors carry no rows
        const std::string impact = to_string(e.impact);

        bool union_caught = false;
        bool union_localized = false;
        for (JudgeId j : m->second) {
            bool caught = false;
            bool localized = false;
            auto it = outcomes.find({e.error_id, j});
            if (it != outcomes.end()) {
                caught = it->second.first;
                localized = it->second.second;
            }
            union_caught = union_caught || caught;
            union_localized = union_localized || localized;
            bump(to_string(j), impact, caught, localized);
            bump(to_string(j), "ALL", caught, localized);
        }
        bump("ALL", impact, union_caught, union_localized);
        bump("ALL", "ALL", union_caught, union_localized);
    }
    return table;
}

}  // namespace gpa
