#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gpa/judges.hpp"
#include "gpa/trace.hpp"

namespace gpa {

enum class MatchMode { AUTO, ADJUDICATED };

std::string to_string(MatchMode mode);

// One (error, judge, run) identification/localization decision.
struct MatchRecord {
    std::string error_id;
    JudgeId judge_id = JudgeId::LC;
    int run_index = 0;
    bool identified = false;
    bool localized = false;  // localized implies identified
    MatchMode mode = MatchMode::AUTO;
    std::set<std::string> matched_span_ids;
};

// Human override of an AUTO record, mirroring manual verification.
struct AdjudicationEntry {
    std::string error_id;
    JudgeId judge_id = JudgeId::LC;
    std::optional<int> run_index;  // absent = all runs
    bool identified = false;
    bool localized = false;
    std::string note;
};

// Span-based matching: the verdict localizes the error when it flags an
// issue (score below 3) and cites at least one of the error's spans. AUTO
// identification equals localization — a conservative lower bound, since a
// judge can describe an error without citing its span. Throws TraceMismatch.
MatchRecord auto_match(const JudgeVerdict& verdict, const AnnotatedError& error);

// ADJUDICATED entries override AUTO records in place; an entry without a
// run_index applies to every run of its (error, judge). Throws
// UnknownErrorRef for entries matching no record and InconsistentEntry for
// localized-but-not-identified entries.
std::vector<MatchRecord> apply_adjudication(std::vector<MatchRecord> records,
                                            const std::vector<AdjudicationEntry>& entries);

// JSON Lines: {"error_id","judge_id","run_index"?,"identified","localized","note"?}.
std::vector<AdjudicationEntry> load_adjudications(const std::string& document);
std::string serialize_adjudication_skeleton(const std::vector<MatchRecord>& records);

struct CoverageCell {
    std::size_t caught = 0;
    std::size_t localized = 0;
    std::size_t total = 0;
};

// Rows keyed by judge label ("LC".. plus "ALL" for the union across mapped
// judges) and impact label ("LOW"/"MEDIUM"/"HIGH"/"ALL").
struct CoverageTable {
    std::map<std::string, std::map<std::string, CoverageCell>> cells;

    const CoverageCell& cell(const std::string& judge, const std::string& impact) const;
};

// Per (judge, impact): total = errors mapped to the judge at that impact,
// caught = those with >= 1 identifying record from that judge, localized
// likewise. The "ALL"-judge rows count an error once if ANY mapped judge
// caught it. Throws UnmappedError when a record's error has no mapping.
CoverageTable coverage_counts(const std::vector<MatchRecord>& records,
                              const std::vector<GpaMapping>& mappings,
                              const std::vector<AnnotatedError>& errors);

}  // namespace gpa
