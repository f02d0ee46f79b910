#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "gpa/errors.hpp"
#include "gpa/ids.hpp"

namespace gpa {

inline constexpr const char* kTracePlaceholder = "{TRACE}";

struct JudgeSpec {
    JudgeId id = JudgeId::LC;
    std::string base_prompt;          // out-of-box prompt with one {TRACE} placeholder
    std::string custom_instruction;   // empty = none
    std::vector<std::string> few_shots;  // at most 2 example blocks
    int scale_max = 3;
    // GF has no published evaluation record; it runs only on request and is
    // excluded from parity checks.
    bool experimental = false;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    JudgeId judge_id = JudgeId::LC;
    std::string trace_id;
    std::string content_hash;  // digest of (system_text, user_text)
};

struct JudgeVerdict {
    JudgeId judge_id = JudgeId::LC;
    std::string trace_id;
    int run_index = 0;
    std::string raw_text;
    int score_raw = 0;       // 0..scale_max
    double score_norm = 0.0; // score_raw / scale_max
    std::string criteria;
    std::string evidence;
    std::set<std::string> cited_span_ids;
    std::string model_id;
};

struct VerdictError {
    ErrorCode code = ErrorCode::MissingScore;
    std::string message;
};

using VerdictOutcome = std::variant<JudgeVerdict, VerdictError>;

// The six evaluated judges with their shipped prompt texts, plus the
// experimental GF spec.
std::vector<JudgeSpec> builtin_judges();

JudgeSpec builtin_judge(JudgeId id);

// The Open Deep-Research control-flow description, attachable to any
// judge as an architecture preamble.
const std::string& control_flow_preamble();

// Reads a JudgeSpec from a JSON file: {"id", "base_prompt"|"base_prompt_path",
// "custom_instruction"?, "few_shots"?, "scale_max"?}. Relative prompt paths
// resolve against the spec file's directory. Used for external judges such
// as baseline prompts not shipped with the harness.
JudgeSpec load_judge_spec(const std::string& path);

// Throws MissingPlaceholder / BadConfig when the spec breaks its contract.
void validate_spec(const JudgeSpec& spec);

// system_text = [preamble, custom_instruction, few_shots...] joined by blank
// lines; user_text = base_prompt with {TRACE} substituted. content_hash is
// stable under identical inputs.
PromptBundle build_prompt(const JudgeSpec& spec, const std::string& transcript,
                          const std::optional<std::string>& architecture_preamble,
                          const std::string& trace_id = "");

// Total on arbitrary text: never throws, returns a verdict or a typed error.
// Score comes from the last parsable "Score:" line; criteria and evidence
// from the template sections; citations from lexical span-id matching.
VerdictOutcome parse_verdict(const std::string& response_text, const JudgeSpec& spec,
                             const std::set<std::string>& known_span_ids);

// raw/scale onto [0,1]; throws ScoreOutOfRange outside 0..3.
double normalize_score(int raw);

// 4-point to 3-point collapse: 0 -> 0, {1,2} -> 1, 3 -> 2. Total on all
// integers (clamps outside 0..3).
int bucket_score(int raw);

// Binary collapse used by 2-point accuracy: 0 stays an error, everything
// else counts as correct.
int bucket_score_2pt(int raw);

}  // namespace gpa
