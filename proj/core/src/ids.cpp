#include "gpa/ids.hpp"

#include <algorithm>
#include <cctype>

#include "gpa/errors.hpp"

namespace gpa {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::string to_string(JudgeId id) {
    switch (id) {
        case JudgeId::LC: return "LC";
        case JudgeId::EE: return "EE";
        case JudgeId::PA: return "PA";
        case JudgeId::PQ: return "PQ";
        case JudgeId::TS: return "TS";
        case JudgeId::TC: return "TC";
        case JudgeId::GF: return "GF";
    }
    return "??";
}

std::string to_string(Impact impact) {
    switch (impact) {
        case Impact::LOW: return "LOW";
        case Impact::MEDIUM: return "MEDIUM";
        case Impact::HIGH: return "HIGH";
    }
    return "??";
}

std::string to_string(SpanKind kind) {
    switch (kind) {
        case SpanKind::AGENT: return "AGENT";
        case SpanKind::LLM: return "LLM";
        case SpanKind::TOOL: return "TOOL";
        case SpanKind::CHAIN: return "CHAIN";
        case SpanKind::OTHER: return "OTHER";
    }
    return "??";
}

std::string to_string(Role role) {
    switch (role) {
        case Role::SYSTEM: return "SYSTEM";
        case Role::USER: return "USER";
        case Role::ASSISTANT: return "ASSISTANT";
        case Role::TOOL: return "TOOL";
    }
    return "??";
}

std::optional<JudgeId> judge_id_from_string(const std::string& text) {
    std::string t = lower(text);
    if (t == "lc") return JudgeId::LC;
    if (t == "ee") return JudgeId::EE;
    if (t == "pa") return JudgeId::PA;
    if (t == "pq") return JudgeId::PQ;
    if (t == "ts") return JudgeId::TS;
    if (t == "tc") return JudgeId::TC;
    if (t == "gf") return JudgeId::GF;
    return std::nullopt;
}

std::optional<Impact> impact_from_string(const std::string& text) {
    std::string t = lower(text);
    if (t == "low") return Impact::LOW;
    if (t == "med" || t == "medium") return Impact::MEDIUM;
    if (t == "high") return Impact::HIGH;
    return std::nullopt;
}

SpanKind span_kind_from_string(const std::string& text) {
    std::string t = lower(text);
    if (t == "agent") return SpanKind::AGENT;
    if (t == "llm") return SpanKind::LLM;
    if (t == "tool") return SpanKind::TOOL;
    if (t == "chain") return SpanKind::CHAIN;
    return SpanKind::OTHER;
}

std::optional<Role> role_from_string(const std::string& text) {
    std::string t = lower(text);
    if (t == "system") return Role::SYSTEM;
    if (t == "user") return Role::USER;
    if (t == "assistant" || t == "ai") return Role::ASSISTANT;
    if (t == "tool" || t == "function") return Role::TOOL;
    return std::nullopt;
}

const std::vector<JudgeId>& default_judges() {
    static const std::vector<JudgeId> ids = {JudgeId::LC, JudgeId::EE, JudgeId::PA,
                                             JudgeId::PQ, JudgeId::TS, JudgeId::TC};
    return ids;
}

const std::vector<JudgeId>& all_judges() {
    static const std::vector<JudgeId> ids = {JudgeId::LC, JudgeId::EE, JudgeId::PA,
                                             JudgeId::PQ, JudgeId::TS, JudgeId::TC,
                                             JudgeId::GF};
    return ids;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::DuplicateSpanId: return "DuplicateSpanId";
        case ErrorCode::UnknownSpan: return "UnknownSpan";
        case ErrorCode::UnknownImpactLevel: return "UnknownImpactLevel";
        case ErrorCode::EmptySpanSet: return "EmptySpanSet";
        case ErrorCode::UnknownJudgeId: return "UnknownJudgeId";
        case ErrorCode::EmptyJudgeSet: return "EmptyJudgeSet";
        case ErrorCode::NoAgentSpans: return "NoAgentSpans";
        case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
        case ErrorCode::BackendExhausted: return "BackendExhausted";
        case ErrorCode::CacheMissInReplayMode: return "CacheMissInReplayMode";
        case ErrorCode::MissingScore: return "MissingScore";
        case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
        case ErrorCode::TraceMismatch: return "TraceMismatch";
        case ErrorCode::UnknownErrorRef: return "UnknownErrorRef";
        case ErrorCode::InconsistentEntry: return "InconsistentEntry";
        case ErrorCode::UnmappedError: return "UnmappedError";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::CoverageGap: return "CoverageGap";
        case ErrorCode::ValidationFailure: return "ValidationFailure";
        case ErrorCode::DatasetMismatch: return "DatasetMismatch";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::BadConfig: return "BadConfig";
    }
    return "UnknownError";
}

}  // namespace gpa
