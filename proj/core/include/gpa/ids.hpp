#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gpa {

// The seven judge dimensions. GF ships as experimental: the harness runs it
// on request but leaves it out of the default suite.
enum class JudgeId { LC, EE, PA, PQ, TS, TC, GF };

enum class Impact { LOW, MEDIUM, HIGH };

enum class SpanKind { AGENT, LLM, TOOL, CHAIN, OTHER };

enum class Role { SYSTEM, USER, ASSISTANT, TOOL };

std::string to_string(JudgeId id);
std::string to_string(Impact impact);
std::string to_string(SpanKind kind);
std::string to_string(Role role);

std::optional<JudgeId> judge_id_from_string(const std::string& text);

// Accepts {"low","med","medium","high"} case-insensitively.
std::optional<Impact> impact_from_string(const std::string& text);

// Unrecognized kinds map to OTHER.
SpanKind span_kind_from_string(const std::string& text);

std::optional<Role> role_from_string(const std::string& text);

// LC, EE, PA, PQ, TS, TC (the default evaluation suite; GF excluded).
const std::vector<JudgeId>& default_judges();

// All seven, GF included.
const std::vector<JudgeId>& all_judges();

}  // namespace gpa
