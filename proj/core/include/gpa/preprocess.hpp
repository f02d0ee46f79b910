#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gpa/trace.hpp"

namespace gpa {

struct Message {
    Role role = Role::USER;
    std::string content;      // verbatim from a span attribute, never synthesized
    std::string source_span;
    std::size_t sequence = 0;
};

// MANAGER, or SEARCH_AGENT(index) for each delegated sub-agent lineage.
struct AgentKey {
    bool manager = true;
    int index = -1;  // >= 0 for SEARCH_AGENT

    std::string label() const;
    bool operator==(const AgentKey&) const = default;
};

struct PlanRef {
    std::string plan_text;
    std::string source_span;
};

struct AgentSegment {
    AgentKey agent_key;
    std::vector<Message> system_instructions;  // rendered before messages
    std::vector<Message> messages;
    std::vector<PlanRef> plans;  // messages whose content carries the "[PLAN]" keyword
};

struct ProcessedTrace {
    std::string trace_id;
    std::string task;
    std::vector<AgentSegment> segments;  // first-activity order, MANAGER first
    std::size_t rendered_char_count = 0;
};

struct RenderOptions {
    // Single messages longer than this are cut and marked "[truncated]";
    // raw traces routinely blow past judge context windows.
    std::size_t max_message_chars = 20000;
};

// One MANAGER segment plus one SEARCH_AGENT(i) per delegated sub-agent
// lineage, indexed in first-appearance order. Every LLM/AGENT span's
// messages attach to the nearest AGENT-kind ancestor (self included);
// spans with no AGENT ancestor attach to MANAGER. Throws NoAgentSpans
// when the trace has neither AGENT nor LLM spans.
std::vector<AgentSegment> segment_agents(const Trace& trace);

// Drops any message whose (role, content) pair — trailing whitespace
// trimmed — appeared earlier in the same segment; first occurrence wins,
// sequence numbers are recompacted. Idempotent.
std::vector<AgentSegment> dedupe_history(std::vector<AgentSegment> segments);

// Deterministic judge-ready text: per segment a header, system instructions,
// then messages, every line prefixed "[span <id>]".
std::string render_transcript(const ProcessedTrace& pt, const RenderOptions& options = {});

// segment_agents + dedupe_history + rendered size, bundled.
ProcessedTrace preprocess_trace(const Trace& trace, const RenderOptions& options = {});

// Fisher–Yates over a splitmix64 stream, then |dev| = floor(ratio * n).
// Same ids + same seed always give the same partition.
std::pair<std::vector<std::string>, std::vector<std::string>> split_dataset(
    const std::vector<std::string>& trace_ids, double ratio, std::uint64_t seed);

// The splitmix64 step function, exposed for tests and tools.
std::uint64_t splitmix64_next(std::uint64_t& state);

}  // namespace gpa
