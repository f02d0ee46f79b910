#include "gpa/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gpa/errors.hpp"

namespace gpa {

using nlohmann::json;

std::string AgentKey::label() const {
    if (manager) return "MANAGER";
    return "SEARCH_AGENT " + std::to_string(index);
}

namespace {

std::string trim_trailing(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' ||
                          s.back() == '\r')) {
        s.pop_back();
    }
    return s;
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// input.value on LLM spans may carry a JSON array of {role, content}
// records; anything else is treated as one opaque user message.
void extract_input_messages(const Span& span, std::vector<Message>& out) {
    const std::string* input = span.attribute("input.value");
    if (input == nullptr || is_blank(*input)) return;

    if (span.kind == SpanKind::LLM) {
        json doc = json::parse(*input, nullptr, false);
        if (doc.is_array()) {
            bool all_messages = !doc.empty();
            for (const json& m : doc) {
                if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
                    !m["role"].is_string() || !m["content"].is_string()) {
                    all_messages = false;
                    break;
                }
            }
            if (all_messages) {
                for (const json& m : doc) {
                    auto role = role_from_string(m["role"].get<std::string>());
                    std::string content = m["content"].get<std::string>();
                    if (!role.has_value() || is_blank(content)) continue;
                    out.push_back({*role, std::move(content), span.span_id, 0});
                }
                return;
            }
        }
    }
    Role role = span.kind == SpanKind::TOOL ? Role::TOOL : Role::USER;
    out.push_back({role, *input, span.span_id, 0});
}

void extract_output_messages(const Span& span, std::vector<Message>& out) {
    const std::string* output = span.attribute("output.value");
    if (output == nullptr || is_blank(*output)) return;
    Role role = span.kind == SpanKind::TOOL ? Role::TOOL : Role::ASSISTANT;
    out.push_back({role, *output, span.span_id, 0});
}

constexpr const char* kPlanKeyword = "[PLAN]";

}  // namespace

std::vector<AgentSegment> segment_agents(const Trace& trace) {
    bool has_agentic_span = std::any_of(trace.spans.begin(), trace.spans.end(), [](const Span& s) {
        return s.kind == SpanKind::AGENT || s.kind == SpanKind::LLM;
    });
    if (!has_agentic_span) {
        throw Error(ErrorCode::NoAgentSpans, "trace " + trace.trace_id);
    }

    // Nearest AGENT-kind span on the self-inclusive ancestor path.
    auto owner_agent = [&](const Span& s) -> const Span* {
        const Span* cur = &s;
        while (cur != nullptr) {
            if (cur->kind == SpanKind::AGENT) return cur;
            auto parent = trace.effective_parent(cur->span_id);
            cur = parent.has_value() ? &trace.span(*parent) : nullptr;
        }
        return nullptr;
    };

    // A delegated lineage is an AGENT span that itself sits under another
    // AGENT span; outermost agents belong to the manager.
    auto is_delegated = [&](const Span& agent_span) {
        auto parent = trace.effective_parent(agent_span.span_id);
        while (parent.has_value()) {
            const Span& p = trace.span(*parent);
            if (p.kind == SpanKind::AGENT) return true;
            parent = trace.effective_parent(p.span_id);
        }
        return false;
    };

    std::vector<AgentSegment> segments;
    segments.push_back(AgentSegment{AgentKey{true, -1}, {}, {}, {}});
    std::unordered_map<std::string, std::size_t> lineage_segment;  // agent span id -> index

    // Spans are start_ns-ordered, so lineages index in first-appearance order.
    for (const Span& s : trace.spans) {
        if (s.kind == SpanKind::AGENT && is_delegated(s) &&
            lineage_segment.count(s.span_id) == 0) {
            int index = static_cast<int>(segments.size()) - 1;
            lineage_segment[s.span_id] = segments.size();
            segments.push_back(AgentSegment{AgentKey{false, index}, {}, {}, {}});
        }
    }

    auto segment_for = [&](const Span& s) -> AgentSegment& {
        const Span* owner = owner_agent(s);
        if (owner == nullptr) return segments[0];
        auto it = lineage_segment.find(owner->span_id);
        return it == lineage_segment.end() ? segments[0] : segments[it->second];
    };

    for (const Span& s : trace.spans) {
        std::vector<Message> extracted;
        extract_input_messages(s, extracted);
        extract_output_messages(s, extracted);
        if (extracted.empty()) continue;
        AgentSegment& segment = segment_for(s);
        for (Message& m : extracted) {
            if (m.content.find(kPlanKeyword) != std::string::npos) {
                segment.plans.push_back({m.content, m.source_span});
            }
            if (m.role == Role::SYSTEM) {
                segment.system_instructions.push_back(std::move(m));
            } else {
                segment.messages.push_back(std::move(m));
            }
        }
    }

    for (AgentSegment& segment : segments) {
        std::size_t seq = 0;
        for (Message& m : segment.system_instructions) m.sequence = seq++;
        for (Message& m : segment.messages) m.sequence = seq++;
    }
    return segments;
}

std::vector<AgentSegment> dedupe_history(std::vector<AgentSegment> segments) {
    for (AgentSegment& segment : segments) {
        std::unordered_set<std::string> seen;
        auto keep = [&](const Message& m) {
            std::string key = to_string(m.role) + "\x1f" + trim_trailing(m.content);
            return seen.insert(std::move(key)).second;
        };
        std::erase_if(segment.system_instructions, [&](const Message& m) { return !keep(m); });
        std::erase_if(segment.messages, [&](const Message& m) { return !keep(m); });
        std::size_t seq = 0;
        for (Message& m : segment.system_instructions) m.sequence = seq++;
        for (Message& m : segment.messages) m.sequence = seq++;
    }
    return segments;
}

namespace {

void render_message(std::ostringstream& out, const Message& m, const RenderOptions& options) {
    std::string content = m.content;
    if (content.size() > options.max_message_chars) {
        content.resize(options.max_message_chars);
        content += " [truncated]";
    }
    std::string prefix = "[span " + m.source_span + "] ";
    out << prefix << to_string(m.role) << ": ";
    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (c == '\n') {
            // Continuation lines keep the span id so every line stays citable.
            out << '\n' << prefix << "  ";
        } else {
            out << c;
        }
    }
    out << '\n';
}

}  // namespace

std::string render_transcript(const ProcessedTrace& pt, const RenderOptions& options) {
    std::ostringstream out;
    out << "Trace: " << pt.trace_id << '\n';
    out << "Task: " << pt.task << '\n';
    for (const AgentSegment& segment : pt.segments) {
        out << '\n' << "=== " << segment.agent_key.label() << " ===" << '\n';
        for (const Message& m : segment.system_instructions) {
            render_message(out, m, options);
        }
        for (const Message& m : segment.messages) {
            render_message(out, m, options);
        }
    }
    return out.str();
}

ProcessedTrace preprocess_trace(const Trace& trace, const RenderOptions& options) {
    ProcessedTrace pt;
    pt.trace_id = trace.trace_id;
    pt.task = trace.task;
    pt.segments = dedupe_history(segment_agents(trace));
    pt.rendered_char_count = render_transcript(pt, options).size();
    return pt;
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_dataset(
    const std::vector<std::string>& trace_ids, double ratio, std::uint64_t seed) {
    std::vector<std::string> shuffled = trace_ids;
    std::uint64_t state = seed;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(splitmix64_next(state) % i);
        std::swap(shuffled[i - 1], shuffled[j]);
    }
    auto dev_size = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(shuffled.size())));
    dev_size = std::min(dev_size, shuffled.size());
    std::vector<std::string> dev(shuffled.begin(), shuffled.begin() + dev_size);
    std::vector<std::string> test(shuffled.begin() + dev_size, shuffled.end());
    return {std::move(dev), std::move(test)};
}

}  // namespace gpa
