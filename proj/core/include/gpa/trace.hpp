#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpa/errors.hpp"
#include "gpa/ids.hpp"

namespace gpa {

// One timed unit of agent work. Attribute values are kept as raw strings,
// no type coercion: judges consume text.
struct Span {
    std::string span_id;
    std::optional<std::string> parent_span_id;
    std::string name;
    SpanKind kind = SpanKind::OTHER;
    std::map<std::string, std::string> attributes;
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;

    const std::string* attribute(const std::string& key) const;

    bool operator==(const Span&) const = default;
};

struct Trace {
    std::string trace_id;
    std::string task;
    std::vector<Span> spans;  // ordered by start_ns, then input order
    std::vector<std::string> root_ids;
    // Dangling parents were re-rooted; one note per affected span.
    std::vector<std::string> warnings;

    bool multi_root() const { return root_ids.size() > 1; }
    bool has_span(const std::string& span_id) const;
    const Span& span(const std::string& span_id) const;  // throws UnknownSpan
    const Span* find_span(const std::string& span_id) const;
    // Index of span's parent after re-rooting (nullopt for roots).
    std::optional<std::string> effective_parent(const std::string& span_id) const;

private:
    friend Trace finalize_trace(std::string trace_id, std::string task,
                                std::vector<Span> spans);
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, std::string> effective_parent_;
};

struct AnnotatedError {
    std::string error_id;
    std::string trace_id;
    std::string category;  // TRAIL taxonomy label, free text
    Impact impact = Impact::LOW;
    std::set<std::string> span_ids;  // non-empty
    std::string description;
};

struct GpaMapping {
    std::string error_id;
    std::set<JudgeId> judges;  // non-empty
};

// Parses one trace document (JSON: {"trace_id", "task", "spans": [...]}).
// Spans come out ordered by start_ns then input order with parent links
// resolved. A parent_span_id that references no span in the document
// re-roots the span and records a warning. Throws MalformedDocument,
// DuplicateSpanId.
Trace parse_trace(const std::string& document);

// Inverse of parse_trace up to field equality; warnings are not serialized.
std::string serialize_trace(const Trace& trace);

// Direct children ordered by start_ns (after re-rooting). Throws UnknownSpan.
std::vector<Span> children_of(const Trace& trace, const std::string& span_id);

// JSON Lines, one AnnotatedError per line. Impact strings are normalized
// case-insensitively ("low"/"med"/"medium"/"high"). Throws MalformedDocument,
// UnknownImpactLevel, EmptySpanSet.
std::vector<AnnotatedError> load_annotations(const std::string& document);

// JSON Lines, one GpaMapping per line. Throws MalformedDocument,
// UnknownJudgeId, EmptyJudgeSet.
std::vector<GpaMapping> load_gpa_mapping(const std::string& document);

// Per-judge error totals over a mapping set (each error counts toward every
// judge it maps to).
std::map<JudgeId, std::size_t> mapping_totals(const std::vector<GpaMapping>& mappings);

// Every cited span_id must resolve in its trace; returns one diagnostic per
// violation (empty means valid).
std::vector<std::string> cross_validate(const std::vector<AnnotatedError>& errors,
                                        const std::map<std::string, Trace>& traces);

}  // namespace gpa
