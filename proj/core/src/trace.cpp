#include "gpa/trace.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gpa/errors.hpp"

namespace gpa {

using nlohmann::json;

const std::string* Span::attribute(const std::string& key) const {
    auto it = attributes.find(key);
    return it == attributes.end() ? nullptr : &it->second;
}

bool Trace::has_span(const std::string& span_id) const {
    return index_.count(span_id) > 0;
}

const Span& Trace::span(const std::string& span_id) const {
    auto it = index_.find(span_id);
    if (it == index_.end()) {
        throw Error(ErrorCode::UnknownSpan, "no span '" + span_id + "' in trace " + trace_id);
    }
    return spans[it->second];
}

const Span* Trace::find_span(const std::string& span_id) const {
    auto it = index_.find(span_id);
    return it == index_.end() ? nullptr : &spans[it->second];
}

std::optional<std::string> Trace::effective_parent(const std::string& span_id) const {
    if (!has_span(span_id)) {
        throw Error(ErrorCode::UnknownSpan, "no span '" + span_id + "' in trace " + trace_id);
    }
    auto it = effective_parent_.find(span_id);
    if (it == effective_parent_.end()) return std::nullopt;
    return it->second;
}

// Builds the span index, resolves parent links, re-roots danglers.
Trace finalize_trace(std::string trace_id, std::string task, std::vector<Span> spans) {
    std::stable_sort(spans.begin(), spans.end(),
                     [](const Span& a, const Span& b) { return a.start_ns < b.start_ns; });

    Trace trace;
    trace.trace_id = std::move(trace_id);
    trace.task = std::move(task);
    trace.spans = std::move(spans);

    for (std::size_t i = 0; i < trace.spans.size(); ++i) {
        const Span& s = trace.spans[i];
        if (s.span_id.empty()) {
            throw Error(ErrorCode::MalformedDocument,
                        "empty span_id in trace " + trace.trace_id);
        }
        auto [_, inserted] = trace.index_.emplace(s.span_id, i);
        if (!inserted) {
            throw Error(ErrorCode::DuplicateSpanId,
                        "span_id '" + s.span_id + "' appears twice in trace " + trace.trace_id);
        }
        if (s.end_ns < s.start_ns) {
            throw Error(ErrorCode::MalformedDocument,
                        "span '" + s.span_id + "' ends before it starts");
        }
    }

    for (const Span& s : trace.spans) {
        if (!s.parent_span_id.has_value()) {
            trace.root_ids.push_back(s.span_id);
            continue;
        }
        if (trace.index_.count(*s.parent_span_id) == 0) {
            // Real exports truncate; evaluation should proceed.
            trace.warnings.push_back("span '" + s.span_id + "' references unknown parent '" +
                                     *s.parent_span_id + "'; re-rooted");
            trace.root_ids.push_back(s.span_id);
        } else if (*s.parent_span_id == s.span_id) {
            throw Error(ErrorCode::MalformedDocument,
                        "span '" + s.span_id + "' is its own parent");
        } else {
            trace.effective_parent_[s.span_id] = *s.parent_span_id;
        }
    }

    // Reject parent cycles (self-loops are caught above).
    for (const Span& s : trace.spans) {
        std::unordered_set<std::string> seen;
        std::string cur = s.span_id;
        while (true) {
            auto it = trace.effective_parent_.find(cur);
            if (it == trace.effective_parent_.end()) break;
            if (!seen.insert(cur).second) {
                throw Error(ErrorCode::MalformedDocument,
                            "parent cycle through span '" + s.span_id + "'");
            }
            cur = it->second;
        }
    }

    if (trace.spans.empty()) {
        throw Error(ErrorCode::MalformedDocument, "trace " + trace.trace_id + " has no spans");
    }
    return trace;
}

namespace {

json parse_json(const std::string& document, const char* what) {
    json doc = json::parse(document, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::MalformedDocument, std::string("unparseable ") + what);
    }
    return doc;
}

std::string require_string(const json& obj, const char* key, const char* context) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error(ErrorCode::MalformedDocument,
                    std::string(context) + " missing string field '" + key + "'");
    }
    return obj[key].get<std::string>();
}

Span parse_span(const json& node) {
    if (!node.is_object()) {
        throw Error(ErrorCode::MalformedDocument, "span entry is not an object");
    }
    Span span;
    span.span_id = require_string(node, "span_id", "span");
    if (node.contains("parent_span_id") && !node["parent_span_id"].is_null()) {
        if (!node["parent_span_id"].is_string()) {
            throw Error(ErrorCode::MalformedDocument,
                        "span '" + span.span_id + "' parent_span_id is not a string");
        }
        span.parent_span_id = node["parent_span_id"].get<std::string>();
    }
    span.name = node.value("name", "");
    if (node.contains("attributes")) {
        const json& attrs = node["attributes"];
        if (!attrs.is_object()) {
            throw Error(ErrorCode::MalformedDocument,
                        "span '" + span.span_id + "' attributes is not an object");
        }
        for (auto it = attrs.begin(); it != attrs.end(); ++it) {
            if (!it.value().is_string()) {
                throw Error(ErrorCode::MalformedDocument, "span '" + span.span_id +
                                                              "' attribute '" + it.key() +
                                                              "' is not a string");
            }
            span.attributes[it.key()] = it.value().get<std::string>();
        }
    }
    // Explicit "kind" wins over the openinference attribute.
    if (node.contains("kind") && node["kind"].is_string()) {
        span.kind = span_kind_from_string(node["kind"].get<std::string>());
    } else if (const std::string* k = span.attribute("openinference.span.kind")) {
        span.kind = span_kind_from_string(*k);
    }
    span.start_ns = node.value("start_ns", std::int64_t{0});
    span.end_ns = node.value("end_ns", span.start_ns);
    return span;
}

}  // namespace

Trace parse_trace(const std::string& document) {
    json doc = parse_json(document, "trace document");
    if (!doc.is_object() || !doc.contains("spans") || !doc["spans"].is_array()) {
        throw Error(ErrorCode::MalformedDocument, "trace document lacks a span list");
    }
    std::vector<Span> spans;
    spans.reserve(doc["spans"].size());
    for (const json& node : doc["spans"]) {
        spans.push_back(parse_span(node));
    }
    return finalize_trace(doc.value("trace_id", ""), doc.value("task", ""), std::move(spans));
}

std::string serialize_trace(const Trace& trace) {
    json doc;
    doc["trace_id"] = trace.trace_id;
    doc["task"] = trace.task;
    doc["spans"] = json::array();
    for (const Span& s : trace.spans) {
        json node;
        node["span_id"] = s.span_id;
        if (s.parent_span_id.has_value()) {
            node["parent_span_id"] = *s.parent_span_id;
        }
        node["name"] = s.name;
        node["kind"] = to_string(s.kind);
        node["attributes"] = json::object();
        for (const auto& [k, v] : s.attributes) {
            node["attributes"][k] = v;
        }
        node["start_ns"] = s.start_ns;
        node["end_ns"] = s.end_ns;
        doc["spans"].push_back(std::move(node));
    }
    return doc.dump(2);
}

std::vector<Span> children_of(const Trace& trace, const std::string& span_id) {
    if (!trace.has_span(span_id)) {
        throw Error(ErrorCode::UnknownSpan,
                    "no span '" + span_id + "' in trace " + trace.trace_id);
    }
    std::vector<Span> out;
    for (const Span& s : trace.spans) {  // already start_ns-ordered
        auto parent = trace.effective_parent(s.span_id);
        if (parent.has_value() && *parent == span_id) {
            out.push_back(s);
        }
    }
    return out;
}

namespace {

// Iterates non-empty JSONL lines; hands each parsed object to fn.
template <typename Fn>
void for_each_jsonl(const std::string& document, const char* what, Fn&& fn) {
    std::istringstream in(document);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) {
            trimmed.pop_back();
        }
        if (trimmed.empty()) continue;
        json rec = json::parse(trimmed, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw Error(ErrorCode::MalformedDocument,
                        std::string(what) + " line " + std::to_string(lineno) + " is not valid JSON");
        }
        fn(rec, lineno);
    }
}

}  // namespace

std::vector<AnnotatedError> load_annotations(const std::string& document) {
    std::vector<AnnotatedError> out;
    for_each_jsonl(document, "annotations", [&](const json& rec, std::size_t lineno) {
        AnnotatedError err;
        err.error_id = require_string(rec, "error_id", "annotation");
        err.trace_id = require_string(rec, "trace_id", "annotation");
        err.category = rec.value("category", "");
        err.description = rec.value("description", "");
        std::string impact_text = require_string(rec, "impact", "annotation");
        auto impact = impact_from_string(impact_text);
        if (!impact.has_value()) {
            throw Error(ErrorCode::UnknownImpactLevel,
                        "annotation '" + err.error_id + "' impact '" + impact_text + "'");
        }
        err.impact = *impact;
        if (!rec.contains("span_ids") || !rec["span_ids"].is_array()) {
            throw Error(ErrorCode::MalformedDocument,
                        "annotation '" + err.error_id + "' lacks span_ids (line " +
                            std::to_string(lineno) + ")");
        }
        for (const json& id : rec["span_ids"]) {
            if (!id.is_string()) {
                throw Error(ErrorCode::MalformedDocument,
                            "annotation '" + err.error_id + "' span_ids must be strings");
            }
            err.span_ids.insert(id.get<std::string>());
        }
        if (err.span_ids.empty()) {
            throw Error(ErrorCode::EmptySpanSet, "annotation '" + err.error_id + "'");
        }
        out.push_back(std::move(err));
    });
    return out;
}

std::vector<GpaMapping> load_gpa_mapping(const std::string& document) {
    std::vector<GpaMapping> out;
    for_each_jsonl(document, "gpa mapping", [&](const json& rec, std::size_t) {
        GpaMapping mapping;
        mapping.error_id = require_string(rec, "error_id", "gpa mapping");
        if (!rec.contains("judges") || !rec["judges"].is_array()) {
            throw Error(ErrorCode::MalformedDocument,
                        "mapping '" + mapping.error_id + "' lacks a judges array");
        }
        for (const json& j : rec["judges"]) {
            if (!j.is_string()) {
                throw Error(ErrorCode::MalformedDocument,
                            "mapping '" + mapping.error_id + "' judges must be strings");
            }
            auto id = judge_id_from_string(j.get<std::string>());
            if (!id.has_value()) {
                throw Error(ErrorCode::UnknownJudgeId,
                            "mapping '" + mapping.error_id + "' judge '" + j.get<std::string>() + "'");
            }
            mapping.judges.insert(*id);
        }
        if (mapping.judges.empty()) {
            throw Error(ErrorCode::EmptyJudgeSet, "mapping '" + mapping.error_id + "'");
        }
        out.push_back(std::move(mapping));
    });
    return out;
}

std::map<JudgeId, std::size_t> mapping_totals(const std::vector<GpaMapping>& mappings) {
    std::map<JudgeId, std::size_t> totals;
    for (const GpaMapping& m : mappings) {
        for (JudgeId j : m.judges) {
            ++totals[j];
        }
    }
    return totals;
}

std::vector<std::string> cross_validate(const std::vector<AnnotatedError>& errors,
                                        const std::map<std::string, Trace>& traces) {
    std::vector<std::string> diagnostics;
    for (const AnnotatedError& err : errors) {
        auto it = traces.find(err.trace_id);
        if (it == traces.end()) {
            diagnostics.push_back("error '" + err.error_id + "' references unknown trace '" +
                                  err.trace_id + "'");
            continue;
        }
        for (const std::string& span_id : err.span_ids) {
            if (!it->second.has_span(span_id)) {
                diagnostics.push_back("error '" + err.error_id + "' cites span '" + span_id +
                                      "' absent from trace '" + err.trace_id + "'");
            }
        }
    }
    return diagnostics;
}

}  // namespace gpa
