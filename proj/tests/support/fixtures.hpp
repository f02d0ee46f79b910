#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "gpa/trace.hpp"

namespace fixtures {

// Compact span-tree builder for synthetic traces.
struct SpanDef {
    std::string id;
    std::string parent;  // empty = root
    std::string kind = "LLM";
    std::int64_t start = 0;
    std::int64_t end = 0;
    nlohmann::json attrs = nlohmann::json::object();
};

inline std::string trace_json(const std::string& trace_id, const std::string& task,
                              const std::vector<SpanDef>& spans) {
    nlohmann::json doc;
    doc["trace_id"] = trace_id;
    doc["task"] = task;
    doc["spans"] = nlohmann::json::array();
    for (const SpanDef& s : spans) {
        nlohmann::json node;
        node["span_id"] = s.id;
        if (!s.parent.empty()) node["parent_span_id"] = s.parent;
        node["name"] = s.id;
        node["kind"] = s.kind;
        node["attributes"] = s.attrs;
        node["start_ns"] = s.start;
        node["end_ns"] = s.end == 0 ? s.start + 1 : s.end;
        doc["spans"].push_back(node);
    }
    return doc.dump();
}

inline nlohmann::json llm_io(const std::string& input_json_or_text, const std::string& output) {
    nlohmann::json attrs;
    attrs["input.value"] = input_json_or_text;
    attrs["output.value"] = output;
    return attrs;
}

inline std::string messages_json(
    const std::vector<std::pair<std::string, std::string>>& role_content) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [role, content] : role_content) {
        arr.push_back({{"role", role}, {"content", content}});
    }
    return arr.dump();
}

// Scratch directory wiped on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<std::uint64_t> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("gpa-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

    std::string write(const std::string& rel, const std::string& content) const {
        std::filesystem::path p = path_ / rel;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p.string();
    }

    std::string read(const std::string& rel) const {
        std::ifstream in(path_ / rel, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
