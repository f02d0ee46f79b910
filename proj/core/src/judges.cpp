#include "gpa/judges.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gpa/hash.hpp"
#include "gpa/prompt_texts.hpp"

namespace gpa {

using nlohmann::json;

namespace {

JudgeSpec make_spec(JudgeId id, const char* base, const char* custom, bool experimental = false) {
    JudgeSpec spec;
    spec.id = id;
    spec.base_prompt = base;
    spec.custom_instruction = custom == nullptr ? "" : custom;
    spec.scale_max = 3;
    spec.experimental = experimental;
    return spec;
}

}  // namespace

std::vector<JudgeSpec> builtin_judges() {
    return {
        make_spec(JudgeId::LC, prompts::kLcBase, prompts::kLcCustom),
        make_spec(JudgeId::EE, prompts::kEeBase, prompts::kEeCustom),
        make_spec(JudgeId::PA, prompts::kPaBase, prompts::kPaCustom),
        make_spec(JudgeId::PQ, prompts::kPqBase, prompts::kPqCustom),
        make_spec(JudgeId::TS, prompts::kTsBase, prompts::kTsCustom),
        make_spec(JudgeId::TC, prompts::kTcBase, prompts::kTcCustom),
        make_spec(JudgeId::GF, prompts::kGfBase, nullptr, /*experimental=*/true),
    };
}

JudgeSpec builtin_judge(JudgeId id) {
    for (JudgeSpec& spec : builtin_judges()) {
        if (spec.id == id) return std::move(spec);
    }
    throw Error(ErrorCode::UnknownJudgeId, to_string(id));
}

const std::string& control_flow_preamble() {
    static const std::string text = prompts::kControlFlow;
    return text;
}

void validate_spec(const JudgeSpec& spec) {
    std::size_t first = spec.base_prompt.find(kTracePlaceholder);
    if (first == std::string::npos) {
        throw Error(ErrorCode::MissingPlaceholder,
                    "judge " + to_string(spec.id) + " base prompt lacks " + kTracePlaceholder);
    }
    if (spec.base_prompt.find(kTracePlaceholder, first + 1) != std::string::npos) {
        throw Error(ErrorCode::BadConfig,
                    "judge " + to_string(spec.id) + " base prompt has multiple placeholders");
    }
    if (spec.few_shots.size() > 2) {
        throw Error(ErrorCode::BadConfig,
                    "judge " + to_string(spec.id) + " carries more than 2 few-shot blocks");
    }
    if (spec.scale_max < 1) {
        throw Error(ErrorCode::BadConfig, "judge " + to_string(spec.id) + " scale_max < 1");
    }
}

JudgeSpec load_judge_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read judge spec " + path);
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::BadConfig, "judge spec " + path + " is not a JSON object");
    }
    JudgeSpec spec;
    if (doc.contains("id")) {
        auto id = judge_id_from_string(doc["id"].get<std::string>());
        if (!id.has_value()) {
            throw Error(ErrorCode::UnknownJudgeId, doc["id"].get<std::string>());
        }
        spec.id = *id;
    }
    auto read_text = [&](const char* inline_key, const char* path_key) -> std::string {
        if (doc.contains(inline_key)) return doc[inline_key].get<std::string>();
        if (doc.contains(path_key)) {
            std::filesystem::path p = doc[path_key].get<std::string>();
            if (p.is_relative()) {
                p = std::filesystem::path(path).parent_path() / p;
            }
            std::ifstream f(p);
            if (!f) throw Error(ErrorCode::IoError, "cannot read prompt file " + p.string());
            std::ostringstream buf;
            buf << f.rdbuf();
            return buf.str();
        }
        return "";
    };
    spec.base_prompt = read_text("base_prompt", "base_prompt_path");
    spec.custom_instruction = read_text("custom_instruction", "custom_instruction_path");
    if (doc.contains("few_shots")) {
        for (const json& shot : doc["few_shots"]) {
            spec.few_shots.push_back(shot.get<std::string>());
        }
    }
    spec.scale_max = doc.value("scale_max", 3);
    spec.experimental = doc.value("experimental", false);
    validate_spec(spec);
    return spec;
}

PromptBundle build_prompt(const JudgeSpec& spec, const std::string& transcript,
                          const std::optional<std::string>& architecture_preamble,
                          const std::string& trace_id) {
    validate_spec(spec);

    std::vector<const std::string*> parts;
    if (architecture_preamble.has_value() && !architecture_preamble->empty()) {
        parts.push_back(&*architecture_preamble);
    }
    if (!spec.custom_instruction.empty()) {
        parts.push_back(&spec.custom_instruction);
    }
    for (const std::string& shot : spec.few_shots) {
        parts.push_back(&shot);
    }

    PromptBundle bundle;
    bundle.judge_id = spec.id;
    bundle.trace_id = trace_id;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) bundle.system_text += "\n\n";
        bundle.system_text += *parts[i];
    }
    bundle.user_text = spec.base_prompt;
    bundle.user_text.replace(bundle.user_text.find(kTracePlaceholder),
                             std::char_traits<char>::length(kTracePlaceholder), transcript);
    bundle.content_hash =
        hex64(fnv1a64(bundle.system_text + '\x1f' + bundle.user_text));
    return bundle;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_hex_char(char c) {
    return std::isxdigit(static_cast<unsigned char>(c)) != 0;
}

// Finds hex tokens that follow the word "span" (as in "generated in span
// d65ec360f7319e84"), tolerating "span_id", "span id:", quotes, etc.
void collect_ids_after_span_token(const std::string& text, std::set<std::string>& out) {
    static const std::string kToken = "span";
    std::size_t pos = 0;
    while ((pos = text.find(kToken, pos)) != std::string::npos) {
        std::size_t cursor = pos + kToken.size();
        pos += kToken.size();
        // Skip a short run of separators / the "id" suffix.
        std::size_t skipped = 0;
        while (cursor < text.size() && skipped < 12) {
            char c = text[cursor];
            if (std::isalnum(static_cast<unsigned char>(c)) &&
                !(c == 'i' && cursor + 1 < text.size() && text[cursor + 1] == 'd')) {
                break;
            }
            if (c == 'i' && cursor + 1 < text.size() && text[cursor + 1] == 'd') {
                cursor += 2;
                skipped += 2;
                continue;
            }
            if (c == ' ' || c == '_' || c == '-' || c == ':' || c == '#' || c == '\'' ||
                c == '"' || c == '`' || c == '(' || c == '=') {
                ++cursor;
                ++skipped;
                continue;
            }
            break;
        }
        std::size_t start = cursor;
        while (cursor < text.size() && is_hex_char(text[cursor])) ++cursor;
        // Hex ids in these traces are 8+ chars; shorter matches are noise
        // ("span 3", step numbers).
        if (cursor - start >= 8) {
            out.insert(text.substr(start, cursor - start));
        }
    }
}

}  // namespace

VerdictOutcome parse_verdict(const std::string& response_text, const JudgeSpec& spec,
                             const std::set<std::string>& known_span_ids) {
    // Last line whose "Score:" is followed by an integer wins; template
    // echoes ("Score: <The score...>") carry no integer and are skipped.
    std::optional<long> score;
    {
        std::istringstream in(response_text);
        std::string line;
        while (std::getline(in, line)) {
            std::size_t at = line.rfind("Score:");
            if (at == std::string::npos) continue;
            std::size_t cursor = at + 6;
            while (cursor < line.size() &&
                   (line[cursor] == ' ' || line[cursor] == '\t' || line[cursor] == '*')) {
                ++cursor;
            }
            std::size_t start = cursor;
            if (cursor < line.size() && (line[cursor] == '-' || line[cursor] == '+')) ++cursor;
            std::size_t digits = cursor;
            while (cursor < line.size() && std::isdigit(static_cast<unsigned char>(line[cursor]))) {
                ++cursor;
            }
            if (cursor == digits) continue;  // no integer on this line
            try {
                score = std::stol(line.substr(start, cursor - start));
            } catch (const std::out_of_range&) {
                score = line[start] == '-' ? -1000 : 1000;  // far out of range
            }
        }
    }
    if (!score.has_value()) {
        return VerdictError{ErrorCode::MissingScore, "no parsable Score: line"};
    }
    if (*score < 0 || *score > spec.scale_max) {
        return VerdictError{ErrorCode::ScoreOutOfRange,
                            "score " + std::to_string(*score) + " outside 0.." +
                                std::to_string(spec.scale_max)};
    }

    JudgeVerdict verdict;
    verdict.judge_id = spec.id;
    verdict.raw_text = response_text;
    verdict.score_raw = static_cast<int>(*score);
    verdict.score_norm =
        static_cast<double>(verdict.score_raw) / static_cast<double>(spec.scale_max);

    std::size_t evidence_at = response_text.rfind("Supporting Evidence:");
    if (evidence_at != std::string::npos) {
        std::size_t body = evidence_at + std::char_traits<char>::length("Supporting Evidence:");
        std::size_t score_line = response_text.find("Score:", body);
        std::size_t end = score_line == std::string::npos ? response_text.size() : score_line;
        verdict.evidence = trim(response_text.substr(body, end - body));

        std::size_t criteria_at = response_text.rfind("Criteria:", evidence_at);
        if (criteria_at != std::string::npos) {
            std::size_t cbody = criteria_at + std::char_traits<char>::length("Criteria:");
            verdict.criteria = trim(response_text.substr(cbody, evidence_at - cbody));
        }
    }

    for (const std::string& id : known_span_ids) {
        if (!id.empty() && response_text.find(id) != std::string::npos) {
            verdict.cited_span_ids.insert(id);
        }
    }
    collect_ids_after_span_token(response_text, verdict.cited_span_ids);
    return verdict;
}

double normalize_score(int raw) {
    if (raw < 0 || raw > 3) {
        throw Error(ErrorCode::ScoreOutOfRange, std::to_string(raw));
    }
    return static_cast<double>(raw) / 3.0;
}

int bucket_score(int raw) {
    if (raw <= 0) return 0;
    if (raw >= 3) return 2;
    return 1;
}

int bucket_score_2pt(int raw) {
    return raw <= 0 ? 0 : 1;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

}  // namespace gpa
