#include "gpa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gpa/hash.hpp"
#include "gpa/prompt_texts.hpp"

namespace gpa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    out << content;
}

std::string iso_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

HarnessConfig load_config(const std::string& path) {
    HarnessConfig config;
    if (path.empty()) return config;
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::BadConfig, "config " + path + " is not a JSON object");
    }
    if (doc.contains("backend")) {
        const json& b = doc["backend"];
        config.backend.mode = b.value("mode", config.backend.mode);
        config.backend.model_id = b.value("model_id", config.backend.model_id);
        config.backend.endpoint = b.value("endpoint", config.backend.endpoint);
        config.backend.api_key_env = b.value("api_key_env", config.backend.api_key_env);
        config.backend.parallelism = b.value("parallelism", config.backend.parallelism);
        config.backend.retry_cap = b.value("retry_cap", config.backend.retry_cap);
        config.backend.backoff_base_ms = b.value("backoff_base_ms", config.backend.backoff_base_ms);
        if (b.contains("temperature") && !b["temperature"].is_null()) {
            config.backend.temperature = b["temperature"].get<double>();
        }
        config.backend.reasoning_effort =
            b.value("reasoning_effort", config.backend.reasoning_effort);
    }
    if (doc.contains("mock")) {
        config.mock.profile = doc["mock"].value("profile", config.mock.profile);
        config.mock.script_path = doc["mock"].value("script_path", config.mock.script_path);
    }
    if (doc.contains("replay")) {
        config.replay_recording = doc["replay"].value("recording", config.replay_recording);
    }
    if (doc.contains("render")) {
        config.render.max_message_chars =
            doc["render"].value("max_message_chars", config.render.max_message_chars);
    }
    config.prompts_dir = doc.value("prompts_dir", config.prompts_dir);
    config.attach_control_flow = doc.value("attach_control_flow", config.attach_control_flow);
    if (doc.contains("embedding")) {
        config.embedder = doc["embedding"].value("mode", config.embedder);
        config.embedder_dim = doc["embedding"].value("dim", config.embedder_dim);
    }
    // Relative paths in the config resolve against the config file.
    fs::path base = fs::path(path).parent_path();
    auto rebase = [&](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) {
            p = (base / p).string();
        }
    };
    rebase(config.mock.script_path);
    rebase(config.replay_recording);
    rebase(config.prompts_dir);
    return config;
}

// --- Dataset ------------------------------------------------------------

std::vector<std::string> Dataset::split_ids(const std::string& split) const {
    if (split == "dev") {
        if (!dev_ids.has_value()) {
            throw Error(ErrorCode::BadConfig, "dataset has no split manifest; run `gpa split`");
        }
        return *dev_ids;
    }
    if (split == "test") {
        if (!test_ids.has_value()) {
            throw Error(ErrorCode::BadConfig, "dataset has no split manifest; run `gpa split`");
        }
        return *test_ids;
    }
    if (split == "all") {
        return trace_order;
    }
    throw Error(ErrorCode::BadConfig, "unknown split '" + split + "'");
}

std::vector<AnnotatedError> Dataset::errors_for(
    const std::vector<std::string>& trace_ids) const {
    std::set<std::string> wanted(trace_ids.begin(), trace_ids.end());
    std::vector<AnnotatedError> out;
    for (const AnnotatedError& e : errors) {
        if (wanted.count(e.trace_id) > 0) out.push_back(e);
    }
    return out;
}

std::string Dataset::digest() const {
    std::string material;
    for (const std::string& id : trace_order) {
        material += id;
        material += ':';
        material += std::to_string(traces.at(id).spans.size());
        material += ';';
    }
    for (const AnnotatedError& e : errors) {
        material += e.error_id;
        material += to_string(e.impact);
        material += ';';
    }
    return hex64(fnv1a64(material));
}

IngestStats cmd_ingest(const std::string& trace_dir, const std::string& annotations_path,
                       const std::string& mapping_path, const std::string& out_dir) {
    std::vector<std::string> diagnostics;
    std::map<std::string, Trace> traces;
    std::vector<std::pair<std::string, std::string>> trace_files;  // id -> file

    std::vector<fs::path> files;
    if (!fs::is_directory(trace_dir)) {
        throw Error(ErrorCode::ValidationFailure, "trace dir " + trace_dir + " does not exist");
    }
    for (const auto& entry : fs::directory_iterator(trace_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
        try {
            Trace trace = parse_trace(read_file(file.string()));
            if (trace.trace_id.empty()) {
                diagnostics.push_back(file.string() + ": missing trace_id");
                continue;
            }
            if (traces.count(trace.trace_id) > 0) {
                diagnostics.push_back(file.string() + ": duplicate trace_id " + trace.trace_id);
                continue;
            }
            for (const std::string& w : trace.warnings) {
                std::cerr << "warning: " << file.string() << ": " << w << '\n';
            }
            trace_files.emplace_back(trace.trace_id, fs::absolute(file).string());
            traces.emplace(trace.trace_id, std::move(trace));
        } catch (const Error& e) {
            diagnostics.push_back(file.string() + ": " + e.what());
        }
    }

    std::vector<AnnotatedError> errors;
    std::vector<GpaMapping> mappings;
    try {
        errors = load_annotations(read_file(annotations_path));
    } catch (const Error& e) {
        diagnostics.push_back(annotations_path + ": " + std::string(e.what()));
    }
    try {
        mappings = load_gpa_mapping(read_file(mapping_path));
    } catch (const Error& e) {
        diagnostics.push_back(mapping_path + ": " + std::string(e.what()));
    }

    for (const std::string& d : cross_validate(errors, traces)) {
        diagnostics.push_back(d);
    }
    std::set<std::string> mapped_ids;
    for (const GpaMapping& m : mappings) mapped_ids.insert(m.error_id);
    for (const AnnotatedError& e : errors) {
        if (mapped_ids.count(e.error_id) == 0) {
            diagnostics.push_back("error '" + e.error_id + "' has no GPA mapping");
        }
    }
    std::set<std::string> error_ids;
    for (const AnnotatedError& e : errors) error_ids.insert(e.error_id);
    for (const GpaMapping& m : mappings) {
        if (error_ids.count(m.error_id) == 0) {
            diagnostics.push_back("mapping references unknown error '" + m.error_id + "'");
        }
    }

    if (!diagnostics.empty()) {
        std::string detail;
        for (const std::string& d : diagnostics) detail += "\n  " + d;
        throw Error(ErrorCode::ValidationFailure,
                    std::to_string(diagnostics.size()) + " problem(s):" + detail);
    }

    fs::create_directories(out_dir);
    json index;
    index["traces"] = json::array();
    std::sort(trace_files.begin(), trace_files.end());
    for (const auto& [id, file] : trace_files) {
        index["traces"].push_back({{"trace_id", id}, {"file", file}});
    }
    index["annotations"] = fs::absolute(annotations_path).string();
    index["mapping"] = fs::absolute(mapping_path).string();

    IngestStats stats;
    stats.n_traces = traces.size();
    stats.n_errors = errors.size();
    for (const AnnotatedError& e : errors) {
        ++stats.errors_by_impact[to_string(e.impact)];
    }
    index["totals"] = {{"traces", stats.n_traces}, {"errors", stats.n_errors}};
    for (const auto& [impact, count] : stats.errors_by_impact) {
        index["totals"]["errors_by_impact"][impact] = count;
    }
    write_file((fs::path(out_dir) / "index.json").string(), index.dump(2) + "\n");
    return stats;
}

Dataset load_dataset(const std::string& dataset_dir) {
    fs::path root = dataset_dir;
    fs::path index_path = fs::is_directory(root) ? root / "index.json" : root;
    json index = json::parse(read_file(index_path.string()), nullptr, false);
    if (index.is_discarded() || !index.is_object()) {
        throw Error(ErrorCode::ValidationFailure,
                    "dataset index " + index_path.string() + " is not valid JSON");
    }

    Dataset ds;
    ds.root = index_path.parent_path().string();
    for (const json& entry : index["traces"]) {
        Trace trace = parse_trace(read_file(entry["file"].get<std::string>()));
        ds.trace_order.push_back(trace.trace_id);
        ds.traces.emplace(trace.trace_id, std::move(trace));
    }
    std::sort(ds.trace_order.begin(), ds.trace_order.end());
    ds.errors = load_annotations(read_file(index["annotations"].get<std::string>()));
    ds.mappings = load_gpa_mapping(read_file(index["mapping"].get<std::string>()));

    fs::path split_path = fs::path(ds.root) / "split.json";
    if (fs::exists(split_path)) {
        json split = json::parse(read_file(split_path.string()));
        ds.dev_ids = split["dev"].get<std::vector<std::string>>();
        ds.test_ids = split["test"].get<std::vector<std::string>>();
    }
    return ds;
}

SplitStats cmd_split(const std::string& dataset_dir, double ratio, std::uint64_t seed) {
    Dataset ds = load_dataset(dataset_dir);
    auto [dev, test] = split_dataset(ds.trace_order, ratio, seed);

    SplitStats stats;
    stats.dev_ids = dev;
    stats.test_ids = test;
    for (const AnnotatedError& e : ds.errors_for(dev)) {
        ++stats.dev_errors_by_impact[to_string(e.impact)];
    }
    for (const AnnotatedError& e : ds.errors_for(test)) {
        ++stats.test_errors_by_impact[to_string(e.impact)];
    }

    json doc;
    doc["ratio"] = ratio;
    doc["seed"] = seed;
    doc["dev"] = dev;
    doc["test"] = test;
    write_file((fs::path(ds.root) / "split.json").string(), doc.dump(2) + "\n");
    return stats;
}

// --- Evaluate -----------------------------------------------------------

namespace {

std::unique_ptr<LlmBackend> make_backend(const HarnessConfig& config) {
    if (config.backend.mode == "mock") {
        MockBackend::Profile profile = MockBackend::Profile::FIXED;
        if (config.mock.profile == "jitter") profile = MockBackend::Profile::JITTER;
        if (config.mock.profile == "scripted") profile = MockBackend::Profile::SCRIPTED;
        auto backend = std::make_unique<MockBackend>(profile);
        if (profile == MockBackend::Profile::SCRIPTED) {
            if (config.mock.script_path.empty()) {
                throw Error(ErrorCode::BadConfig, "scripted mock needs mock.script_path");
            }
            backend->load_script_file(config.mock.script_path);
        }
        return backend;
    }
    if (config.backend.mode == "replay") {
        if (config.replay_recording.empty()) {
            throw Error(ErrorCode::BadConfig, "replay mode needs replay.recording");
        }
        return std::make_unique<ReplayBackend>(config.replay_recording);
    }
    if (config.backend.mode == "live") {
        LiveBackendConfig live;
        live.endpoint = config.backend.endpoint;
        live.api_key_env = config.backend.api_key_env;
        return std::make_unique<LiveBackend>(live);
    }
    throw Error(ErrorCode::BadConfig, "unknown backend mode '" + config.backend.mode + "'");
}

// Prompt assets are loadable and overridable by path: <dir>/<id>_base.txt
// replaces the embedded base prompt, <id>_custom.txt the custom instruction.
JudgeSpec resolve_spec(JudgeId id, const std::string& prompts_dir) {
    JudgeSpec spec = builtin_judge(id);
    if (prompts_dir.empty()) return spec;
    std::string stem = to_string(id);
    std::transform(stem.begin(), stem.end(), stem.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    fs::path base = fs::path(prompts_dir) / (stem + "_base.txt");
    fs::path custom = fs::path(prompts_dir) / (stem + "_custom.txt");
    if (fs::exists(base)) spec.base_prompt = read_file(base.string());
    if (fs::exists(custom)) spec.custom_instruction = read_file(custom.string());
    validate_spec(spec);
    return spec;
}

std::string derive_run_id(const RunManifest& manifest, const std::string& dataset_digest) {
    std::string material = dataset_digest + '|' + manifest.split + '|' + manifest.model_id + '|' +
                           std::to_string(manifest.n_runs) + '|' +
                           std::to_string(manifest.seed) + '|' + manifest.backend_mode;
    for (JudgeId j : manifest.judges) material += to_string(j);
    return "run-" + hex64(fnv1a64(material));
}

json manifest_to_json(const RunManifest& manifest) {
    json doc;
    doc["run_id"] = manifest.run_id;
    doc["dataset_path"] = manifest.dataset_path;
    doc["split"] = manifest.split;
    doc["judges"] = json::array();
    for (JudgeId j : manifest.judges) doc["judges"].push_back(to_string(j));
    doc["model_id"] = manifest.model_id;
    doc["n_runs"] = manifest.n_runs;
    doc["seed"] = manifest.seed;
    doc["backend_mode"] = manifest.backend_mode;
    doc["started_at"] = manifest.started_at;
    return doc;
}

RunManifest manifest_from_json(const json& doc) {
    RunManifest manifest;
    manifest.run_id = doc.value("run_id", "");
    manifest.dataset_path = doc.value("dataset_path", "");
    manifest.split = doc.value("split", "all");
    manifest.judges.clear();
    for (const json& j : doc["judges"]) {
        auto id = judge_id_from_string(j.get<std::string>());
        if (id.has_value()) manifest.judges.push_back(*id);
    }
    manifest.model_id = doc.value("model_id", "");
    manifest.n_runs = doc.value("n_runs", 1);
    manifest.seed = doc.value("seed", std::uint64_t{0});
    manifest.backend_mode = doc.value("backend_mode", "");
    manifest.started_at = doc.value("started_at", "");
    return manifest;
}

struct EvalTask {
    std::size_t trace_index;
    JudgeId judge;
    int run_index;
};

}  // namespace

EvaluateResult cmd_evaluate(const RunManifest& manifest_in, const HarnessConfig& config,
                            const std::string& runs_root,
                            const std::string& dump_transcripts_dir) {
    if (manifest_in.n_runs < 1) {
        throw Error(ErrorCode::BadConfig, "n_runs must be >= 1");
    }
    Dataset dataset = load_dataset(manifest_in.dataset_path);

    RunManifest manifest = manifest_in;
    manifest.backend_mode = config.backend.mode;
    manifest.model_id =
        manifest.model_id.empty() ? config.backend.model_id : manifest.model_id;
    if (manifest.run_id.empty()) {
        manifest.run_id = derive_run_id(manifest, dataset.digest());
    }
    manifest.started_at = iso_now();

    fs::path run_dir = fs::path(runs_root) / manifest.run_id;
    fs::create_directories(run_dir);
    fs::path manifest_path = run_dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        write_file(manifest_path.string(), manifest_to_json(manifest).dump(2) + "\n");
    }

    std::vector<std::string> trace_ids = dataset.split_ids(manifest.split);
    std::sort(trace_ids.begin(), trace_ids.end());

    // Preprocess once per trace; transcripts are reused by every judge.
    std::vector<std::string> transcripts(trace_ids.size());
    std::vector<std::set<std::string>> known_ids(trace_ids.size());
    for (std::size_t i = 0; i < trace_ids.size(); ++i) {
        const Trace& trace = dataset.traces.at(trace_ids[i]);
        ProcessedTrace pt = preprocess_trace(trace, config.render);
        transcripts[i] = render_transcript(pt, config.render);
        for (const Span& s : trace.spans) known_ids[i].insert(s.span_id);
        if (!dump_transcripts_dir.empty()) {
            fs::create_directories(dump_transcripts_dir);
            write_file((fs::path(dump_transcripts_dir) / (trace.trace_id + ".txt")).string(),
                       transcripts[i]);
        }
    }

    ResponseCache cache;
    fs::path cache_path = run_dir / "cache.jsonl";
    if (fs::exists(cache_path)) {
        cache.load_file(cache_path.string());
    }

    std::unique_ptr<LlmBackend> backend = make_backend(config);
    RetryPolicy policy;
    policy.attempt_cap = config.backend.retry_cap;
    policy.backoff_base_ms = config.backend.backoff_base_ms;

    std::map<JudgeId, JudgeSpec> specs;
    for (JudgeId id : manifest.judges) {
        specs.emplace(id, resolve_spec(id, config.prompts_dir));
    }
    std::optional<std::string> preamble;
    if (config.attach_control_flow) preamble = control_flow_preamble();

    std::vector<EvalTask> tasks;
    for (std::size_t t = 0; t < trace_ids.size(); ++t) {
        for (JudgeId judge : manifest.judges) {
            for (int run = 0; run < manifest.n_runs; ++run) {
                tasks.push_back({t, judge, run});
            }
        }
    }

    // Bundles depend on (judge, trace) only; precompute them.
    std::map<std::pair<JudgeId, std::size_t>, PromptBundle> bundles;
    for (std::size_t t = 0; t < trace_ids.size(); ++t) {
        for (JudgeId judge : manifest.judges) {
            bundles.emplace(std::make_pair(judge, t),
                            build_prompt(specs.at(judge), transcripts[t], preamble, trace_ids[t]));
        }
    }

    EvaluateResult result;
    result.run_dir = run_dir.string();

    std::mutex io_mutex;
    std::atomic<std::size_t> next_task{0};
    std::atomic<std::size_t> backend_calls{0};
    std::atomic<int> worst_exit{kExitOk};
    std::vector<json> lines(tasks.size());

    auto worker = [&] {
        while (true) {
            std::size_t i = next_task.fetch_add(1);
            if (i >= tasks.size()) break;
            const EvalTask& task = tasks[i];
            const PromptBundle& bundle = bundles.at({task.judge, task.trace_index});
            const std::string& trace_id = trace_ids[task.trace_index];

            json line;
            line["judge_id"] = to_string(task.judge);
            line["trace_id"] = trace_id;
            line["run_index"] = task.run_index;
            line["model_id"] = manifest.model_id;
            line["content_hash"] = bundle.content_hash;
            try {
                bool was_cached = cache.get(ResponseCache::key(bundle.content_hash,
                                                               manifest.model_id,
                                                               task.run_index))
                                      .has_value();
                BackendResponse response =
                    invoke(*backend, &cache, bundle, task.run_index, manifest.model_id, policy,
                           config.backend.temperature, config.backend.reasoning_effort);
                if (!was_cached) {
                    backend_calls.fetch_add(1);
                    std::lock_guard lock(io_mutex);
                    cache.append_entry(cache_path.string(), bundle.content_hash,
                                       manifest.model_id, task.run_index, response.text);
                }
                VerdictOutcome outcome = parse_verdict(response.text, specs.at(task.judge),
                                                       known_ids[task.trace_index]);
                if (std::holds_alternative<JudgeVerdict>(outcome)) {
                    const auto& v = std::get<JudgeVerdict>(outcome);
                    line["valid"] = true;
                    line["score_raw"] = v.score_raw;
                    line["score_norm"] = v.score_norm;
                    line["criteria"] = v.criteria;
                    line["evidence"] = v.evidence;
                    line["cited_span_ids"] = v.cited_span_ids;
                    line["raw_text"] = v.raw_text;
                } else {
                    const auto& e = std::get<VerdictError>(outcome);
                    line["valid"] = false;
                    line["error"] = error_code_name(e.code);
                    line["reason"] = e.message;
                    line["raw_text"] = response.text;
                }
            } catch (const Error& e) {
                line["valid"] = false;
                line["error"] = error_code_name(e.code());
                line["reason"] = e.what();
                int exit_code = kExitOk;
                if (e.code() == ErrorCode::CacheMissInReplayMode) exit_code = kExitReplayGap;
                if (e.code() == ErrorCode::BackendExhausted) exit_code = kExitBackendExhausted;
                int prev = worst_exit.load();
                while (exit_code > prev && !worst_exit.compare_exchange_weak(prev, exit_code)) {
                }
            }
            lines[i] = std::move(line);
        }
    };

    int n_threads = std::max(1, config.backend.parallelism);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    // One file per judge, lines in canonical (trace, run) order.
    std::map<JudgeId, std::ostringstream> per_judge;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        per_judge[tasks[i].judge] << lines[i].dump() << '\n';
        if (lines[i].value("valid", false)) {
            ++result.verdicts_written;
        } else {
            ++result.invalid_runs;
        }
    }
    for (auto& [judge, stream] : per_judge) {
        std::string stem = to_string(judge);
        std::transform(stem.begin(), stem.end(), stem.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        write_file((run_dir / ("verdicts-" + stem + ".jsonl")).string(), stream.str());
    }

    result.backend_calls = backend_calls.load();
    result.exit_code = worst_exit.load();
    return result;
}

StoredVerdicts load_run(const std::string& run_dir) {
    StoredVerdicts store;
    fs::path dir = run_dir;
    json mdoc = json::parse(read_file((dir / "manifest.json").string()));
    store.manifest = manifest_from_json(mdoc);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("verdicts-", 0) == 0 && entry.path().extension() == ".jsonl") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
        std::istringstream in(read_file(file.string()));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json rec = json::parse(line, nullptr, false);
            if (rec.is_discarded()) continue;
            auto judge = judge_id_from_string(rec.value("judge_id", ""));
            if (!judge.has_value()) continue;
            if (rec.value("valid", false)) {
                JudgeVerdict v;
                v.judge_id = *judge;
                v.trace_id = rec.value("trace_id", "");
                v.run_index = rec.value("run_index", 0);
                v.model_id = rec.value("model_id", "");
                v.score_raw = rec.value("score_raw", 0);
                v.score_norm = rec.value("score_norm", 0.0);
                v.criteria = rec.value("criteria", "");
                v.evidence = rec.value("evidence", "");
                v.raw_text = rec.value("raw_text", "");
                if (rec.contains("cited_span_ids")) {
                    for (const json& id : rec["cited_span_ids"]) {
                        v.cited_span_ids.insert(id.get<std::string>());
                    }
                }
                store.valid.push_back(std::move(v));
            } else {
                store.invalid.push_back({*judge, rec.value("trace_id", ""),
                                         rec.value("run_index", 0), rec.value("reason", "")});
            }
        }
    }
    return store;
}

std::string format_fraction_cell(std::size_t numerator, std::size_t denominator) {
    char buf[64];
    double pct = denominator == 0
                     ? 0.0
                     : 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
    std::snprintf(buf, sizeof buf, "%zu/%zu (%.2f%%)", numerator, denominator, pct);
    return buf;
}

}  // namespace gpa
