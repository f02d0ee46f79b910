#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpa/backend.hpp"
#include "gpa/embedding.hpp"
#include "gpa/matching.hpp"
#include "gpa/metrics.hpp"
#include "gpa/preprocess.hpp"
#include "gpa/trace.hpp"

namespace gpa {

// CI-friendly process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 2;
inline constexpr int kExitBackendExhausted = 3;
inline constexpr int kExitReplayGap = 4;

struct BackendSettings {
    std::string mode = "mock";  // live | replay | mock
    std::string model_id = "mock-model";
    std::string endpoint;
    std::string api_key_env = "GPA_API_KEY";
    int parallelism = 1;
    int retry_cap = 3;
    int backoff_base_ms = 100;
    std::optional<double> temperature;  // unpinned unless configured
    std::string reasoning_effort = "high";
};

struct MockSettings {
    std::string profile = "fixed";  // fixed | jitter | scripted
    std::string script_path;
};

struct HarnessConfig {
    BackendSettings backend;
    MockSettings mock;
    std::string replay_recording;  // cache JSONL for replay mode
    RenderOptions render;
    std::string prompts_dir;  // optional override of shipped prompt assets
    bool attach_control_flow = true;
    std::string embedder = "hashed-tf";
    std::size_t embedder_dim = 256;
};

HarnessConfig load_config(const std::string& path);

struct RunManifest {
    std::string run_id;  // derived from content when empty
    std::string dataset_path;
    std::string split = "all";  // dev | test | all
    std::vector<JudgeId> judges = default_judges();
    std::string model_id;
    int n_runs = 1;
    std::uint64_t seed = 0;
    std::string backend_mode;
    std::string started_at;  // informational; excluded from provenance
};

// Validated, indexed dataset as produced by cmd_ingest.
struct Dataset {
    std::string root;
    std::map<std::string, Trace> traces;
    std::vector<std::string> trace_order;  // sorted ids
    std::vector<AnnotatedError> errors;
    std::vector<GpaMapping> mappings;
    std::optional<std::vector<std::string>> dev_ids;
    std::optional<std::vector<std::string>> test_ids;

    // Trace ids for a split label; "all" (or no split manifest) = every trace.
    std::vector<std::string> split_ids(const std::string& split) const;
    std::vector<AnnotatedError> errors_for(const std::vector<std::string>& trace_ids) const;
    std::string digest() const;  // stable content digest for compare checks
};

struct IngestStats {
    std::size_t n_traces = 0;
    std::size_t n_errors = 0;
    std::map<std::string, std::size_t> errors_by_impact;
};

// Validates traces, cross-checks annotation span ids and mapping coverage,
// writes <out_dir>/index.json. Throws ValidationFailure with per-file
// diagnostics.
IngestStats cmd_ingest(const std::string& trace_dir, const std::string& annotations_path,
                       const std::string& mapping_path, const std::string& out_dir);

Dataset load_dataset(const std::string& dataset_dir);

// Persists dev/test membership (split.json) via split_dataset.
struct SplitStats {
    std::vector<std::string> dev_ids;
    std::vector<std::string> test_ids;
    std::map<std::string, std::size_t> dev_errors_by_impact;
    std::map<std::string, std::size_t> test_errors_by_impact;
};
SplitStats cmd_split(const std::string& dataset_dir, double ratio, std::uint64_t seed);

struct EvaluateResult {
    std::string run_dir;
    int exit_code = kExitOk;
    std::size_t verdicts_written = 0;
    std::size_t invalid_runs = 0;
    std::size_t backend_calls = 0;
};

// For each (trace, judge, run): preprocess, build the prompt, invoke the
// backend, parse the verdict, append to the run store. Responses land in
// cache.jsonl as they arrive, so interrupted runs resume without repeating
// backend calls. Backend exhaustion and replay gaps become invalid-run
// markers; the run continues and the exit code reports the worst failure.
EvaluateResult cmd_evaluate(const RunManifest& manifest, const HarnessConfig& config,
                            const std::string& runs_root,
                            const std::string& dump_transcripts_dir = "");

struct StoredVerdicts {
    std::vector<JudgeVerdict> valid;
    struct InvalidRun {
        JudgeId judge_id;
        std::string trace_id;
        int run_index;
        std::string reason;
    };
    std::vector<InvalidRun> invalid;
    RunManifest manifest;
};

StoredVerdicts load_run(const std::string& run_dir);

struct ReportBundle {
    // split label -> coverage tables (cells carry numerator + denominator)
    std::map<std::string, CoverageTable> identification;
    std::map<std::string, CoverageTable> localization;
    // split -> unit -> judge -> impact ("ALL" included) -> counts
    std::map<std::string,
             std::map<std::string, std::map<std::string, std::map<std::string, ConfusionCounts>>>>
        classification;
    // split -> judge -> alignment vs human scores
    std::map<std::string, std::map<std::string, AlignmentReport>> alignment;
    // judge -> reliability across runs (needs n_runs >= 2)
    std::map<std::string, ReliabilityReport> reliability;
    // judge -> why reliability is absent (e.g. InsufficientData)
    std::map<std::string, std::string> reliability_notes;

    MatchMode matching_mode = MatchMode::AUTO;
    std::string run_id;
    std::string dataset_digest;
    std::string split;
    std::string model_id;
    std::string backend_mode;
    int n_runs = 1;
    std::vector<std::string> judges;
    std::string cache_digest;
};

struct ReportOptions {
    MatchMode matching = MatchMode::AUTO;
    std::string adjudication_path;  // required for ADJUDICATED
    std::string human_scores_path;  // enables alignment tables
    bool emit_error_unit = true;    // also emit ERROR_JUDGE classification
};

ReportBundle cmd_report(const std::string& run_dir, const Dataset& dataset,
                        const ReportOptions& options, const HarnessConfig& config);

std::string render_report_json(const ReportBundle& bundle);
std::string render_report_markdown(const ReportBundle& bundle);

// Rehydrates the parts of a bundle that cmd_compare needs from a
// report.json on disk.
ReportBundle load_report_json(const std::string& path);

// Reliability statistics over >= 2 runs: per-judge runs x traces matrices of
// normalized scores feed alpha and dispersion; rationale embeddings feed SCI.
// Multiple run dirs merge with each (store, run) pair as a distinct rater.
std::map<std::string, ReliabilityReport> cmd_consistency(
    const std::vector<std::string>& run_dirs, const Dataset& dataset,
    const HarnessConfig& config, std::map<std::string, std::string>* notes = nullptr);

// The same runs x traces matrices as CSV, one per judge, for external
// analysis. Keys are judge labels.
std::map<std::string, std::string> score_matrices_csv(const std::vector<std::string>& run_dirs,
                                                      const Dataset& dataset);

struct ComparisonRow {
    std::string impact;
    CoverageCell a;
    CoverageCell b;
    long long caught_delta = 0;
    long long localized_delta = 0;
};

struct Comparison {
    std::vector<ComparisonRow> rows;  // per impact + ALL
    std::string split;
    std::string label_a;
    std::string label_b;
};

// Side-by-side coverage/localization deltas; throws DatasetMismatch when the
// two bundles cover different datasets or splits.
Comparison cmd_compare(const ReportBundle& a, const ReportBundle& b);

std::string render_comparison_markdown(const Comparison& comparison);

// "19/20 (95.00%)" — the coverage cell format used everywhere.
std::string format_fraction_cell(std::size_t numerator, std::size_t denominator);

}  // namespace gpa
