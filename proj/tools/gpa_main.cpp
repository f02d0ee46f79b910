#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpa/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<gpa::JudgeId> parse_judges(const std::string& list) {
    if (list.empty() || list == "default") return gpa::default_judges();
    if (list == "all") return gpa::all_judges();
    std::vector<gpa::JudgeId> out;
    std::string token;
    std::istringstream in(list);
    while (std::getline(in, token, ',')) {
        auto id = gpa::judge_id_from_string(token);
        if (!id.has_value()) {
            throw gpa::Error(gpa::ErrorCode::UnknownJudgeId, token);
        }
        out.push_back(*id);
    }
    if (out.empty()) {
        throw gpa::Error(gpa::ErrorCode::EmptyJudgeSet, "--judges " + list);
    }
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw gpa::Error(gpa::ErrorCode::IoError, "cannot write " + path);
    }
    out << content;
}

void print_impact_totals(const std::map<std::string, std::size_t>& by_impact) {
    for (const char* impact : {"LOW", "MEDIUM", "HIGH"}) {
        auto it = by_impact.find(impact);
        std::cout << "  " << impact << ": " << (it == by_impact.end() ? 0 : it->second) << '\n';
    }
}

int exit_code_for(const gpa::Error& e) {
    switch (e.code()) {
        case gpa::ErrorCode::ValidationFailure: return gpa::kExitValidationFailure;
        case gpa::ErrorCode::BackendExhausted: return gpa::kExitBackendExhausted;
        case gpa::ErrorCode::CacheMissInReplayMode: return gpa::kExitReplayGap;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference-free GPA evaluation harness for agent traces"};
    app.require_subcommand(1);
    // Let `gpa <verb> --config ...` reach the global option.
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "Harness config JSON")->envname("GPA_CONFIG");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate and index a trace dataset");
    std::string trace_dir, annotations, mapping, dataset_out;
    ingest->add_option("--traces", trace_dir, "Directory of trace JSON files")->required();
    ingest->add_option("--annotations", annotations, "Annotated errors JSONL")->required();
    ingest->add_option("--mapping", mapping, "GPA mapping JSONL")->required();
    ingest->add_option("--out", dataset_out, "Dataset directory to create")->required();

    // split
    auto* split = app.add_subcommand("split", "Persist a dev/test split");
    std::string split_dataset_dir;
    double ratio = 0.5;
    std::uint64_t split_seed = 0;
    split->add_option("--dataset", split_dataset_dir, "Dataset directory")->required();
    split->add_option("--ratio", ratio, "Dev fraction (default 0.5)");
    split->add_option("--seed", split_seed, "Shuffle seed");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Run judges over a dataset");
    std::string eval_dataset, eval_split = "all", judges_list, backend_override, model_override;
    std::string runs_root = "runs", run_id, dump_transcripts;
    int n_runs = 1;
    std::uint64_t eval_seed = 0;
    evaluate->add_option("--dataset", eval_dataset, "Dataset directory")->required();
    evaluate->add_option("--split", eval_split, "dev|test|all")
        ->check(CLI::IsMember({"dev", "test", "all"}));
    evaluate->add_option("--judges", judges_list, "Comma-separated ids, 'default' or 'all'");
    evaluate->add_option("--runs", n_runs, "Independent runs per (trace, judge); default 1");
    evaluate->add_option("--backend", backend_override, "live|replay|mock (overrides config)")
        ->check(CLI::IsMember({"live", "replay", "mock"}));
    evaluate->add_option("--model", model_override, "Model id (overrides config)");
    evaluate->add_option("--seed", eval_seed, "Run seed recorded in the manifest");
    evaluate->add_option("--out", runs_root, "Run store root (default runs/)");
    evaluate->add_option("--run-id", run_id, "Explicit run id (default derived)");
    evaluate->add_option("--dump-transcripts", dump_transcripts,
                         "Write rendered transcripts to this directory");

    // report
    auto* report = app.add_subcommand("report", "Build report tables from a run");
    std::string report_run, report_dataset, matching = "auto", adjudication, human_scores;
    std::string report_out, skeleton_out;
    report->add_option("--run", report_run, "Run directory")->required();
    report->add_option("--dataset", report_dataset, "Dataset directory")->required();
    report->add_option("--matching", matching, "auto|adjudicated")
        ->check(CLI::IsMember({"auto", "adjudicated"}));
    report->add_option("--adjudication", adjudication, "Adjudication JSONL");
    report->add_option("--human-scores", human_scores, "Human scores JSONL");
    report->add_option("--out", report_out, "Output directory (default: run dir)");
    report->add_option("--emit-adjudication-skeleton", skeleton_out,
                       "Write a pre-filled adjudication skeleton and exit");

    // consistency
    auto* consistency = app.add_subcommand("consistency", "Reliability statistics across runs");
    std::vector<std::string> consistency_runs;
    std::string consistency_dataset, consistency_out, matrices_dir;
    consistency->add_option("--run", consistency_runs, "Run directory (repeatable)")
        ->required()
        ->expected(-1);
    consistency->add_option("--dataset", consistency_dataset, "Dataset directory")->required();
    consistency->add_option("--out", consistency_out, "Output directory");
    consistency->add_option("--export-matrices", matrices_dir,
                            "Write per-judge runs x traces score CSVs here");

    // compare
    auto* compare = app.add_subcommand("compare", "Diff two report bundles");
    std::string report_a, report_b, compare_out;
    compare->add_option("--a", report_a, "First report.json")->required();
    compare->add_option("--b", report_b, "Second report.json")->required();
    compare->add_option("--out", compare_out, "Write markdown here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        gpa::HarnessConfig config = gpa::load_config(config_path);

        if (*ingest) {
            gpa::IngestStats stats = gpa::cmd_ingest(trace_dir, annotations, mapping, dataset_out);
            std::cout << "ingested " << stats.n_traces << " traces, " << stats.n_errors
                      << " annotated errors\n";
            print_impact_totals(stats.errors_by_impact);
        }

        if (*split) {
            gpa::SplitStats stats = gpa::cmd_split(split_dataset_dir, ratio, split_seed);
            std::cout << "dev: " << stats.dev_ids.size() << " traces\n";
            print_impact_totals(stats.dev_errors_by_impact);
            std::cout << "test: " << stats.test_ids.size() << " traces\n";
            print_impact_totals(stats.test_errors_by_impact);
        }

        if (*evaluate) {
            if (!backend_override.empty()) config.backend.mode = backend_override;
            gpa::RunManifest manifest;
            manifest.dataset_path = eval_dataset;
            manifest.split = eval_split;
            manifest.judges = parse_judges(judges_list);
            manifest.n_runs = n_runs;
            manifest.seed = eval_seed;
            manifest.run_id = run_id;
            if (!model_override.empty()) manifest.model_id = model_override;
            gpa::EvaluateResult result =
                gpa::cmd_evaluate(manifest, config, runs_root, dump_transcripts);
            std::cout << "run dir: " << result.run_dir << '\n'
                      << "verdicts: " << result.verdicts_written << ", invalid runs: "
                      << result.invalid_runs << ", backend calls: " << result.backend_calls
                      << '\n';
            return result.exit_code;
        }

        if (*report) {
            gpa::Dataset dataset = gpa::load_dataset(report_dataset);
            gpa::ReportOptions options;
            options.matching = matching == "adjudicated" ? gpa::MatchMode::ADJUDICATED
                                                         : gpa::MatchMode::AUTO;
            options.adjudication_path = adjudication;
            options.human_scores_path = human_scores;

            if (!skeleton_out.empty()) {
                gpa::StoredVerdicts store = gpa::load_run(report_run);
                std::vector<gpa::MatchRecord> records;
                std::map<std::string, std::vector<const gpa::AnnotatedError*>> by_trace;
                for (const auto& e : dataset.errors) by_trace[e.trace_id].push_back(&e);
                for (const auto& v : store.valid) {
                    auto it = by_trace.find(v.trace_id);
                    if (it == by_trace.end()) continue;
                    for (const auto* e : it->second) records.push_back(gpa::auto_match(v, *e));
                }
                write_text(skeleton_out, gpa::serialize_adjudication_skeleton(records));
                std::cout << "wrote " << skeleton_out << '\n';
                return gpa::kExitOk;
            }

            gpa::ReportBundle bundle = gpa::cmd_report(report_run, dataset, options, config);
            fs::path out_dir = report_out.empty() ? fs::path(report_run) : fs::path(report_out);
            fs::create_directories(out_dir);
            write_text((out_dir / "report.json").string(), gpa::render_report_json(bundle));
            write_text((out_dir / "report.md").string(), gpa::render_report_markdown(bundle));
            std::cout << "wrote " << (out_dir / "report.json").string() << " and report.md\n";
        }

        if (*consistency) {
            gpa::Dataset dataset = gpa::load_dataset(consistency_dataset);
            std::map<std::string, std::string> notes;
            auto reports = gpa::cmd_consistency(consistency_runs, dataset, config, &notes);
            std::cout << "| Judge | n_traces | alpha | Avg std | 95% CI | SCI |\n";
            for (const auto& [judge, r] : reports) {
                std::cout << "| " << judge << " | " << r.n_traces << " | " << r.alpha << " | "
                          << r.avg_std << " | " << r.ci95_halfwidth << " | "
                          << (r.sci.has_value() ? std::to_string(*r.sci) : "—") << " |\n";
            }
            for (const auto& [judge, note] : notes) {
                std::cout << judge << ": " << note << '\n';
            }
            if (!matrices_dir.empty()) {
                fs::create_directories(matrices_dir);
                for (const auto& [judge, csv] :
                     gpa::score_matrices_csv(consistency_runs, dataset)) {
                    std::string stem = judge;
                    for (char& ch : stem) ch = static_cast<char>(std::tolower(ch));
                    write_text((fs::path(matrices_dir) / ("scores-" + stem + ".csv")).string(),
                               csv);
                }
            }
            if (!consistency_out.empty()) {
                fs::create_directories(consistency_out);
                nlohmann::ordered_json doc;
                for (const auto& [judge, r] : reports) {
                    doc[judge] = {{"alpha", r.alpha},
                                  {"n_traces", r.n_traces},
                                  {"avg_std", r.avg_std},
                                  {"ci95_halfwidth", r.ci95_halfwidth}};
                    if (r.sci.has_value()) doc[judge]["sci"] = *r.sci;
                }
                for (const auto& [judge, note] : notes) doc["notes"][judge] = note;
                write_text((fs::path(consistency_out) / "consistency.json").string(),
                           doc.dump(2) + "\n");
            }
        }

        if (*compare) {
            gpa::ReportBundle a = gpa::load_report_json(report_a);
            gpa::ReportBundle b = gpa::load_report_json(report_b);
            gpa::Comparison comparison = gpa::cmd_compare(a, b);
            std::string md = gpa::render_comparison_markdown(comparison);
            if (compare_out.empty()) {
                std::cout << md;
            } else {
                write_text(compare_out, md);
            }
        }
    } catch (const gpa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return gpa::kExitOk;
}
