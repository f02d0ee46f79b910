#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gpa/harness.hpp"
#include "gpa/hash.hpp"

namespace gpa {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

namespace {

std::string read_file_or_empty(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string round4(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

std::string opt4(const std::optional<double>& value) {
    return value.has_value() ? round4(*value) : std::string("—");
}

// Splits a report covers: the manifest split itself, plus per-split views
// when the run spans the whole dataset and a split manifest exists.
std::vector<std::string> report_splits(const Dataset& dataset, const std::string& run_split) {
    if (run_split != "all") return {run_split};
    std::vector<std::string> splits = {"all"};
    if (dataset.dev_ids.has_value() && dataset.test_ids.has_value()) {
        splits.push_back("dev");
        splits.push_back("test");
    }
    return splits;
}

struct HumanScores {
    // judge -> trace -> raw score 0..3
    std::map<JudgeId, std::map<std::string, int>> scores;
};

HumanScores load_human_scores(const std::string& path) {
    HumanScores hs;
    std::istringstream in(read_file_or_empty(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw Error(ErrorCode::MalformedDocument,
                        "human scores line " + std::to_string(lineno));
        }
        auto judge = judge_id_from_string(rec.value("judge_id", ""));
        if (!judge.has_value()) {
            throw Error(ErrorCode::UnknownJudgeId, rec.value("judge_id", "?"));
        }
        hs.scores[*judge][rec.value("trace_id", "")] = rec.value("score", 0);
    }
    return hs;
}

std::vector<MatchRecord> build_match_records(const StoredVerdicts& store,
                                             const Dataset& dataset) {
    std::vector<MatchRecord> records;
    std::map<std::string, std::vector<const AnnotatedError*>> errors_by_trace;
    for (const AnnotatedError& e : dataset.errors) {
        errors_by_trace[e.trace_id].push_back(&e);
    }
    for (const JudgeVerdict& v : store.valid) {
        auto it = errors_by_trace.find(v.trace_id);
        if (it == errors_by_trace.end()) continue;
        for (const AnnotatedError* e : it->second) {
            records.push_back(auto_match(v, *e));
        }
    }
    return records;
}

}  // namespace

ReportBundle cmd_report(const std::string& run_dir, const Dataset& dataset,
                        const ReportOptions& options, const HarnessConfig& config) {
    StoredVerdicts store = load_run(run_dir);

    ReportBundle bundle;
    bundle.matching_mode = options.matching;
    bundle.run_id = store.manifest.run_id;
    bundle.dataset_digest = dataset.digest();
    bundle.split = store.manifest.split;
    bundle.model_id = store.manifest.model_id;
    bundle.backend_mode = store.manifest.backend_mode;
    bundle.n_runs = store.manifest.n_runs;
    for (JudgeId j : store.manifest.judges) bundle.judges.push_back(to_string(j));
    // Parallel evaluation appends cache lines in arrival order; digest the
    // sorted lines so the provenance stays order-independent.
    std::string cache_bytes = read_file_or_empty((fs::path(run_dir) / "cache.jsonl").string());
    if (cache_bytes.empty()) {
        bundle.cache_digest = "absent";
    } else {
        std::vector<std::string> lines;
        std::istringstream in(cache_bytes);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) lines.push_back(line);
        }
        std::sort(lines.begin(), lines.end());
        std::string joined;
        for (const std::string& l : lines) {
            joined += l;
            joined += '\n';
        }
        bundle.cache_digest = hex64(fnv1a64(joined));
    }

    // Verdicts must stay within the dataset.
    for (const JudgeVerdict& v : store.valid) {
        if (dataset.traces.count(v.trace_id) == 0) {
            throw Error(ErrorCode::CoverageGap,
                        "verdict for unknown trace '" + v.trace_id + "'");
        }
    }

    std::vector<MatchRecord> records = build_match_records(store, dataset);
    if (options.matching == MatchMode::ADJUDICATED) {
        if (options.adjudication_path.empty()) {
            throw Error(ErrorCode::BadConfig, "ADJUDICATED matching needs an adjudication file");
        }
        std::string doc = read_file_or_empty(options.adjudication_path);
        if (doc.empty()) {
            throw Error(ErrorCode::IoError,
                        "cannot read adjudication file " + options.adjudication_path);
        }
        records = apply_adjudication(std::move(records), load_adjudications(doc));
    }

    std::optional<HumanScores> human;
    if (!options.human_scores_path.empty()) {
        human = load_human_scores(options.human_scores_path);
    }

    std::map<std::string, const AnnotatedError*> error_index;
    for (const AnnotatedError& e : dataset.errors) error_index[e.error_id] = &e;

    static const std::vector<std::optional<Impact>> kImpacts = {
        std::nullopt, Impact::LOW, Impact::MEDIUM, Impact::HIGH};

    for (const std::string& split : report_splits(dataset, store.manifest.split)) {
        std::vector<std::string> trace_ids = dataset.split_ids(split);
        std::sort(trace_ids.begin(), trace_ids.end());
        std::set<std::string> trace_set(trace_ids.begin(), trace_ids.end());
        std::vector<AnnotatedError> split_errors = dataset.errors_for(trace_ids);

        std::vector<MatchRecord> split_records;
        for (const MatchRecord& r : records) {
            auto e = error_index.find(r.error_id);
            if (e != error_index.end() && trace_set.count(e->second->trace_id) > 0) {
                split_records.push_back(r);
            }
        }

        CoverageTable coverage = coverage_counts(split_records, dataset.mappings, split_errors);
        bundle.identification[split] = coverage;
        bundle.localization[split] = coverage;  // same table carries both counters

        std::vector<JudgeVerdict> split_verdicts;
        for (const JudgeVerdict& v : store.valid) {
            if (trace_set.count(v.trace_id) > 0) split_verdicts.push_back(v);
        }

        for (JudgeId judge : store.manifest.judges) {
            for (const auto& impact : kImpacts) {
                std::string impact_label = impact.has_value() ? to_string(*impact) : "ALL";
                ConfusionCounts trace_unit =
                    build_confusion(trace_ids, judge, impact, split_verdicts, split_errors,
                                    dataset.mappings, split_records, ConfusionUnit::TRACE_JUDGE);
                bundle.classification[split]["TRACE_JUDGE"][to_string(judge)][impact_label] =
                    trace_unit;
                if (options.emit_error_unit) {
                    ConfusionCounts error_unit =
                        build_confusion(trace_ids, judge, impact, split_verdicts, split_errors,
                                        dataset.mappings, split_records,
                                        ConfusionUnit::ERROR_JUDGE);
                    bundle.classification[split]["ERROR_JUDGE"][to_string(judge)][impact_label] =
                        error_unit;
                }
            }

            if (human.has_value()) {
                auto hj = human->scores.find(judge);
                if (hj == human->scores.end()) continue;
                // Judge score per trace = the lowest-run valid verdict.
                std::map<std::string, std::pair<int, int>> best;  // trace -> (run, score)
                for (const JudgeVerdict& v : split_verdicts) {
                    if (v.judge_id != judge) continue;
                    auto [it, inserted] = best.emplace(v.trace_id,
                                                       std::make_pair(v.run_index, v.score_raw));
                    if (!inserted && v.run_index < it->second.first) {
                        it->second = {v.run_index, v.score_raw};
                    }
                }
                std::vector<int> h, j;
                for (const auto& [trace_id, run_score] : best) {
                    auto ht = hj->second.find(trace_id);
                    if (ht == hj->second.end()) continue;
                    h.push_back(ht->second);
                    j.push_back(run_score.second);
                }
                if (!h.empty()) {
                    bundle.alignment[split][to_string(judge)] = alignment_report(h, j, 3.0);
                }
            }
        }
    }

    if (store.manifest.n_runs >= 2) {
        auto notes = std::map<std::string, std::string>{};
        bundle.reliability = cmd_consistency({run_dir}, dataset, config, &notes);
        bundle.reliability_notes = std::move(notes);
    }
    return bundle;
}

std::map<std::string, ReliabilityReport> cmd_consistency(
    const std::vector<std::string>& run_dirs, const Dataset& dataset,
    const HarnessConfig& config, std::map<std::string, std::string>* notes) {
    if (run_dirs.empty()) {
        throw Error(ErrorCode::InsufficientData, "no run directories given");
    }

    struct RaterKey {
        std::size_t store;
        int run;
        bool operator<(const RaterKey& other) const {
            return std::tie(store, run) < std::tie(other.store, other.run);
        }
    };

    std::vector<StoredVerdicts> stores;
    stores.reserve(run_dirs.size());
    std::set<JudgeId> judges;
    std::string split;
    for (const std::string& dir : run_dirs) {
        stores.push_back(load_run(dir));
        if (split.empty()) {
            split = stores.back().manifest.split;
        } else if (split != stores.back().manifest.split) {
            throw Error(ErrorCode::DatasetMismatch,
                        "runs cover different splits: " + split + " vs " +
                            stores.back().manifest.split);
        }
        for (JudgeId j : stores.back().manifest.judges) judges.insert(j);
    }

    std::vector<std::string> trace_ids = dataset.split_ids(split);
    std::sort(trace_ids.begin(), trace_ids.end());
    std::map<std::string, std::size_t> item_of;
    for (std::size_t i = 0; i < trace_ids.size(); ++i) item_of[trace_ids[i]] = i;

    std::unique_ptr<Embedder> embedder = make_embedder(config.embedder, config.embedder_dim);

    std::map<std::string, ReliabilityReport> reports;
    for (JudgeId judge : judges) {
        // Each (store, run_index) pair is a distinct rater.
        std::map<RaterKey, std::vector<std::optional<double>>> rows;
        std::vector<std::vector<std::vector<double>>> rationales(trace_ids.size());
        for (std::size_t s = 0; s < stores.size(); ++s) {
            for (const JudgeVerdict& v : stores[s].valid) {
                if (v.judge_id != judge) continue;
                auto it = item_of.find(v.trace_id);
                if (it == item_of.end()) continue;
                auto& row = rows[{s, v.run_index}];
                row.resize(trace_ids.size());
                row[it->second] = v.score_norm;
                if (!v.evidence.empty()) {
                    rationales[it->second].push_back(embedder->embed(v.evidence));
                }
            }
        }
        RatingsMatrix matrix;
        matrix.reserve(rows.size());
        for (auto& [key, row] : rows) {
            row.resize(trace_ids.size());
            matrix.push_back(std::move(row));
        }

        ReliabilityReport report;
        try {
            report.alpha = krippendorff_alpha_interval(matrix);
            std::size_t n = 0;
            for (std::size_t item = 0; item < trace_ids.size(); ++item) {
                std::size_t ratings = 0;
                for (const auto& row : matrix) {
                    if (item < row.size() && row[item].has_value()) ++ratings;
                }
                if (ratings >= 2) ++n;
            }
            report.n_traces = n;
            DispersionSummary dispersion = per_trace_dispersion(matrix);
            report.avg_std = dispersion.avg_std;
            report.ci95_halfwidth = dispersion.ci95_halfwidth;
        } catch (const Error& e) {
            // InsufficientData is reported per judge, not fatal.
            if (notes != nullptr) (*notes)[to_string(judge)] = e.what();
            continue;
        }
        try {
            report.sci = semantic_consistency_index(rationales);
        } catch (const Error&) {
            report.sci = std::nullopt;
        }
        reports[to_string(judge)] = report;
    }
    return reports;
}

std::map<std::string, std::string> score_matrices_csv(const std::vector<std::string>& run_dirs,
                                                      const Dataset& dataset) {
    if (run_dirs.empty()) {
        throw Error(ErrorCode::InsufficientData, "no run directories given");
    }
    std::vector<StoredVerdicts> stores;
    std::set<JudgeId> judges;
    std::string split;
    for (const std::string& dir : run_dirs) {
        stores.push_back(load_run(dir));
        if (split.empty()) split = stores.back().manifest.split;
        for (JudgeId j : stores.back().manifest.judges) judges.insert(j);
    }
    std::vector<std::string> trace_ids = dataset.split_ids(split);
    std::sort(trace_ids.begin(), trace_ids.end());
    std::map<std::string, std::size_t> item_of;
    for (std::size_t i = 0; i < trace_ids.size(); ++i) item_of[trace_ids[i]] = i;

    std::map<std::string, std::string> out;
    for (JudgeId judge : judges) {
        std::map<std::pair<std::size_t, int>, std::vector<std::optional<double>>> rows;
        for (std::size_t s = 0; s < stores.size(); ++s) {
            for (const JudgeVerdict& v : stores[s].valid) {
                if (v.judge_id != judge) continue;
                auto it = item_of.find(v.trace_id);
                if (it == item_of.end()) continue;
                auto& row = rows[{s, v.run_index}];
                row.resize(trace_ids.size());
                row[it->second] = v.score_norm;
            }
        }
        RatingsMatrix matrix;
        for (auto& [key, row] : rows) {
            row.resize(trace_ids.size());
            matrix.push_back(std::move(row));
        }
        out[to_string(judge)] = export_matrix_csv(matrix, trace_ids);
    }
    return out;
}

// --- Rendering ----------------------------------------------------------

namespace {

ordered_json coverage_to_json(const CoverageTable& table, bool localization) {
    ordered_json rows = ordered_json::array();
    for (const auto& [judge, impacts] : table.cells) {
        for (const auto& [impact, cell] : impacts) {
            std::size_t num = localization ? cell.localized : cell.caught;
            ordered_json row;
            row["judge"] = judge;
            row["impact"] = impact;
            row["numerator"] = num;
            row["denominator"] = cell.total;
            row["percent"] =
                cell.total == 0
                    ? nullptr
                    : ordered_json(100.0 * static_cast<double>(num) /
                                   static_cast<double>(cell.total));
            row["cell"] = format_fraction_cell(num, cell.total);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

ordered_json confusion_to_json(const ConfusionCounts& c) {
    ClassificationMetrics m = classification_metrics(c);
    ordered_json row;
    row["tp"] = c.tp;
    row["fp"] = c.fp;
    row["fn"] = c.fn;
    row["tn"] = c.tn;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v.has_value()) {
            row[key] = *v;
        } else {
            row[key] = nullptr;
        }
    };
    put("precision", m.precision);
    put("recall", m.recall);
    put("f1", m.f1);
    put("f2", m.f2);
    put("accuracy", m.accuracy);
    return row;
}

}  // namespace

std::string render_report_json(const ReportBundle& bundle) {
    ordered_json doc;
    ordered_json& prov = doc["provenance"];
    prov["run_id"] = bundle.run_id;
    prov["dataset_digest"] = bundle.dataset_digest;
    prov["split"] = bundle.split;
    prov["judges"] = bundle.judges;
    prov["model_id"] = bundle.model_id;
    prov["backend_mode"] = bundle.backend_mode;
    prov["n_runs"] = bundle.n_runs;
    prov["matching_mode"] = to_string(bundle.matching_mode);
    prov["cache_digest"] = bundle.cache_digest;

    for (const auto& [split, table] : bundle.identification) {
        doc["coverage"][split]["identification"] = coverage_to_json(table, false);
    }
    for (const auto& [split, table] : bundle.localization) {
        doc["coverage"][split]["localization"] = coverage_to_json(table, true);
    }
    for (const auto& [split, units] : bundle.classification) {
        for (const auto& [unit, judges] : units) {
            for (const auto& [judge, impacts] : judges) {
                for (const auto& [impact, counts] : impacts) {
                    doc["classification"][split][unit][judge][impact] =
                        confusion_to_json(counts);
                }
            }
        }
    }
    for (const auto& [split, judges] : bundle.alignment) {
        for (const auto& [judge, report] : judges) {
            ordered_json row;
            row["acc_ob1"] = report.acc_ob1;
            row["acc_3pt"] = report.acc_3pt;
            row["acc_2pt"] = report.acc_2pt;
            if (report.correlation.has_value()) {
                row["correlation"] = *report.correlation;
            } else {
                row["correlation"] = nullptr;
            }
            row["nmae"] = report.nmae;
            row["n_pairs"] = report.n_pairs;
            doc["alignment"][split][judge] = std::move(row);
        }
    }
    for (const auto& [judge, report] : bundle.reliability) {
        ordered_json row;
        row["alpha"] = report.alpha;
        row["n_traces"] = report.n_traces;
        row["avg_std"] = report.avg_std;
        row["ci95_halfwidth"] = report.ci95_halfwidth;
        if (report.sci.has_value()) {
            row["sci"] = *report.sci;
        } else {
            row["sci"] = nullptr;
        }
        doc["reliability"][judge] = std::move(row);
    }
    for (const auto& [judge, note] : bundle.reliability_notes) {
        doc["reliability_notes"][judge] = note;
    }
    return doc.dump(2) + "\n";
}

namespace {

const std::vector<std::string> kImpactOrder = {"LOW", "MEDIUM", "HIGH", "ALL"};

void render_coverage_md(std::ostringstream& out, const CoverageTable& table,
                        bool localization, const std::string& title) {
    out << "### " << title << "\n\n";
    out << "| Impact | All GPA Judges |";
    std::vector<std::string> judges;
    for (const auto& [judge, _] : table.cells) {
        if (judge != "ALL") judges.push_back(judge);
    }
    for (const std::string& judge : judges) out << ' ' << judge << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < judges.size(); ++i) out << "---|";
    out << '\n';
    auto cell_text = [&](const CoverageCell& cell) {
        if (cell.total == 0) return std::string("—");
        return format_fraction_cell(localization ? cell.localized : cell.caught, cell.total);
    };
    for (const std::string& impact : kImpactOrder) {
        out << "| " << impact << " | " << cell_text(table.cell("ALL", impact)) << " |";
        for (const std::string& judge : judges) {
            out << ' ' << cell_text(table.cell(judge, impact)) << " |";
        }
        out << '\n';
    }
    out << '\n';
}

}  // namespace

std::string render_report_markdown(const ReportBundle& bundle) {
    std::ostringstream out;
    out << "# Evaluation Report\n\n";
    out << "- run: `" << bundle.run_id << "`\n";
    out << "- dataset digest: `" << bundle.dataset_digest << "`\n";
    out << "- split: " << bundle.split << "\n";
    out << "- model: " << bundle.model_id << "\n";
    out << "- backend: " << bundle.backend_mode << "\n";
    out << "- runs: " << bundle.n_runs << "\n";
    out << "- matching mode: " << to_string(bundle.matching_mode)
        << (bundle.matching_mode == MatchMode::AUTO
                ? " (span-based lower bound on identification)"
                : " (human-verified)")
        << "\n\n";

    for (const auto& [split, table] : bundle.identification) {
        render_coverage_md(out, table, false,
                           "Error Coverage (identification) — split: " + split);
    }
    for (const auto& [split, table] : bundle.localization) {
        render_coverage_md(out, table, true,
                           "Error Localization — split: " + split);
    }

    for (const auto& [split, units] : bundle.classification) {
        for (const auto& [unit, judges] : units) {
            if (unit != "TRACE_JUDGE") continue;  // markdown shows the default unit
            out << "### Per-Judge Classification — split: " << split
                << ", unit: " << unit << "\n\n";
            out << "| Judge | Impact | TP | FP | FN | TN | P | R | F1 | F2 | Acc |\n";
            out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
            for (const auto& [judge, impacts] : judges) {
                for (const std::string& impact : kImpactOrder) {
                    auto it = impacts.find(impact);
                    if (it == impacts.end()) continue;
                    const ConfusionCounts& c = it->second;
                    ClassificationMetrics m = classification_metrics(c);
                    out << "| " << judge << " | " << impact << " | " << c.tp << " | " << c.fp
                        << " | " << c.fn << " | " << c.tn << " | " << opt4(m.precision) << " | "
                        << opt4(m.recall) << " | " << opt4(m.f1) << " | " << opt4(m.f2) << " | "
                        << opt4(m.accuracy) << " |\n";
                }
            }
            out << '\n';
        }
    }

    for (const auto& [split, judges] : bundle.alignment) {
        out << "### Alignment with Human Judgment — split: " << split << "\n\n";
        out << "| Judge | Acc-OB1 | Acc-3pt | Acc-2pt | Correl | NMAE | n |\n";
        out << "|---|---|---|---|---|---|---|\n";
        for (const auto& [judge, report] : judges) {
            out << "| " << judge << " | " << round4(report.acc_ob1) << " | "
                << round4(report.acc_3pt) << " | " << round4(report.acc_2pt) << " | "
                << opt4(report.correlation) << " | " << round4(report.nmae) << " | "
                << report.n_pairs << " |\n";
        }
        out << '\n';
    }

    if (!bundle.reliability.empty() || !bundle.reliability_notes.empty()) {
        out << "### Reliability Across Runs\n\n";
        out << "| Judge | n_traces | alpha | Avg std | 95% CI | SCI |\n";
        out << "|---|---|---|---|---|---|\n";
        for (const auto& [judge, report] : bundle.reliability) {
            out << "| " << judge << " | " << report.n_traces << " | " << round4(report.alpha)
                << " | " << round4(report.avg_std) << " | " << round4(report.ci95_halfwidth)
                << " | " << opt4(report.sci) << " |\n";
        }
        for (const auto& [judge, note] : bundle.reliability_notes) {
            out << "| " << judge << " | — | — | — | — | — |\n";
        }
        out << '\n';
    }
    return out.str();
}

ReportBundle load_report_json(const std::string& path) {
    json doc = json::parse(read_file_or_empty(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::IoError, "cannot parse report " + path);
    }
    ReportBundle bundle;
    const json& prov = doc.at("provenance");
    bundle.run_id = prov.value("run_id", "");
    bundle.dataset_digest = prov.value("dataset_digest", "");
    bundle.split = prov.value("split", "all");
    bundle.model_id = prov.value("model_id", "");
    bundle.backend_mode = prov.value("backend_mode", "");
    bundle.n_runs = prov.value("n_runs", 1);
    bundle.cache_digest = prov.value("cache_digest", "");
    bundle.matching_mode =
        prov.value("matching_mode", "AUTO") == "ADJUDICATED" ? MatchMode::ADJUDICATED
                                                             : MatchMode::AUTO;
    if (doc.contains("coverage")) {
        for (const auto& [split, sections] : doc["coverage"].items()) {
            for (const char* section : {"identification", "localization"}) {
                if (!sections.contains(section)) continue;
                CoverageTable& table = std::string(section) == "identification"
                                           ? bundle.identification[split]
                                           : bundle.localization[split];
                for (const json& row : sections[section]) {
                    CoverageCell& cell =
                        table.cells[row.value("judge", "?")][row.value("impact", "?")];
                    cell.total = row.value("denominator", std::size_t{0});
                    std::size_t num = row.value("numerator", std::size_t{0});
                    if (std::string(section) == "identification") {
                        cell.caught = num;
                    } else {
                        cell.localized = num;
                    }
                }
            }
        }
    }
    // Identification and localization live in one table internally.
    for (auto& [split, table] : bundle.identification) {
        auto loc = bundle.localization.find(split);
        if (loc == bundle.localization.end()) continue;
        for (auto& [judge, impacts] : table.cells) {
            for (auto& [impact, cell] : impacts) {
                cell.localized = loc->second.cell(judge, impact).localized;
            }
        }
        bundle.localization[split] = table;
    }
    return bundle;
}

Comparison cmd_compare(const ReportBundle& a, const ReportBundle& b) {
    if (a.dataset_digest != b.dataset_digest) {
        throw Error(ErrorCode::DatasetMismatch,
                    "bundles cover different datasets (" + a.dataset_digest + " vs " +
                        b.dataset_digest + ")");
    }
    if (a.split != b.split) {
        throw Error(ErrorCode::DatasetMismatch,
                    "bundles cover different splits (" + a.split + " vs " + b.split + ")");
    }
    auto ta = a.identification.find(a.split);
    auto tb = b.identification.find(b.split);
    if (ta == a.identification.end() || tb == b.identification.end()) {
        throw Error(ErrorCode::DatasetMismatch, "bundle lacks coverage for its own split");
    }

    Comparison comparison;
    comparison.split = a.split;
    comparison.label_a = a.run_id;
    comparison.label_b = b.run_id;
    for (const std::string& impact : kImpactOrder) {
        ComparisonRow row;
        row.impact = impact;
        row.a = ta->second.cell("ALL", impact);
        row.b = tb->second.cell("ALL", impact);
        row.caught_delta = static_cast<long long>(row.a.caught) -
                           static_cast<long long>(row.b.caught);
        row.localized_delta = static_cast<long long>(row.a.localized) -
                              static_cast<long long>(row.b.localized);
        comparison.rows.push_back(row);
    }
    return comparison;
}

std::string render_comparison_markdown(const Comparison& comparison) {
    std::ostringstream out;
    out << "# Coverage Comparison — split: " << comparison.split << "\n\n";
    out << "A = `" << comparison.label_a << "`, B = `" << comparison.label_b << "`\n\n";
    out << "| Impact | A caught | B caught | Δ caught | A localized | B localized | "
           "Δ localized |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const ComparisonRow& row : comparison.rows) {
        out << "| " << row.impact << " | " << format_fraction_cell(row.a.caught, row.a.total)
            << " | " << format_fraction_cell(row.b.caught, row.b.total) << " | "
            << row.caught_delta << " | "
            << format_fraction_cell(row.a.localized, row.a.total) << " | "
            << format_fraction_cell(row.b.localized, row.b.total) << " | "
            << row.localized_delta << " |\n";
    }
    return out.str();
}

}  // namespace gpa
