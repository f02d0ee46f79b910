// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run with the fixtures directory as the only argument, or with
// --generate <fixtures_dir> to rebuild the replay fixture and its golden
// reports.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "gpa/harness.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace gpa;

namespace {

struct Criterion {
    int number;
    std::string description;
    bool passed = true;
    std::vector<std::string> failures;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            passed = false;
            failures.push_back(what);
        }
    }
};

std::vector<Criterion> g_results;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- Criterion 1: F-score arithmetic vs reference operating points -------

struct ReferenceRow {
    const char* judge;
    const char* split;
    double p, r, f1, f2;
};

// Reference operating points: every fully-numeric (P, R, F1, F2) quadruple
// from the per-judge classification tables this harness mirrors (caught and
// localized, overall and per impact level).
const ReferenceRow kReferenceRows[] = {
    // caught, all errors
    {"LC", "dev", 0.6452, 0.8333, 0.7273, 0.7874},
    {"LC", "test", 0.7632, 0.8286, 0.7945, 0.8146},
    {"EE", "dev", 0.7866, 0.9214, 0.8487, 0.8909},
    {"EE", "test", 0.7603, 0.9328, 0.8377, 0.8923},
    {"PA", "dev", 0.5490, 0.9180, 0.6871, 0.8092},
    {"PA", "test", 0.5135, 0.8906, 0.6514, 0.7766},
    {"PQ", "dev", 0.6818, 0.8824, 0.7692, 0.8333},
    {"PQ", "test", 0.3704, 0.6667, 0.4762, 0.5747},
    {"TS", "dev", 0.7360, 0.9892, 0.8440, 0.9256},
    {"TS", "test", 0.6474, 0.9712, 0.7769, 0.8829},
    {"TC", "dev", 0.8581, 0.9845, 0.9170, 0.9563},
    {"TC", "test", 0.8794, 0.9688, 0.9219, 0.9495},
    // localized, all errors
    {"LC", "dev", 0.6724, 0.6500, 0.6610, 0.6544},
    {"LC", "test", 0.7481, 0.7214, 0.7345, 0.7266},
    {"EE", "dev", 0.7519, 0.7143, 0.7326, 0.7215},
    {"EE", "test", 0.7500, 0.8319, 0.7888, 0.8141},
    {"PA", "dev", 0.6316, 0.7869, 0.7007, 0.7500},
    {"PA", "test", 0.6180, 0.8594, 0.7190, 0.7971},
    {"PQ", "dev", 0.6471, 0.6471, 0.6471, 0.6471},
    {"PQ", "test", 0.3478, 0.5333, 0.4211, 0.4819},
    {"TS", "dev", 0.7500, 0.4839, 0.5882, 0.5208},
    {"TS", "test", 0.7791, 0.6442, 0.7053, 0.6673},
    {"TC", "dev", 0.8571, 0.4651, 0.6030, 0.5119},
    {"TC", "test", 0.8814, 0.4063, 0.5561, 0.4553},
    // caught, low impact
    {"LC", "dev", 0.5484, 0.5484, 0.5484, 0.5484},
    {"LC", "test", 0.8333, 0.5882, 0.6897, 0.6250},
    {"EE", "dev", 1.0000, 0.9722, 0.9859, 0.9777},
    {"EE", "test", 0.7778, 0.9130, 0.8400, 0.8824},
    {"PA", "dev", 0.1538, 0.6667, 0.2500, 0.4000},
    {"PQ", "dev", 1.0000, 0.6667, 0.8000, 0.7143},
    {"TS", "dev", 0.9444, 1.0000, 0.9714, 0.9884},
    {"TS", "test", 0.6429, 1.0000, 0.7826, 0.9000},
    {"TC", "dev", 0.8800, 0.9565, 0.9167, 0.9402},
    {"TC", "test", 1.0000, 1.0000, 1.0000, 1.0000},
    // caught, medium impact
    {"LC", "dev", 0.6400, 0.8421, 0.7273, 0.7921},
    {"LC", "test", 0.6053, 0.7931, 0.6866, 0.7468},
    {"EE", "dev", 0.8750, 0.8571, 0.8660, 0.8607},
    {"EE", "test", 0.9194, 0.9194, 0.9194, 0.9194},
    {"PA", "dev", 0.5185, 0.8235, 0.6364, 0.7368},
    {"PA", "test", 0.2308, 0.9000, 0.3673, 0.5696},
    {"PQ", "dev", 0.8750, 1.0000, 0.9333, 0.9722},
    {"PQ", "test", 0.6154, 0.7273, 0.6667, 0.7018},
    {"TS", "dev", 0.8000, 1.0000, 0.8889, 0.9524},
    {"TS", "test", 0.4255, 0.9091, 0.5797, 0.7407},
    {"TC", "dev", 0.9000, 1.0000, 0.9474, 0.9783},
    {"TC", "test", 0.9259, 0.9434, 0.9346, 0.9398},
    // caught, high impact
    {"LC", "dev", 0.6768, 0.9571, 0.7929, 0.8839},
    {"LC", "test", 0.8111, 0.9481, 0.8743, 0.9171},
    {"EE", "dev", 0.6420, 0.9455, 0.7647, 0.8638},
    {"EE", "test", 0.5789, 0.9706, 0.7253, 0.8549},
    {"PA", "dev", 0.6452, 0.9756, 0.7767, 0.8850},
    {"PA", "test", 0.7500, 0.9231, 0.8276, 0.8824},
    {"PQ", "dev", 0.5000, 0.8571, 0.6316, 0.7500},
    {"PQ", "test", 0.2222, 0.6667, 0.3333, 0.4762},
    {"TS", "dev", 0.6528, 0.9792, 0.7833, 0.8902},
    {"TS", "test", 0.7579, 0.9863, 0.8571, 0.9302},
    {"TC", "dev", 0.8313, 0.9857, 0.9020, 0.9504},
    {"TC", "test", 0.8000, 0.9811, 0.8814, 0.9386},
    // localized, low impact
    {"LC", "dev", 0.6818, 0.4839, 0.5660, 0.5137},
    {"LC", "test", 0.8000, 0.4706, 0.5926, 0.5128},
    {"EE", "dev", 1.0000, 0.8333, 0.9091, 0.8621},
    {"EE", "test", 0.7600, 0.8261, 0.7917, 0.8120},
    {"PA", "dev", 0.4000, 0.6667, 0.5000, 0.5882},
    {"TS", "dev", 1.0000, 0.4118, 0.5833, 0.4667},
    {"TS", "test", 1.0000, 0.6667, 0.8000, 0.7143},
    {"TC", "dev", 0.9333, 0.6087, 0.7368, 0.6542},
    {"TC", "test", 1.0000, 0.2727, 0.4286, 0.3191},
    // localized, medium impact
    {"LC", "dev", 0.6429, 0.4737, 0.5455, 0.5000},
    {"LC", "test", 0.6216, 0.7931, 0.6970, 0.7516},
    {"EE", "dev", 0.8684, 0.6735, 0.7586, 0.7051},
    {"EE", "test", 0.9107, 0.8226, 0.8644, 0.8388},
    {"PA", "dev", 0.5217, 0.7059, 0.6000, 0.6593},
    {"PA", "test", 0.3077, 0.8000, 0.4444, 0.6061},
    {"PQ", "dev", 0.8571, 0.8571, 0.8571, 0.8571},
    {"PQ", "test", 0.6364, 0.6364, 0.6364, 0.6364},
    {"TS", "dev", 0.8462, 0.3929, 0.5366, 0.4400},
    {"TS", "test", 0.5238, 0.5000, 0.5116, 0.5046},
    {"TC", "dev", 1.0000, 0.3056, 0.4681, 0.3548},
    {"TC", "test", 1.0000, 0.3962, 0.5676, 0.4506},
    // localized, high impact
    {"LC", "dev", 0.6750, 0.7714, 0.7200, 0.7500},
    {"LC", "test", 0.7949, 0.8052, 0.8000, 0.8031},
    {"EE", "dev", 0.5692, 0.6727, 0.6167, 0.6491},
    {"EE", "test", 0.5686, 0.8529, 0.6824, 0.7754},
    {"PA", "dev", 0.7083, 0.8293, 0.7640, 0.8019},
    {"PA", "test", 0.7966, 0.9038, 0.8468, 0.8801},
    {"PQ", "dev", 0.5000, 0.7143, 0.5882, 0.6579},
    {"PQ", "test", 0.1429, 0.3333, 0.2000, 0.2632},
    {"TS", "dev", 0.6750, 0.5625, 0.6136, 0.5819},
    {"TS", "test", 0.8475, 0.6849, 0.7576, 0.7123},
    {"TC", "dev", 0.7955, 0.5000, 0.6140, 0.5401},
    {"TC", "test", 0.7813, 0.4717, 0.5882, 0.5123},
};

void criterion_1() {
    Criterion c{1, "F1/F2 arithmetic reproduces every reference (P, R, F1, F2) row to 5e-4"};
    auto started = std::chrono::steady_clock::now();
    std::size_t rows = 0;
    for (const ReferenceRow& row : kReferenceRows) {
        ++rows;
        auto f1 = f1_score(row.p, row.r);
        auto f2 = f2_score(row.p, row.r);
        std::string tag = std::string(row.judge) + "/" + row.split + " P=" +
                          std::to_string(row.p) + " R=" + std::to_string(row.r);
        c.expect(f1.has_value() && f2.has_value(), tag + ": F undefined");
        if (f1 && f2) {
            c.expect(std::abs(*f1 - row.f1) <= 5e-4,
                     tag + ": F1 " + std::to_string(*f1) + " vs " + std::to_string(row.f1));
            c.expect(std::abs(*f2 - row.f2) <= 5e-4,
                     tag + ": F2 " + std::to_string(*f2) + " vs " + std::to_string(row.f2));
        }
    }
    c.expect(rows == 91, "expected 91 reference rows, saw " + std::to_string(rows));

    // The same arithmetic through the counts path: tp=124, fp=17, fn=4
    // lands exactly on the TC test row.
    ConfusionCounts tc;
    tc.tp = 124;
    tc.fp = 17;
    tc.fn = 4;
    tc.tn = 1;
    ClassificationMetrics m = classification_metrics(tc);
    c.expect(std::abs(*m.precision - 0.8794) <= 5e-4, "counts path precision");
    c.expect(std::abs(*m.recall - 0.9688) <= 5e-4, "counts path recall");
    c.expect(std::abs(*m.f1 - 0.9219) <= 5e-4, "counts path F1");
    c.expect(std::abs(*m.f2 - 0.9495) <= 5e-4, "counts path F2");

    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    c.expect(elapsed < 1000, "runtime " + std::to_string(elapsed) + "ms exceeds 1s");
    g_results.push_back(std::move(c));
}

// --- Criterion 2: bucketing ----------------------------------------------

void criterion_2() {
    Criterion c{2, "bucket_score over {0,1,2,3} equals {0,1,1,2} exactly"};
    int expected[] = {0, 1, 1, 2};
    for (int raw = 0; raw <= 3; ++raw) {
        c.expect(bucket_score(raw) == expected[raw],
                 "bucket_score(" + std::to_string(raw) + ")");
    }
    g_results.push_back(std::move(c));
}

// --- Criterion 3: Krippendorff oracle equivalence -------------------------

void criterion_3() {
    Criterion c{3, "alpha matches the pairwise brute-force oracle on 200 random matrices"};
    auto started = std::chrono::steady_clock::now();

    std::mt19937 rng(20260810);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::uniform_real_distribution<double> gap(0.0, 1.0);
    int compared = 0;
    for (int i = 0; i < 200; ++i) {
        int raters = 2 + static_cast<int>(rng() % 4);   // 2..5
        int items = 3 + static_cast<int>(rng() % 28);   // 3..30
        RatingsMatrix m(static_cast<std::size_t>(raters));
        for (auto& run : m) {
            run.resize(static_cast<std::size_t>(items));
            for (auto& cell : run) {
                if (gap(rng) < 0.10) {
                    cell = std::nullopt;
                } else {
                    cell = value(rng);
                }
            }
        }
        auto expected = oracles::krippendorff_pairwise(m);
        if (!expected.has_value()) {
            try {
                krippendorff_alpha_interval(m);
                c.expect(false, "matrix " + std::to_string(i) + ": oracle says insufficient");
            } catch (const Error&) {
            }
            continue;
        }
        ++compared;
        double got = krippendorff_alpha_interval(m);
        c.expect(std::abs(got - *expected) <= 1e-9,
                 "matrix " + std::to_string(i) + ": |delta| = " +
                     std::to_string(std::abs(got - *expected)));
    }
    c.expect(compared >= 190, "only " + std::to_string(compared) + " matrices compared");

    // All-identical matrices return exactly 1.0.
    RatingsMatrix identical(4, std::vector<std::optional<double>>(10, 0.62));
    c.expect(krippendorff_alpha_interval(identical) == 1.0, "identical matrix alpha != 1.0");
    RatingsMatrix per_item(3);
    for (auto& run : per_item) {
        run.resize(8);
        for (std::size_t k = 0; k < run.size(); ++k) run[k] = static_cast<double>(k) / 8.0;
    }
    c.expect(krippendorff_alpha_interval(per_item) == 1.0,
             "per-item-constant matrix alpha != 1.0");

    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    c.expect(elapsed < 5000, "runtime " + std::to_string(elapsed) + "ms exceeds 5s");
    g_results.push_back(std::move(c));
}

// --- Criterion 4: deterministic end-to-end -------------------------------

// Four traces, six errors, scripted verdicts, hand-enumerated tables.
std::string build_e2e_dataset(const fixtures::TempDir& tmp) {
    for (int i = 1; i <= 4; ++i) {
        std::string t = "t" + std::to_string(i);
        tmp.write("traces/" + t + ".json",
                  fixtures::trace_json(
                      t, "task " + t,
                      {{t + "_root", "", "AGENT", 0, 100,
                        fixtures::llm_io("task " + t, "final answer " + t)},
                       {t + "_llm0", t + "_root", "LLM", 10, 20,
                        fixtures::llm_io(fixtures::messages_json({{"system", "SYS " + t},
                                                                  {"user", "task " + t}}),
                                         "assistant turn for " + t)},
                       {t + "_tool0", t + "_root", "TOOL", 30, 40,
                        fixtures::llm_io("{\"arg\":\"" + t + "\"}", "tool output " + t)}}));
    }
    tmp.write(
        "annotations.jsonl",
        R"({"error_id":"e1","trace_id":"t1","impact":"high","span_ids":["t1_llm0"],"category":"reasoning","description":"bad step"})"
        "\n"
        R"({"error_id":"e2","trace_id":"t1","impact":"low","span_ids":["t1_tool0"],"category":"waste","description":"redundant call"})"
        "\n"
        R"({"error_id":"e3","trace_id":"t2","impact":"medium","span_ids":["t2_llm0"],"category":"tool-args","description":"bad args"})"
        "\n"
        R"({"error_id":"e4","trace_id":"t3","impact":"high","span_ids":["t3_llm0"],"category":"plan-skip","description":"skipped step"})"
        "\n"
        R"({"error_id":"e5","trace_id":"t3","impact":"medium","span_ids":["t3_tool0","t3_llm0"],"category":"waste","description":"loop"})"
        "\n"
        R"({"error_id":"e6","trace_id":"t4","impact":"low","span_ids":["t4_llm0"],"category":"drift","description":"minor drift"})"
        "\n");
    tmp.write("mapping.jsonl", R"({"error_id":"e1","judges":["LC","TC"]})"
                               "\n"
                               R"({"error_id":"e2","judges":["EE"]})"
                               "\n"
                               R"({"error_id":"e3","judges":["TC"]})"
                               "\n"
                               R"({"error_id":"e4","judges":["PA"]})"
                               "\n"
                               R"({"error_id":"e5","judges":["TS","EE"]})"
                               "\n"
                               R"({"error_id":"e6","judges":["LC"]})"
                               "\n");
    std::string dataset_dir = (tmp.path() / "dataset").string();
    cmd_ingest((tmp.path() / "traces").string(), (tmp.path() / "annotations.jsonl").string(),
               (tmp.path() / "mapping.jsonl").string(), dataset_dir);
    return dataset_dir;
}

std::string e2e_script() {
    nlohmann::json script;
    script["entries"] = nlohmann::json::array();
    auto entry = [&](const char* judge, const char* trace, int score,
                     std::vector<std::string> cite) {
        nlohmann::json e;
        e["judge"] = judge;
        e["trace"] = trace;
        e["score"] = score;
        e["cite"] = cite;
        e["evidence"] = std::string("scripted rationale for ") + judge + " on " + trace;
        script["entries"].push_back(e);
    };
    entry("LC", "t1", 1, {"t1_llm0"});
    entry("LC", "t2", 3, {});
    entry("LC", "t3", 3, {});
    entry("LC", "t4", 2, {"t4_tool0"});
    entry("EE", "t1", 0, {"t1_tool0"});
    entry("EE", "t2", 3, {});
    entry("EE", "t3", 1, {"t3_tool0"});
    entry("EE", "t4", 3, {});
    entry("PA", "t1", 3, {});
    entry("PA", "t2", 3, {});
    entry("PA", "t3", 2, {"t3_llm0"});
    entry("PA", "t4", 3, {});
    entry("PQ", "t1", 3, {});
    entry("PQ", "t2", 3, {});
    entry("PQ", "t3", 3, {});
    entry("PQ", "t4", 3, {});
    entry("TS", "t1", 0, {"t1_llm0"});
    entry("TS", "t2", 3, {});
    entry("TS", "t3", 2, {"t3_root"});
    entry("TS", "t4", 3, {});
    entry("TC", "t1", 2, {"t1_llm0"});
    entry("TC", "t2", 1, {"t2_llm0"});
    entry("TC", "t3", 3, {});
    entry("TC", "t4", 3, {});
    return script.dump();
}

void criterion_4() {
    Criterion c{4, "scripted 4-trace run reproduces hand-enumerated tables, byte-identically"};
    auto started = std::chrono::steady_clock::now();
    fixtures::TempDir tmp("acceptance-e2e");
    std::string dataset_dir = build_e2e_dataset(tmp);
    tmp.write("script.json", e2e_script());
    tmp.write("human.jsonl", R"({"trace_id":"t1","judge_id":"LC","score":1})"
                             "\n"
                             R"({"trace_id":"t2","judge_id":"LC","score":3})"
                             "\n"
                             R"({"trace_id":"t3","judge_id":"LC","score":3})"
                             "\n"
                             R"({"trace_id":"t4","judge_id":"LC","score":1})"
                             "\n");

    HarnessConfig config;
    config.backend.mode = "mock";
    config.mock.profile = "scripted";
    config.mock.script_path = (tmp.path() / "script.json").string();

    RunManifest manifest;
    manifest.dataset_path = dataset_dir;
    manifest.judges = default_judges();

    ReportOptions options;
    options.human_scores_path = (tmp.path() / "human.jsonl").string();

    auto run_once = [&](const std::string& root) {
        EvaluateResult result = cmd_evaluate(manifest, config, (tmp.path() / root).string());
        Dataset dataset = load_dataset(dataset_dir);
        ReportBundle bundle = cmd_report(result.run_dir, dataset, options, config);
        return std::make_pair(render_report_json(bundle), bundle);
    };

    auto [json_a, bundle] = run_once("runs-a");
    auto [json_b, bundle_b] = run_once("runs-b");
    c.expect(json_a == json_b, "report JSON differs across two invocations");

    const CoverageTable& cov = bundle.identification.at("all");
    auto cell_is = [&](const char* judge, const char* impact, std::size_t caught,
                       std::size_t localized, std::size_t total) {
        const CoverageCell& cell = cov.cell(judge, impact);
        c.expect(cell.caught == caught && cell.localized == localized && cell.total == total,
                 std::string("coverage ") + judge + "/" + impact + " = " +
                     std::to_string(cell.caught) + "," + std::to_string(cell.localized) + "," +
                     std::to_string(cell.total) + " want " + std::to_string(caught) + "," +
                     std::to_string(localized) + "," + std::to_string(total));
    };
    // Hand enumeration: e1 caught by LC+TC, e2 by EE, e3 by TC, e4 by PA,
    // e5 by EE only (TS cited the wrong span), e6 missed.
    cell_is("ALL", "LOW", 1, 1, 2);
    cell_is("ALL", "MEDIUM", 2, 2, 2);
    cell_is("ALL", "HIGH", 2, 2, 2);
    cell_is("ALL", "ALL", 5, 5, 6);
    cell_is("LC", "HIGH", 1, 1, 1);
    cell_is("LC", "LOW", 0, 0, 1);
    cell_is("LC", "ALL", 1, 1, 2);
    cell_is("TC", "ALL", 2, 2, 2);
    cell_is("EE", "ALL", 2, 2, 2);
    cell_is("PA", "ALL", 1, 1, 1);
    cell_is("TS", "ALL", 0, 0, 1);

    auto counts_are = [&](const char* judge, const char* impact, std::size_t tp, std::size_t fp,
                          std::size_t fn, std::size_t tn) {
        const ConfusionCounts& counts =
            bundle.classification.at("all").at("TRACE_JUDGE").at(judge).at(impact);
        c.expect(counts.tp == tp && counts.fp == fp && counts.fn == fn && counts.tn == tn,
                 std::string("confusion ") + judge + "/" + impact);
    };
    counts_are("LC", "ALL", 2, 0, 0, 2);
    counts_are("EE", "ALL", 2, 0, 0, 2);
    counts_are("PA", "ALL", 1, 0, 0, 3);
    counts_are("PQ", "ALL", 0, 0, 0, 4);
    counts_are("TS", "ALL", 1, 1, 0, 2);
    counts_are("TC", "ALL", 2, 0, 0, 2);
    counts_are("LC", "LOW", 1, 1, 0, 2);

    ClassificationMetrics ts = classification_metrics(
        bundle.classification.at("all").at("TRACE_JUDGE").at("TS").at("ALL"));
    c.expect(std::abs(*ts.precision - 0.5) < 1e-12, "TS precision");
    c.expect(std::abs(*ts.recall - 1.0) < 1e-12, "TS recall");
    c.expect(std::abs(*ts.f1 - 2.0 / 3.0) < 1e-12, "TS F1");
    c.expect(std::abs(*ts.f2 - 5.0 / 6.0) < 1e-12, "TS F2");
    ClassificationMetrics pq = classification_metrics(
        bundle.classification.at("all").at("TRACE_JUDGE").at("PQ").at("ALL"));
    c.expect(!pq.precision.has_value() && !pq.recall.has_value(),
             "PQ P/R should be absent with no positives");

    const AlignmentReport& lc_alignment = bundle.alignment.at("all").at("LC");
    c.expect(lc_alignment.acc_ob1 == 1.0, "LC Acc-OB1");
    c.expect(lc_alignment.acc_3pt == 1.0, "LC Acc-3pt");
    c.expect(lc_alignment.acc_2pt == 1.0, "LC Acc-2pt");
    c.expect(std::abs(*lc_alignment.correlation - 3.0 / std::sqrt(11.0)) < 1e-9,
             "LC correlation vs hand computation");
    c.expect(std::abs(lc_alignment.nmae - 1.0 / 12.0) < 1e-12, "LC NMAE");

    // Rendered markdown shows the fraction-plus-percent cells.
    std::string md = render_report_markdown(bundle);
    c.expect(md.find("5/6 (83.33%)") != std::string::npos, "ALL/ALL cell text");
    c.expect(md.find("2/2 (100.00%)") != std::string::npos, "saturated cell text");

    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    c.expect(elapsed < 5000, "runtime " + std::to_string(elapsed) + "ms exceeds 5s");
    g_results.push_back(std::move(c));
}

// --- Criterion 5: consistency pipeline ------------------------------------

void criterion_5() {
    Criterion c{5, "5-run consistency: fixed mock gives alpha=1/std=0/SCI=1; jitter matches oracle"};
    fixtures::TempDir tmp("acceptance-consistency");
    std::string dataset_dir = build_e2e_dataset(tmp);
    Dataset dataset = load_dataset(dataset_dir);

    RunManifest manifest;
    manifest.dataset_path = dataset_dir;
    manifest.judges = default_judges();
    manifest.n_runs = 5;

    HarnessConfig fixed;
    fixed.backend.mode = "mock";
    fixed.mock.profile = "fixed";
    EvaluateResult fixed_run = cmd_evaluate(manifest, fixed, (tmp.path() / "fixed").string());
    auto fixed_reports = cmd_consistency({fixed_run.run_dir}, dataset, fixed);
    c.expect(fixed_reports.size() == default_judges().size(), "missing judges in fixed report");
    for (const auto& [judge, report] : fixed_reports) {
        c.expect(report.alpha == 1.0, judge + ": alpha != 1.0");
        c.expect(report.avg_std == 0.0, judge + ": avg_std != 0.0");
        c.expect(report.sci.has_value() && std::abs(*report.sci - 1.0) < 1e-12,
                 judge + ": SCI != 1.0");
        c.expect(report.n_traces == 4, judge + ": n_traces != 4");
    }

    HarnessConfig jitter;
    jitter.backend.mode = "mock";
    jitter.mock.profile = "jitter";
    EvaluateResult jitter_run = cmd_evaluate(manifest, jitter, (tmp.path() / "jitter").string());
    auto jitter_reports = cmd_consistency({jitter_run.run_dir}, dataset, jitter);

    // Oracle: rebuild the runs x traces matrices straight from the store.
    StoredVerdicts store = load_run(jitter_run.run_dir);
    std::vector<std::string> trace_ids = dataset.split_ids("all");
    std::sort(trace_ids.begin(), trace_ids.end());
    for (JudgeId judge : default_judges()) {
        RatingsMatrix matrix(5, std::vector<std::optional<double>>(trace_ids.size()));
        for (const JudgeVerdict& v : store.valid) {
            if (v.judge_id != judge) continue;
            auto at = std::find(trace_ids.begin(), trace_ids.end(), v.trace_id);
            matrix[static_cast<std::size_t>(v.run_index)]
                  [static_cast<std::size_t>(at - trace_ids.begin())] = v.score_norm;
        }
        auto expected_alpha = oracles::krippendorff_pairwise(matrix);
        std::vector<double> stds = oracles::per_item_stds(matrix);
        auto it = jitter_reports.find(to_string(judge));
        if (!expected_alpha.has_value()) {
            c.expect(it == jitter_reports.end(), to_string(judge) + ": oracle insufficient");
            continue;
        }
        c.expect(it != jitter_reports.end(), to_string(judge) + ": report missing");
        if (it == jitter_reports.end()) continue;
        c.expect(std::abs(it->second.alpha - *expected_alpha) <= 1e-9,
                 to_string(judge) + ": alpha delta " +
                     std::to_string(std::abs(it->second.alpha - *expected_alpha)));
        c.expect(std::abs(it->second.avg_std - oracles::mean(stds)) <= 1e-9,
                 to_string(judge) + ": avg_std mismatch");
    }
    g_results.push_back(std::move(c));
}

// --- Criterion 6: preprocessing -------------------------------------------

void criterion_6() {
    Criterion c{6, "dedup shrinks replayed history below 60% and keeps span ids resolvable"};

    // Six turns, each replaying the whole prior conversation.
    std::vector<std::pair<std::string, std::string>> history = {
        {"system", "You are the manager agent with detailed instructions."},
        {"user", "What is the airspeed velocity of an unladen swallow?"}};
    std::vector<fixtures::SpanDef> spans = {{"root", "", "AGENT", 0, 10000}};
    for (int turn = 0; turn < 6; ++turn) {
        std::string reply = "assistant turn " + std::to_string(turn) +
                            " reasoning about swallows with plenty of repeated context";
        spans.push_back({"llm" + std::to_string(turn), "root", "LLM", 10 + turn * 10,
                         15 + turn * 10,
                         fixtures::llm_io(fixtures::messages_json(history), reply)});
        history.emplace_back("assistant", reply);
    }
    Trace trace = parse_trace(fixtures::trace_json("dup", "swallows", spans));

    std::size_t naive = 0;
    for (const Span& s : trace.spans) {
        for (const auto& [k, v] : s.attributes) naive += v.size();
    }
    ProcessedTrace pt = preprocess_trace(trace);
    std::string rendered = render_transcript(pt);
    c.expect(rendered.size() * 10 < naive * 6,
             "rendered " + std::to_string(rendered.size()) + " vs naive " +
                 std::to_string(naive) + " exceeds 60%");

    auto deduped = dedupe_history(pt.segments);
    c.expect(deduped.size() == pt.segments.size(), "dedupe changed segment count");
    for (std::size_t s = 0; s < deduped.size(); ++s) {
        c.expect(deduped[s].messages.size() == pt.segments[s].messages.size(),
                 "dedupe_history not idempotent");
    }

    // Every rendered span reference resolves in the source trace.
    std::istringstream lines(rendered);
    std::string line;
    std::size_t checked = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("[span ", 0) != 0) continue;
        std::size_t end = line.find(']');
        c.expect(end != std::string::npos, "unterminated span prefix");
        std::string id = line.substr(6, end - 6);
        c.expect(trace.has_span(id), "rendered span id '" + id + "' does not resolve");
        ++checked;
    }
    c.expect(checked > 0, "no span-prefixed lines rendered");
    g_results.push_back(std::move(c));
}

// --- Criterion 7: split determinism ---------------------------------------

void criterion_7() {
    Criterion c{7, "117 ids at ratio 0.5 split 58/59 with stable membership"};
    std::vector<std::string> ids;
    for (int i = 0; i < 117; ++i) ids.push_back("synthetic-" + std::to_string(i));
    auto [dev, test] = split_dataset(ids, 0.5, 7);
    c.expect(dev.size() == 58, "dev size " + std::to_string(dev.size()));
    c.expect(test.size() == 59, "test size " + std::to_string(test.size()));
    for (int repeat = 0; repeat < 3; ++repeat) {
        auto [dev2, test2] = split_dataset(ids, 0.5, 7);
        c.expect(dev2 == dev && test2 == test, "membership changed across repeats");
    }
    std::set<std::string> all(dev.begin(), dev.end());
    for (const std::string& id : test) all.insert(id);
    c.expect(all.size() == ids.size(), "split lost or duplicated ids");
    g_results.push_back(std::move(c));
}

// --- Criterion 8: prompt fidelity ------------------------------------------

void criterion_8() {
    Criterion c{8, "builtin prompts contain the verbatim anchor strings"};
    auto specs = builtin_judges();
    auto base_of = [&](JudgeId id) {
        for (const JudgeSpec& s : specs) {
            if (s.id == id) return s.base_prompt;
        }
        return std::string();
    };
    c.expect(base_of(JudgeId::LC).find("LOGICAL CONSISTENCY evaluator") != std::string::npos,
             "LC anchor missing");
    c.expect(base_of(JudgeId::PA).find("PLAN ADHERENCE evaluator") != std::string::npos,
             "PA anchor missing");
    for (const JudgeSpec& spec : specs) {
        c.expect(spec.base_prompt.find("Supporting Evidence:") != std::string::npos,
                 to_string(spec.id) + ": template anchor missing");
    }
    c.expect(control_flow_preamble().find("delegates tasks to a search_agent") !=
                 std::string::npos,
             "control-flow anchor missing");
    g_results.push_back(std::move(c));
}

// --- Criterion 9: replay fixture reproduces committed golden tables --------

std::string ingest_replay_fixture(const fs::path& fixture_dir, const fixtures::TempDir& tmp) {
    std::string dataset_dir = (tmp.path() / "dataset").string();
    cmd_ingest((fixture_dir / "traces").string(), (fixture_dir / "annotations.jsonl").string(),
               (fixture_dir / "mapping.jsonl").string(), dataset_dir);
    return dataset_dir;
}

RunManifest replay_manifest(const std::string& dataset_dir) {
    RunManifest manifest;
    manifest.dataset_path = dataset_dir;
    manifest.judges = default_judges();
    manifest.n_runs = 2;
    manifest.model_id = "mock-model";
    return manifest;
}

ReportOptions replay_report_options(const fs::path& fixture_dir) {
    ReportOptions options;
    options.human_scores_path = (fixture_dir / "human_scores.jsonl").string();
    return options;
}

void criterion_9(const fs::path& fixture_dir) {
    Criterion c{9, "replay fixture reproduces the committed golden report byte-for-byte"};
    fs::path replay_dir = fixture_dir / "replay";
    if (!fs::exists(replay_dir / "recording.jsonl")) {
        c.expect(false, "fixture missing: run `gpa_acceptance --generate " +
                            fixture_dir.string() + "` and commit the outputs");
        g_results.push_back(std::move(c));
        return;
    }

    fixtures::TempDir tmp("acceptance-replay");
    std::string dataset_dir = ingest_replay_fixture(replay_dir, tmp);
    Dataset dataset = load_dataset(dataset_dir);

    // serialize/parse round-trips field-wise across the whole fixture corpus.
    for (const auto& [trace_id, trace] : dataset.traces) {
        Trace reparsed = parse_trace(serialize_trace(trace));
        bool equal = reparsed.trace_id == trace.trace_id && reparsed.task == trace.task &&
                     reparsed.spans == trace.spans;
        c.expect(equal, "trace '" + trace_id + "' does not round-trip");
    }

    HarnessConfig config;
    config.backend.mode = "replay";
    config.replay_recording = (replay_dir / "recording.jsonl").string();

    EvaluateResult result =
        cmd_evaluate(replay_manifest(dataset_dir), config, (tmp.path() / "runs").string());
    c.expect(result.exit_code == kExitOk, "replay run reported failures");
    c.expect(result.invalid_runs == 0,
             std::to_string(result.invalid_runs) + " invalid runs in replay");

    ReportBundle bundle =
        cmd_report(result.run_dir, dataset, replay_report_options(replay_dir), config);
    std::string json_text = render_report_json(bundle);
    std::string md_text = render_report_markdown(bundle);

    std::string golden_json = read_file(replay_dir / "golden_report.json");
    std::string golden_md = read_file(replay_dir / "golden_report.md");
    c.expect(!golden_json.empty(), "golden_report.json missing");
    c.expect(json_text == golden_json, "report.json deviates from the golden bytes");
    c.expect(md_text == golden_md, "report.md deviates from the golden bytes");

    // Audit shape: every coverage row carries its numerator and denominator.
    nlohmann::json doc = nlohmann::json::parse(json_text);
    std::size_t rows = 0;
    for (const auto& [split, sections] : doc.at("coverage").items()) {
        for (const char* section : {"identification", "localization"}) {
            for (const auto& row : sections.at(section)) {
                ++rows;
                c.expect(row.contains("numerator") && row.contains("denominator"),
                         "coverage row missing numerator/denominator");
            }
        }
    }
    c.expect(rows > 0, "no coverage rows in replay report");
    c.expect(doc.contains("reliability"), "reliability tables missing from 2-run replay");
    g_results.push_back(std::move(c));
}

// Builds the committed replay fixture: six synthetic traces, recorded mock
// responses, golden reports.
void generate_replay_fixture(const fs::path& fixture_dir) {
    fs::path replay_dir = fixture_dir / "replay";
    fs::create_directories(replay_dir / "traces");

    for (int i = 1; i <= 6; ++i) {
        std::string t = "r" + std::to_string(i);
        std::vector<fixtures::SpanDef> spans = {
            {t + "_root", "", "AGENT", 0, 1000,
             fixtures::llm_io("replay task " + t, "final answer " + t)},
            {t + "_plan", t + "_root", "LLM", 10, 20,
             fixtures::llm_io(fixtures::messages_json({{"system", "manager instructions"},
                                                       {"user", "replay task " + t}}),
                              "[PLAN] 1. investigate 2. answer (" + t + ")")},
            {t + "_tool", t + "_root", "TOOL", 30, 40,
             fixtures::llm_io("{\"query\":\"" + t + "\"}", "tool result " + t)}};
        if (i % 2 == 0) {  // half the traces delegate to a search agent
            spans.push_back({t + "_sub", t + "_root", "AGENT", 50, 500,
                             fixtures::llm_io("sub-task " + t, "sub answer " + t)});
            spans.push_back({t + "_sub_llm", t + "_sub", "LLM", 60, 70,
                             fixtures::llm_io(fixtures::messages_json(
                                                  {{"system", "search agent instructions"},
                                                   {"user", "sub-task " + t}}),
                                              "searching for " + t)});
        }
        std::ofstream out(replay_dir / "traces" / (t + ".json"));
        out << fixtures::trace_json(t, "replay task " + t, spans);
    }

    {
        std::ofstream out(replay_dir / "annotations.jsonl");
        out << R"({"error_id":"re1","trace_id":"r1","impact":"high","span_ids":["r1_plan"],"category":"reasoning","description":"hallucinated claim"})"
            << "\n"
            << R"({"error_id":"re2","trace_id":"r2","impact":"medium","span_ids":["r2_tool"],"category":"tool-args","description":"invalid parameter"})"
            << "\n"
            << R"({"error_id":"re3","trace_id":"r3","impact":"low","span_ids":["r3_tool"],"category":"waste","description":"redundant call"})"
            << "\n"
            << R"({"error_id":"re4","trace_id":"r4","impact":"high","span_ids":["r4_sub_llm"],"category":"plan-skip","description":"abandoned plan"})"
            << "\n"
            << R"({"error_id":"re5","trace_id":"r5","impact":"medium","span_ids":["r5_plan","r5_tool"],"category":"drift","description":"goal drift"})"
            << "\n"
            << R"({"error_id":"re6","trace_id":"r6","impact":"low","span_ids":["r6_sub_llm"],"category":"selection","description":"wrong tool"})"
            << "\n";
    }
    {
        std::ofstream out(replay_dir / "mapping.jsonl");
        out << R"({"error_id":"re1","judges":["LC"]})" << "\n"
            << R"({"error_id":"re2","judges":["TC"]})" << "\n"
            << R"({"error_id":"re3","judges":["EE"]})" << "\n"
            << R"({"error_id":"re4","judges":["PA","LC"]})" << "\n"
            << R"({"error_id":"re5","judges":["PQ","EE"]})" << "\n"
            << R"({"error_id":"re6","judges":["TS"]})" << "\n";
    }
    {
        std::ofstream out(replay_dir / "human_scores.jsonl");
        for (int i = 1; i <= 6; ++i) {
            out << R"({"trace_id":"r)" << i << R"(","judge_id":"LC","score":)" << (i % 4)
                << "}\n";
            out << R"({"trace_id":"r)" << i << R"(","judge_id":"EE","score":)" << ((i + 1) % 4)
                << "}\n";
        }
    }

    // Scripted responses: hits, misses, one run-to-run disagreement (LC on
    // r4), one wrong-span citation (EE on r5), one false positive (TC on
    // r5), and one error nobody catches (re5).
    {
        nlohmann::json script;
        script["entries"] = nlohmann::json::array();
        auto entry = [&](const char* judge, const char* trace, int score,
                         std::vector<std::string> cite, const char* evidence, int run = -1) {
            nlohmann::json e;
            e["judge"] = judge;
            e["trace"] = trace;
            e["score"] = score;
            e["cite"] = cite;
            e["evidence"] = evidence;
            if (run >= 0) e["run"] = run;
            script["entries"].push_back(e);
        };
        entry("LC", "r1", 1, {"r1_plan"}, "fabricated claim in the plan step");
        entry("LC", "r4", 2, {"r4_sub_llm"}, "search agent contradicted itself", 0);
        entry("LC", "r4", 3, {}, "", 1);
        entry("EE", "r3", 0, {"r3_tool"}, "tool call repeated with identical arguments");
        entry("EE", "r5", 2, {"r5_root"}, "verification step added no information");
        entry("PA", "r4", 1, {"r4_sub_llm"}, "plan step two was never executed");
        entry("PQ", "r5", 2, {"r5_root"}, "plan omits the required cross-check");
        entry("TS", "r6", 1, {"r6_sub_llm"}, "picked a browsing tool for a file task", 0);
        entry("TS", "r6", 1, {"r6_root"}, "tool choice ignored the mandated reader", 1);
        entry("TC", "r2", 2, {"r2_tool"}, "invalid parameter passed to the search tool");
        entry("TC", "r5", 0, {}, "arguments missing a required field");
        std::ofstream out(replay_dir / "mock_script.json");
        out << script.dump(2) << "\n";
    }

    fixtures::TempDir tmp("fixture-gen");
    std::string dataset_dir = ingest_replay_fixture(replay_dir, tmp);
    Dataset dataset = load_dataset(dataset_dir);

    // Record the scripted responses.
    HarnessConfig mock;
    mock.backend.mode = "mock";
    mock.mock.profile = "scripted";
    mock.mock.script_path = (replay_dir / "mock_script.json").string();
    EvaluateResult recorded =
        cmd_evaluate(replay_manifest(dataset_dir), mock, (tmp.path() / "record").string());
    fs::copy_file(fs::path(recorded.run_dir) / "cache.jsonl", replay_dir / "recording.jsonl",
                  fs::copy_options::overwrite_existing);

    // Golden reports come from the replay path itself.
    HarnessConfig replay;
    replay.backend.mode = "replay";
    replay.replay_recording = (replay_dir / "recording.jsonl").string();
    EvaluateResult replayed =
        cmd_evaluate(replay_manifest(dataset_dir), replay, (tmp.path() / "replayed").string());
    ReportBundle bundle =
        cmd_report(replayed.run_dir, dataset, replay_report_options(replay_dir), replay);
    {
        std::ofstream out(replay_dir / "golden_report.json", std::ios::binary);
        out << render_report_json(bundle);
    }
    {
        std::ofstream out(replay_dir / "golden_report.md", std::ios::binary);
        out << render_report_markdown(bundle);
    }
    std::cout << "wrote replay fixture under " << replay_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    fs::path fixture_dir = "tests/fixtures";
    bool generate = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--generate") == 0) {
            generate = true;
        } else {
            fixture_dir = argv[i];
        }
    }

    if (generate) {
        generate_replay_fixture(fixture_dir);
        return 0;
    }

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(fixture_dir);

    bool all_passed = true;
    for (const Criterion& c : g_results) {
        std::cout << (c.passed ? "[PASS]" : "[FAIL]") << " criterion " << c.number << ": "
                  << c.description << "\n";
        for (const std::string& failure : c.failures) {
            std::cout << "        " << failure << "\n";
            all_passed = false;
        }
    }
    return all_passed ? 0 : 1;
}
