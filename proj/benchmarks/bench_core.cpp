#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "gpa/judges.hpp"
#include "gpa/metrics.hpp"
#include "gpa/preprocess.hpp"
#include "gpa/trace.hpp"

namespace {

std::string synthetic_trace_json(int n_spans) {
    nlohmann::json doc;
    doc["trace_id"] = "bench";
    doc["task"] = "benchmark task";
    doc["spans"] = nlohmann::json::array();
    nlohmann::json history = nlohmann::json::array();
    history.push_back({{"role", "system"}, {"content", "You are the manager agent."}});
    for (int i = 0; i < n_spans; ++i) {
        std::string id = "span" + std::to_string(i);
        nlohmann::json node;
        node["span_id"] = id;
        if (i > 0) node["parent_span_id"] = "span0";
        node["kind"] = i == 0 ? "AGENT" : "LLM";
        history.push_back({{"role", "assistant"},
                           {"content", "turn " + std::to_string(i) + " with some payload"}});
        node["attributes"] = {{"input.value", history.dump()},
                              {"output.value", "reply " + std::to_string(i)}};
        node["start_ns"] = i * 10;
        node["end_ns"] = i * 10 + 5;
        doc["spans"].push_back(node);
    }
    return doc.dump();
}

void BM_parse_trace(benchmark::State& state) {
    std::string doc = synthetic_trace_json(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(gpa::parse_trace(doc));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * doc.size()));
}
BENCHMARK(BM_parse_trace)->Arg(16)->Arg(128);

void BM_preprocess_dedupe(benchmark::State& state) {
    gpa::Trace trace = gpa::parse_trace(synthetic_trace_json(static_cast<int>(state.range(0))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(gpa::preprocess_trace(trace));
    }
}
BENCHMARK(BM_preprocess_dedupe)->Arg(16)->Arg(128);

void BM_krippendorff(benchmark::State& state) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    gpa::RatingsMatrix m(5);
    for (auto& run : m) {
        run.resize(static_cast<std::size_t>(state.range(0)));
        for (auto& cell : run) cell = value(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(gpa::krippendorff_alpha_interval(m));
    }
}
BENCHMARK(BM_krippendorff)->Arg(59)->Arg(1000);

void BM_parse_verdict(benchmark::State& state) {
    gpa::JudgeSpec spec = gpa::builtin_judge(gpa::JudgeId::LC);
    std::ostringstream text;
    text << "Criteria: consistency\nSupporting Evidence: ";
    std::set<std::string> known;
    for (int i = 0; i < 50; ++i) {
        std::string id = "deadbeef" + std::to_string(10000000 + i);
        known.insert(id);
        if (i % 5 == 0) text << " issue in span " << id << ".";
    }
    text << "\nScore: 2\n";
    std::string response = text.str();
    for (auto _ : state) {
        benchmark::DoNotOptimize(gpa::parse_verdict(response, spec, known));
    }
}
BENCHMARK(BM_parse_verdict);

}  // namespace
