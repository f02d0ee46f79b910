#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gpa/ids.hpp"
#include "gpa/judges.hpp"
#include "gpa/matching.hpp"
#include "gpa/trace.hpp"

namespace gpa {

// Decision unit behind a confusion matrix. TRACE_JUDGE (default) scores
// per-trace judge decisions, which supply the negatives precision needs;
// ERROR_JUDGE scores mapped (error, judge) pairs and is inherently
// recall-only. Reports label the unit on every table.
enum class ConfusionUnit { TRACE_JUDGE, ERROR_JUDGE };

std::string to_string(ConfusionUnit unit);

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    ConfusionUnit unit = ConfusionUnit::TRACE_JUDGE;

    std::size_t total() const { return tp + fp + fn + tn; }
};

// Undefined metrics are absent, never silently zero; renderers print them
// as an em-dash.
struct ClassificationMetrics {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> f2;
    std::optional<double> accuracy;
};

ClassificationMetrics classification_metrics(const ConfusionCounts& c);

// The F arithmetic behind classification_metrics, usable on (P, R) pairs
// directly. Undefined (absent) when the denominator vanishes.
std::optional<double> f1_score(double precision, double recall);
std::optional<double> f2_score(double precision, double recall);

struct AlignmentReport {
    double acc_ob1 = 0.0;
    double acc_3pt = 0.0;
    double acc_2pt = 0.0;
    std::optional<double> correlation;
    double nmae = 0.0;
    std::size_t n_pairs = 0;
};

// Fraction of pairs within one point on the raw scale.
double off_by_one_accuracy(const std::vector<int>& human, const std::vector<int>& judge);

// Exact-match fraction after collapsing both sides to the 3-point scale.
double bucketed_accuracy(const std::vector<int>& human, const std::vector<int>& judge);

// Exact-match fraction after the binary error-vs-correct collapse.
double two_point_accuracy(const std::vector<int>& human, const std::vector<int>& judge);

// Absent when either side has zero variance (or fewer than two pairs).
std::optional<double> pearson_correlation(const std::vector<double>& x,
                                          const std::vector<double>& y);

// mean(|h - j|) / scale_range.
double nmae(const std::vector<double>& human, const std::vector<double>& judge,
            double scale_range);

AlignmentReport alignment_report(const std::vector<int>& human, const std::vector<int>& judge,
                                 double scale_range = 3.0);

// runs (raters) x items; missing ratings allowed.
using RatingsMatrix = std::vector<std::vector<std::optional<double>>>;

// Krippendorff's alpha with interval (squared-difference) distance via the
// coincidence formulation, treating runs as raters. Items with fewer than
// two ratings are excluded; fewer than two qualifying items is
// InsufficientData. Returns 1.0 when observed and expected disagreement are
// both zero.
double krippendorff_alpha_interval(const RatingsMatrix& ratings);

struct DispersionSummary {
    double avg_std = 0.0;
    double ci95_halfwidth = 0.0;  // 1.96 * std(per-item stds) / sqrt(n_items)
    std::size_t n_items = 0;
};

// Per-item sample standard deviation (n-1 denominator) over valid runs.
DispersionSummary per_trace_dispersion(const RatingsMatrix& ratings);

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);

// Mean over traces of the mean pairwise cosine similarity of that trace's
// rationale embeddings; traces with fewer than two embeddings are excluded.
double semantic_consistency_index(
    const std::vector<std::vector<std::vector<double>>>& rationale_embeddings_per_trace);

struct ReliabilityReport {
    double alpha = 0.0;
    std::size_t n_traces = 0;  // traces with >= 2 valid ratings
    double avg_std = 0.0;
    double ci95_halfwidth = 0.0;
    std::optional<double> sci;
};

// TRACE_JUDGE: a trace is ground-truth positive when at least one of its
// errors (after the impact filter) maps to the judge, and predicted
// positive when any valid verdict scores below 3. ERROR_JUDGE: mapped
// errors, predicted by match-record identification; fp = tn = 0 by
// construction. Throws CoverageGap when verdicts and the trace set do not
// line up.
ConfusionCounts build_confusion(const std::vector<std::string>& trace_ids, JudgeId judge,
                                std::optional<Impact> impact,
                                const std::vector<JudgeVerdict>& verdicts,
                                const std::vector<AnnotatedError>& errors,
                                const std::vector<GpaMapping>& mappings,
                                const std::vector<MatchRecord>& records, ConfusionUnit unit);

// Score matrices as CSV: header "run,<trace ids...>", one row per run,
// empty cells for missing ratings.
std::string export_matrix_csv(const RatingsMatrix& ratings,
                              const std::vector<std::string>& trace_ids);
std::pair<RatingsMatrix, std::vector<std::string>> import_matrix_csv(const std::string& csv);

}  // namespace gpa
