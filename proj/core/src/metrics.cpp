#include "gpa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace gpa {

std::string to_string(ConfusionUnit unit) {
    return unit == ConfusionUnit::TRACE_JUDGE ? "TRACE_JUDGE" : "ERROR_JUDGE";
}

std::optional<double> f1_score(double precision, double recall) {
    if (precision + recall <= 0) return std::nullopt;
    return 2 * precision * recall / (precision + recall);
}

std::optional<double> f2_score(double precision, double recall) {
    if (4 * precision + recall <= 0) return std::nullopt;
    return 5 * precision * recall / (4 * precision + recall);
}

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
    ClassificationMetrics m;
    auto tp = static_cast<double>(c.tp);
    if (c.tp + c.fp > 0) m.precision = tp / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = tp / static_cast<double>(c.tp + c.fn);
    if (m.precision && m.recall) {
        m.f1 = f1_score(*m.precision, *m.recall);
        m.f2 = f2_score(*m.precision, *m.recall);
    }
    if (c.total() > 0) {
        m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    }
    return m;
}

namespace {

void check_pairs(std::size_t h, std::size_t j) {
    if (h != j) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(h) + " human vs " + std::to_string(j) + " judge scores");
    }
    if (h == 0) {
        throw Error(ErrorCode::EmptyInput, "no score pairs");
    }
}

}  // namespace

double off_by_one_accuracy(const std::vector<int>& human, const std::vector<int>& judge) {
    check_pairs(human.size(), judge.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < human.size(); ++i) {
        if (std::abs(human[i] - judge[i]) <= 1) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(human.size());
}

double bucketed_accuracy(const std::vector<int>& human, const std::vector<int>& judge) {
    check_pairs(human.size(), judge.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < human.size(); ++i) {
        if (bucket_score(human[i]) == bucket_score(judge[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(human.size());
}

double two_point_accuracy(const std::vector<int>& human, const std::vector<int>& judge) {
    check_pairs(human.size(), judge.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < human.size(); ++i) {
        if (bucket_score_2pt(human[i]) == bucket_score_2pt(judge[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(human.size());
}

std::optional<double> pearson_correlation(const std::vector<double>& x,
                                          const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    }
    if (x.size() < 2) return std::nullopt;  // no variance with < 2 points
    auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / n;
    double my = sy / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

double nmae(const std::vector<double>& human, const std::vector<double>& judge,
            double scale_range) {
    check_pairs(human.size(), judge.size());
    if (scale_range <= 0) {
        throw Error(ErrorCode::EmptyInput, "scale_range must be positive");
    }
    double sum = 0;
    for (std::size_t i = 0; i < human.size(); ++i) {
        sum += std::abs(human[i] - judge[i]);
    }
    return sum / static_cast<double>(human.size()) / scale_range;
}

AlignmentReport alignment_report(const std::vector<int>& human, const std::vector<int>& judge,
                                 double scale_range) {
    AlignmentReport report;
    report.n_pairs = human.size();
    report.acc_ob1 = off_by_one_accuracy(human, judge);
    report.acc_3pt = bucketed_accuracy(human, judge);
    report.acc_2pt = two_point_accuracy(human, judge);
    std::vector<double> h(human.begin(), human.end());
    std::vector<double> j(judge.begin(), judge.end());
    report.correlation = pearson_correlation(h, j);
    report.nmae = nmae(h, j, scale_range);
    return report;
}

namespace {

struct UnitValues {
    std::vector<double> values;  // >= 2 entries
};

std::vector<UnitValues> pairable_units(const RatingsMatrix& ratings) {
    std::size_t n_items = 0;
    for (const auto& run : ratings) {
        n_items = std::max(n_items, run.size());
    }
    std::vector<UnitValues> units;
    for (std::size_t item = 0; item < n_items; ++item) {
        UnitValues unit;
        for (const auto& run : ratings) {
            if (item < run.size() && run[item].has_value()) {
                unit.values.push_back(*run[item]);
            }
        }
        if (unit.values.size() >= 2) {
            units.push_back(std::move(unit));
        }
    }
    return units;
}

}  // namespace

double krippendorff_alpha_interval(const RatingsMatrix& ratings) {
    std::vector<UnitValues> units = pairable_units(ratings);
    if (units.size() < 2) {
        throw Error(ErrorCode::InsufficientData,
                    std::to_string(units.size()) + " item(s) with >= 2 valid ratings");
    }

    // Within-unit ordered-pair disagreement via moments:
    // sum_{i != j} (v_i - v_j)^2 = 2m*S2 - 2*S1^2. Squared differences are
    // shift-invariant, so each unit is centered on its own first value —
    // a unit of identical ratings then contributes exactly zero — while the
    // pooled moments behind D_e share one common base.
    const double pooled_base = units[0].values[0];
    double n = 0;
    double d_o = 0;
    double pooled_sum = 0;
    double pooled_sq = 0;
    for (const UnitValues& unit : units) {
        auto m = static_cast<double>(unit.values.size());
        double s1 = 0, s2 = 0;
        for (double raw : unit.values) {
            double v = raw - unit.values[0];
            s1 += v;
            s2 += v * v;
        }
        d_o += (2 * m * s2 - 2 * s1 * s1) / (m - 1);
        n += m;
        double p1 = 0, p2 = 0;
        for (double raw : unit.values) {
            double v = raw - pooled_base;
            p1 += v;
            p2 += v * v;
        }
        pooled_sum += p1;
        pooled_sq += p2;
    }
    d_o /= n;
    double d_e = (2 * n * pooled_sq - 2 * pooled_sum * pooled_sum) / (n * (n - 1));
    if (d_e <= 0) {
        return 1.0;  // all pooled values identical; zero disagreement by continuity
    }
    return 1.0 - d_o / d_e;
}

DispersionSummary per_trace_dispersion(const RatingsMatrix& ratings) {
    std::vector<UnitValues> units = pairable_units(ratings);
    if (units.empty()) {
        throw Error(ErrorCode::InsufficientData, "no item with >= 2 valid ratings");
    }
    std::vector<double> stds;
    stds.reserve(units.size());
    for (const UnitValues& unit : units) {
        auto m = static_cast<double>(unit.values.size());
        // Centering on the first value keeps identical runs at exactly zero.
        double mean = 0;
        for (double v : unit.values) mean += v - unit.values[0];
        mean /= m;
        double ss = 0;
        for (double v : unit.values) {
            double d = (v - unit.values[0]) - mean;
            ss += d * d;
        }
        stds.push_back(std::sqrt(ss / (m - 1)));
    }

    DispersionSummary summary;
    summary.n_items = stds.size();
    double mean_std = 0;
    for (double s : stds) mean_std += s;
    mean_std /= static_cast<double>(stds.size());
    summary.avg_std = mean_std;
    if (stds.size() >= 2) {
        double ss = 0;
        for (double s : stds) ss += (s - mean_std) * (s - mean_std);
        double sd = std::sqrt(ss / static_cast<double>(stds.size() - 1));
        summary.ci95_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(stds.size()));
    }
    return summary;
}

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size() || u.empty()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(u.size()) + " vs " + std::to_string(v.size()));
    }
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine of a zero vector is undefined");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double semantic_consistency_index(
    const std::vector<std::vector<std::vector<double>>>& rationale_embeddings_per_trace) {
    double total = 0;
    std::size_t qualifying = 0;
    for (const auto& trace_embeddings : rationale_embeddings_per_trace) {
        if (trace_embeddings.size() < 2) continue;
        double pair_sum = 0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < trace_embeddings.size(); ++i) {
            for (std::size_t j = i + 1; j < trace_embeddings.size(); ++j) {
                pair_sum += cosine_similarity(trace_embeddings[i], trace_embeddings[j]);
                ++pairs;
            }
        }
        total += pair_sum / static_cast<double>(pairs);
        ++qualifying;
    }
    if (qualifying == 0) {
        throw Error(ErrorCode::InsufficientData, "no trace with >= 2 rationale embeddings");
    }
    return total / static_cast<double>(qualifying);
}

ConfusionCounts build_confusion(const std::vector<std::string>& trace_ids, JudgeId judge,
                                std::optional<Impact> impact,
                                const std::vector<JudgeVerdict>& verdicts,
                                const std::vector<AnnotatedError>& errors,
                                const std::vector<GpaMapping>& mappings,
                                const std::vector<MatchRecord>& records, ConfusionUnit unit) {
    std::set<std::string> trace_set(trace_ids.begin(), trace_ids.end());
    std::map<std::string, std::set<JudgeId>> mapped;
    for (const GpaMapping& m : mappings) {
        mapped[m.error_id].insert(m.judges.begin(), m.judges.end());
    }

    ConfusionCounts counts;
    counts.unit = unit;

    if (unit == ConfusionUnit::ERROR_JUDGE) {
        std::set<std::string> identified;
        for (const MatchRecord& r : records) {
            if (r.judge_id == judge && r.identified) identified.insert(r.error_id);
        }
        for (const AnnotatedError& e : errors) {
            if (trace_set.count(e.trace_id) == 0) continue;
            if (impact.has_value() && e.impact != *impact) continue;
            auto m = mapped.find(e.error_id);
            if (m == mapped.end() || m->second.count(judge) == 0) continue;
            if (identified.count(e.error_id) > 0) {
                ++counts.tp;
            } else {
                ++counts.fn;
            }
        }
        return counts;
    }

    // TRACE_JUDGE
    std::map<std::string, bool> predicted;  // trace -> flagged an issue
    for (const JudgeVerdict& v : verdicts) {
        if (v.judge_id != judge) continue;
        if (trace_set.count(v.trace_id) == 0) {
            throw Error(ErrorCode::CoverageGap,
                        "verdict for trace '" + v.trace_id + "' outside the dataset");
        }
        bool flags = v.score_raw < 3;
        auto [it, inserted] = predicted.emplace(v.trace_id, flags);
        if (!inserted) it->second = it->second || flags;
    }

    std::map<std::string, bool> truth;
    for (const std::string& t : trace_ids) truth[t] = false;
    for (const AnnotatedError& e : errors) {
        if (trace_set.count(e.trace_id) == 0) continue;
        if (impact.has_value() && e.impact != *impact) continue;
        auto m = mapped.find(e.error_id);
        if (m != mapped.end() && m->second.count(judge) > 0) {
            truth[e.trace_id] = true;
        }
    }

    for (const std::string& t : trace_ids) {
        auto p = predicted.find(t);
        if (p == predicted.end()) {
            throw Error(ErrorCode::CoverageGap,
                        "trace '" + t + "' has no " + to_string(judge) + " verdict");
        }
        bool gt = truth[t];
        bool pred = p->second;
        if (gt && pred) ++counts.tp;
        else if (!gt && pred) ++counts.fp;
        else if (gt && !pred) ++counts.fn;
        else ++counts.tn;
    }
    return counts;
}

std::string export_matrix_csv(const RatingsMatrix& ratings,
                              const std::vector<std::string>& trace_ids) {
    std::ostringstream out;
    out << "run";
    for (const std::string& id : trace_ids) out << ',' << id;
    out << '\n';
    for (std::size_t run = 0; run < ratings.size(); ++run) {
        out << run;
        for (std::size_t item = 0; item < trace_ids.size(); ++item) {
            out << ',';
            if (item < ratings[run].size() && ratings[run][item].has_value()) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", *ratings[run][item]);
                out << buf;
            }
        }
        out << '\n';
    }
    return out.str();
}

std::pair<RatingsMatrix, std::vector<std::string>> import_matrix_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::MalformedDocument, "empty score matrix");
    }
    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(s);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!s.empty() && s.back() == ',') fields.push_back("");
        return fields;
    };
    std::vector<std::string> header = split(line);
    if (header.empty() || header[0] != "run") {
        throw Error(ErrorCode::MalformedDocument, "score matrix header must start with 'run'");
    }
    std::vector<std::string> trace_ids(header.begin() + 1, header.end());

    RatingsMatrix ratings;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split(line);
        std::vector<std::optional<double>> row;
        for (std::size_t i = 1; i < fields.size() && i <= trace_ids.size(); ++i) {
            std::string cell = fields[i];
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            if (cell.empty()) {
                row.push_back(std::nullopt);
            } else {
                row.push_back(std::stod(cell));
            }
        }
        row.resize(trace_ids.size(), std::nullopt);
        ratings.push_back(std::move(row));
    }
    return {std::move(ratings), std::move(trace_ids)};
}

}  // namespace gpa
