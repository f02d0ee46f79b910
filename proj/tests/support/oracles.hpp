#pragma once

// Independent brute-force oracles. These deliberately avoid the library's
// computation paths: plain loops over definitions, no shared helpers.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracles {

using Matrix = std::vector<std::vector<std::optional<double>>>;

// Krippendorff's interval alpha via explicit ordered-pair sums.
// Returns nullopt when fewer than two units have two or more ratings.
inline std::optional<double> krippendorff_pairwise(const Matrix& ratings) {
    std::size_t n_items = 0;
    for (const auto& run : ratings) n_items = std::max(n_items, run.size());

    std::vector<std::vector<double>> units;
    for (std::size_t item = 0; item < n_items; ++item) {
        std::vector<double> values;
        for (const auto& run : ratings) {
            if (item < run.size() && run[item].has_value()) values.push_back(*run[item]);
        }
        if (values.size() >= 2) units.push_back(values);
    }
    if (units.size() < 2) return std::nullopt;

    double n = 0;
    double d_o = 0;
    std::vector<double> pooled;
    for (const auto& unit : units) {
        double m = static_cast<double>(unit.size());
        double sum = 0;
        for (std::size_t i = 0; i < unit.size(); ++i) {
            for (std::size_t j = 0; j < unit.size(); ++j) {
                if (i == j) continue;
                sum += (unit[i] - unit[j]) * (unit[i] - unit[j]);
            }
        }
        d_o += sum / (m - 1);
        n += m;
        for (double v : unit) pooled.push_back(v);
    }
    d_o /= n;

    double d_e = 0;
    for (std::size_t a = 0; a < pooled.size(); ++a) {
        for (std::size_t b = 0; b < pooled.size(); ++b) {
            if (a == b) continue;
            d_e += (pooled[a] - pooled[b]) * (pooled[a] - pooled[b]);
        }
    }
    d_e /= n * (n - 1);
    if (d_e == 0) return 1.0;
    return 1.0 - d_o / d_e;
}

// Per-item sample standard deviations by the textbook formula.
inline std::vector<double> per_item_stds(const Matrix& ratings) {
    std::size_t n_items = 0;
    for (const auto& run : ratings) n_items = std::max(n_items, run.size());
    std::vector<double> stds;
    for (std::size_t item = 0; item < n_items; ++item) {
        std::vector<double> values;
        for (const auto& run : ratings) {
            if (item < run.size() && run[item].has_value()) values.push_back(*run[item]);
        }
        if (values.size() < 2) continue;
        double mean = 0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0;
        for (double v : values) ss += (v - mean) * (v - mean);
        stds.push_back(std::sqrt(ss / static_cast<double>(values.size() - 1)));
    }
    return stds;
}

inline double mean(const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
    double m = mean(xs);
    double ss = 0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

// Mean pairwise cosine per trace, then mean over traces with >= 2 vectors.
inline std::optional<double> sci_all_pairs(
    const std::vector<std::vector<std::vector<double>>>& per_trace) {
    double total = 0;
    std::size_t used = 0;
    for (const auto& vectors : per_trace) {
        if (vectors.size() < 2) continue;
        double sum = 0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            for (std::size_t j = i + 1; j < vectors.size(); ++j) {
                sum += cosine(vectors[i], vectors[j]);
                ++pairs;
            }
        }
        total += sum / static_cast<double>(pairs);
        ++used;
    }
    if (used == 0) return std::nullopt;
    return total / static_cast<double>(used);
}

// Coverage by direct enumeration over (error, judge) pairs.
struct CoverageOracleRow {
    std::size_t caught = 0;
    std::size_t localized = 0;
    std::size_t total = 0;
};

struct ErrorDef {
    std::string error_id;
    std::string impact;  // "LOW"/"MEDIUM"/"HIGH"
    std::set<std::string> judges;
};

struct OutcomeDef {
    std::string error_id;
    std::string judge;
    bool identified = false;
    bool localized = false;
};

inline std::map<std::pair<std::string, std::string>, CoverageOracleRow> coverage_enumerate(
    const std::vector<ErrorDef>& errors, const std::vector<OutcomeDef>& outcomes) {
    auto outcome_of = [&](const std::string& error_id, const std::string& judge) {
        std::pair<bool, bool> result{false, false};
        for (const OutcomeDef& o : outcomes) {
            if (o.error_id == error_id && o.judge == judge) {
                result.first = result.first || o.identified;
                result.second = result.second || o.localized;
            }
        }
        return result;
    };

    std::map<std::pair<std::string, std::string>, CoverageOracleRow> table;
    for (const ErrorDef& e : errors) {
        bool any_caught = false;
        bool any_localized = false;
        for (const std::string& judge : e.judges) {
            auto [caught, localized] = outcome_of(e.error_id, judge);
            any_caught = any_caught || caught;
            any_localized = any_localized || localized;
            for (const std::string& impact : {e.impact, std::string("ALL")}) {
                CoverageOracleRow& row = table[{judge, impact}];
                row.total += 1;
                if (caught) row.caught += 1;
                if (localized) row.localized += 1;
            }
        }
        for (const std::string& impact : {e.impact, std::string("ALL")}) {
            CoverageOracleRow& row = table[{"ALL", impact}];
            row.total += 1;
            if (any_caught) row.caught += 1;
            if (any_localized) row.localized += 1;
        }
    }
    return table;
}

// Trace-unit confusion counts by direct enumeration.
struct ConfusionOracle {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline ConfusionOracle confusion_enumerate(const std::vector<std::string>& traces,
                                           const std::set<std::string>& gt_positive,
                                           const std::set<std::string>& predicted_positive) {
    ConfusionOracle c;
    for (const std::string& t : traces) {
        bool gt = gt_positive.count(t) > 0;
        bool pred = predicted_positive.count(t) > 0;
        if (gt && pred) ++c.tp;
        if (!gt && pred) ++c.fp;
        if (gt && !pred) ++c.fn;
        if (!gt && !pred) ++c.tn;
    }
    return c;
}

}  // namespace oracles
