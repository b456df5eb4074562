#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "wbc/error.hpp"
#include "wbc/features.hpp"

namespace wbc {

/// Binary confusion counts; Healthy is the negative class, Malignant the
/// positive one.
struct ConfusionMatrix {
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tp = 0;

    std::int64_t total() const { return tn + fp + fn + tp; }
    std::int64_t correct() const { return tn + tp; }
};

inline ConfusionMatrix confusion_from_predictions(const std::vector<CellLabel>& truth,
                                                  const std::vector<CellLabel>& predicted) {
    if (truth.size() != predicted.size())
        throw ParameterError("confusion_from_predictions: length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pos_truth = truth[i] == CellLabel::Malignant;
        const bool pos_pred = predicted[i] == CellLabel::Malignant;
        if (pos_truth && pos_pred) ++cm.tp;
        else if (pos_truth) ++cm.fn;
        else if (pos_pred) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

// ---------------------------------------------------------------------------
// Exact binomial (Clopper-Pearson) confidence interval

namespace detail {

/// Continued-fraction core of the regularized incomplete beta (modified
/// Lentz algorithm).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 3e-15) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0)
        throw ParameterError("regularized_incomplete_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace detail {

/// Solve I_p(a, b) = target for p by bisection; I is increasing in p.
inline double solve_beta_quantile(double a, double b, double target) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = (lo + hi) / 2.0;
        if (regularized_incomplete_beta(a, b, mid) < target) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return (lo + hi) / 2.0;
}

}  // namespace detail

/// Exact two-sided binomial interval bounds for x successes in n trials.
/// For x = n the lower bound reduces to (alpha/2)^(1/n); the solver hits
/// that identity to full precision because P(X >= n | p) = p^n.
inline double clopper_pearson_lower(std::int64_t x, std::int64_t n, double alpha) {
    if (n <= 0 || x < 0 || x > n) throw ParameterError("clopper_pearson_lower: bad counts");
    if (x == 0) return 0.0;
    return detail::solve_beta_quantile(static_cast<double>(x), static_cast<double>(n - x + 1),
                                       alpha / 2.0);
}

inline double clopper_pearson_upper(std::int64_t x, std::int64_t n, double alpha) {
    if (n <= 0 || x < 0 || x > n) throw ParameterError("clopper_pearson_upper: bad counts");
    if (x == n) return 1.0;
    return detail::solve_beta_quantile(static_cast<double>(x + 1), static_cast<double>(n - x),
                                       1.0 - alpha / 2.0);
}

struct AccuracyCi {
    double accuracy = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

inline AccuracyCi accuracy_with_ci(const ConfusionMatrix& cm, double level = 0.95) {
    if (cm.total() <= 0) throw ParameterError("accuracy_with_ci: empty confusion matrix");
    if (level <= 0.0 || level >= 1.0)
        throw ParameterError("accuracy_with_ci: level must be in (0, 1)");
    const double alpha = 1.0 - level;
    AccuracyCi out;
    out.accuracy = static_cast<double>(cm.correct()) / static_cast<double>(cm.total());
    out.lower = clopper_pearson_lower(cm.correct(), cm.total(), alpha);
    out.upper = clopper_pearson_upper(cm.correct(), cm.total(), alpha);
    return out;
}

/// Harmonic mean of precision and recall for the Malignant class. Both
/// precision and recall must be defined; a zero harmonic-mean denominator
/// (tp = 0 with errors on both sides) scores 0.
inline double f1_score(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fp <= 0) throw Error("f1_score: precision undefined (no positive predictions)");
    if (cm.tp + cm.fn <= 0) throw Error("f1_score: recall undefined (no positive truths)");
    const double precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    const double recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// ---------------------------------------------------------------------------
// Variable-importance normalization

/// Per-feature importance rescaled so the largest value is 1. Negative raw
/// values (permutation noise) clamp to zero first.
inline std::array<double, kFeatureCount> relative_feature_vi(
    const std::array<double, kFeatureCount>& mda) {
    std::array<double, kFeatureCount> out{};
    double max_value = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        out[i] = std::max(0.0, mda[i]);
        max_value = std::max(max_value, out[i]);
    }
    if (max_value <= 0.0)
        throw ParameterError("relative_feature_vi: no positive importance values");
    for (double& v : out) v /= max_value;
    return out;
}

struct CategoryImportance {
    double shape = 0.0;
    double color = 0.0;
    double texture = 0.0;
};

/// Category importances: clamp negatives, sum within each category, then
/// normalize by the largest category sum (so the top category scores 1).
inline CategoryImportance category_vi(const std::array<double, kFeatureCount>& mda) {
    double sums[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        sums[static_cast<int>(category_of(i))] += std::max(0.0, mda[i]);
    const double max_sum = std::max({sums[0], sums[1], sums[2]});
    if (max_sum <= 0.0) throw ParameterError("category_vi: no positive importance values");
    return {sums[0] / max_sum, sums[1] / max_sum, sums[2] / max_sum};
}

// ---------------------------------------------------------------------------
// Report assembly and persistence

struct EvaluationReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double f1 = 0.0;
    std::array<double, kFeatureCount> per_feature_vi{};
    std::array<double, kFeatureCount> relative_vi{};
    CategoryImportance category;
};

inline EvaluationReport build_report(const ConfusionMatrix& cm,
                                     const std::array<double, kFeatureCount>& mda,
                                     double level = 0.95) {
    EvaluationReport report;
    report.confusion = cm;
    const AccuracyCi ci = accuracy_with_ci(cm, level);
    report.accuracy = ci.accuracy;
    report.ci_lower = ci.lower;
    report.ci_upper = ci.upper;
    report.f1 = f1_score(cm);
    report.per_feature_vi = mda;
    report.relative_vi = relative_feature_vi(mda);
    report.category = category_vi(mda);
    return report;
}

namespace detail {

inline std::string format_report_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field += ch;
        }
    }
    fields.push_back(field);
    return fields;
}

}  // namespace detail

/// Human-readable summary.
inline std::string report_text(const EvaluationReport& r) {
    std::ostringstream out;
    out << "Confusion matrix (rows = truth, cols = prediction)\n";
    out << "            Healthy  Malignant\n";
    out << "Healthy     " << r.confusion.tn << "  " << r.confusion.fp << "\n";
    out << "Malignant   " << r.confusion.fn << "  " << r.confusion.tp << "\n\n";
    char line[160];
    std::snprintf(line, sizeof line, "Accuracy  %.4f  (95%% CI %.4f - %.4f)\n", r.accuracy,
                  r.ci_lower, r.ci_upper);
    out << line;
    std::snprintf(line, sizeof line, "F1        %.4f\n\n", r.f1);
    out << line;
    out << "Relative variable importance by category:\n";
    std::snprintf(line, sizeof line, "  Shape   %.3f\n  Color   %.3f\n  Texture %.3f\n\n",
                  r.category.shape, r.category.color, r.category.texture);
    out << line;
    out << "Per-feature importance (mean decrease in accuracy / relative):\n";
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        std::snprintf(line, sizeof line, "  %-18s %9.5f  %7.3f\n", kFeatureNames[i],
                      r.per_feature_vi[i], r.relative_vi[i]);
        out << line;
    }
    return out.str();
}

/// Machine-readable table: three CSV sections (metrics; per-feature
/// importance; category importance), blank-line separated, lossless.
inline std::string write_report_table(const EvaluationReport& r) {
    using detail::format_report_double;
    std::ostringstream out;
    out << "metric,value,lower,upper\n";
    out << "accuracy," << format_report_double(r.accuracy) << ","
        << format_report_double(r.ci_lower) << "," << format_report_double(r.ci_upper) << "\n";
    out << "f1," << format_report_double(r.f1) << ",,\n";
    out << "tn," << r.confusion.tn << ",,\n";
    out << "fp," << r.confusion.fp << ",,\n";
    out << "fn," << r.confusion.fn << ",,\n";
    out << "tp," << r.confusion.tp << ",,\n";
    out << "\nfeature,mda,relative\n";
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        out << kFeatureNames[i] << "," << format_report_double(r.per_feature_vi[i]) << ","
            << format_report_double(r.relative_vi[i]) << "\n";
    out << "\ncategory,relative\n";
    out << "Shape," << format_report_double(r.category.shape) << "\n";
    out << "Color," << format_report_double(r.category.color) << "\n";
    out << "Texture," << format_report_double(r.category.texture) << "\n";
    return out.str();
}

inline EvaluationReport parse_report_table(const std::string& text) {
    EvaluationReport r;
    std::istringstream in(text);
    std::string line;
    int section = 0;  // 1 = metrics, 2 = features, 3 = categories
    std::size_t feature_row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "metric,value,lower,upper") { section = 1; continue; }
        if (line == "feature,mda,relative") { section = 2; continue; }
        if (line == "category,relative") { section = 3; continue; }
        const std::vector<std::string> f = detail::split_csv_line(line);
        if (section == 1) {
            if (f.size() != 4) throw SchemaError("report parse: bad metric row: " + line);
            if (f[0] == "accuracy") {
                r.accuracy = std::stod(f[1]);
                r.ci_lower = std::stod(f[2]);
                r.ci_upper = std::stod(f[3]);
            } else if (f[0] == "f1") {
                r.f1 = std::stod(f[1]);
            } else if (f[0] == "tn") r.confusion.tn = std::stoll(f[1]);
            else if (f[0] == "fp") r.confusion.fp = std::stoll(f[1]);
            else if (f[0] == "fn") r.confusion.fn = std::stoll(f[1]);
            else if (f[0] == "tp") r.confusion.tp = std::stoll(f[1]);
            else throw SchemaError("report parse: unknown metric '" + f[0] + "'");
        } else if (section == 2) {
            if (f.size() != 3) throw SchemaError("report parse: bad feature row: " + line);
            if (feature_row >= kFeatureCount)
                throw SchemaError("report parse: too many feature rows");
            if (f[0] != kFeatureNames[feature_row])
                throw SchemaError("report parse: feature order mismatch at '" + f[0] + "'");
            r.per_feature_vi[feature_row] = std::stod(f[1]);
            r.relative_vi[feature_row] = std::stod(f[2]);
            ++feature_row;
        } else if (section == 3) {
            if (f.size() != 2) throw SchemaError("report parse: bad category row: " + line);
            if (f[0] == "Shape") r.category.shape = std::stod(f[1]);
            else if (f[0] == "Color") r.category.color = std::stod(f[1]);
            else if (f[0] == "Texture") r.category.texture = std::stod(f[1]);
            else throw SchemaError("report parse: unknown category '" + f[0] + "'");
        } else {
            throw SchemaError("report parse: content before any section header");
        }
    }
    if (feature_row != kFeatureCount)
        throw SchemaError("report parse: expected 24 feature rows, got " +
                          std::to_string(feature_row));
    return r;
}

}  // namespace wbc
