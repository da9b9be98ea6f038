#include "uct/metrics.hpp"

#include "uct/types.hpp"

#include <algorithm>
#include <cmath>

namespace uct {

const char* const kMetricNames[6] = {"accuracy", "f1",          "recall",
                                     "precision", "specificity", "mcc"};

ScoreResult score_record(std::vector<int> predicted, std::vector<int> truth, int64_t n_samples,
                         int tolerance) {
    if (tolerance < 0) throw RejectedValueError("tolerance must be >= 0");
    for (int p : predicted)
        if (p < 0 || p >= n_samples) throw RejectedValueError("predicted index out of range");
    for (int t : truth)
        if (t < 0 || t >= n_samples) throw RejectedValueError("true index out of range");

    ScoreResult result;
    std::sort(predicted.begin(), predicted.end());
    const auto last = std::unique(predicted.begin(), predicted.end());
    result.collapsed_duplicates = static_cast<int>(predicted.end() - last);
    predicted.erase(last, predicted.end());
    std::sort(truth.begin(), truth.end());

    struct Pair {
        int dist;
        int pi;
        int ti;
    };
    std::vector<Pair> pairs;
    for (int pi = 0; pi < static_cast<int>(predicted.size()); ++pi)
        for (int ti = 0; ti < static_cast<int>(truth.size()); ++ti) {
            const int d = std::abs(predicted[pi] - truth[ti]);
            if (d <= tolerance) pairs.push_back({d, pi, ti});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.dist, a.pi, a.ti) < std::tie(b.dist, b.pi, b.ti);
    });
    std::vector<char> pused(predicted.size(), 0), tused(truth.size(), 0);
    int64_t matches = 0;
    for (const auto& pr : pairs) {
        if (pused[pr.pi] || tused[pr.ti]) continue;
        pused[pr.pi] = tused[pr.ti] = 1;
        ++matches;
    }
    result.counts.tp = matches;
    result.counts.fp = static_cast<int64_t>(predicted.size()) - matches;
    result.counts.fn = static_cast<int64_t>(truth.size()) - matches;
    result.counts.tn = n_samples - result.counts.tp - result.counts.fp - result.counts.fn;
    return result;
}

namespace {
double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
}  // namespace

MetricRow derive_metrics(const ConfusionCounts& c) {
    if (c.total() <= 0) throw EmptyError("confusion counts are empty");
    const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    MetricRow r;
    r.accuracy = ratio(tp + tn, tp + tn + fp + fn);
    r.precision = ratio(tp, tp + fp);
    r.recall = ratio(tp, tp + fn);
    r.specificity = ratio(tn, tn + fp);
    r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
    r.mcc = ratio(tp * tn - fp * fn,
                  std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)));
    return r;
}

namespace {

// linear-interpolated quantile over a sorted copy
double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / n);
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    return s;
}

}  // namespace

MetricReport aggregate(const std::vector<MetricRow>& rows, const std::string& method) {
    if (rows.empty()) throw EmptyError("aggregate needs at least one row");
    MetricReport report;
    report.method = method;
    report.rows = rows;
    for (int k = 0; k < 6; ++k) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& r : rows) {
            const double v[6] = {r.accuracy, r.f1, r.recall, r.precision, r.specificity, r.mcc};
            values.push_back(v[k]);
        }
        report.summary[k] = summarize(values);
    }
    return report;
}

}  // namespace uct
