#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uct {

struct ConfusionCounts {
    int64_t tp = 0;
    int64_t tn = 0;
    int64_t fp = 0;
    int64_t fn = 0;

    int64_t total() const { return tp + tn + fp + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp; tn += o.tn; fp += o.fp; fn += o.fn;
        return *this;
    }
};

struct ScoreResult {
    ConfusionCounts counts;
    int collapsed_duplicates = 0;   // duplicate predicted indices merged
};

/// Greedy nearest matching of predicted vs true peak indices within
/// +/- tolerance samples; unmatched predictions are fp, unmatched truths fn,
/// the rest of the n samples tn.
ScoreResult score_record(std::vector<int> predicted, std::vector<int> truth, int64_t n_samples,
                         int tolerance);

struct MetricRow {
    double accuracy = 0.0;
    double f1 = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double specificity = 0.0;
    double mcc = 0.0;
};

/// Ratio conventions: any 0/0 collapses to 0.
MetricRow derive_metrics(const ConfusionCounts& c);

struct MetricSummary {
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct MetricReport {
    std::string method;
    std::vector<MetricRow> rows;                  // one per record (boxplot points)
    MetricSummary summary[6];                     // accuracy, f1, recall, precision, specificity, mcc
};

extern const char* const kMetricNames[6];

MetricReport aggregate(const std::vector<MetricRow>& rows, const std::string& method);

}  // namespace uct
