#pragma once

#include "uct/extract.hpp"
#include "uct/features.hpp"
#include "uct/metrics.hpp"
#include "uct/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace uct {

struct TrainConfig {
    int batch_size = 100;
    int epochs = 50;
    double majority_cost = 0.004;
    double minority_cost = 1.0;
    int folds = 5;
    double validation_fraction = 0.2;
    int hidden_units = 16;
    double learning_rate = 1e-3;      // adam step (ann)
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double svm_learning_rate = 1e-2;
    double svm_regularization = 1e-4;
    uint64_t seed = 1;

    void validate() const;
};

/// Per-feature standardization learned from the training set and stored with
/// the model.
struct FeatureScaler {
    Vec mean = Vec::Zero(8);
    Vec stddev = Vec::Ones(8);

    Vec apply(const Vec& x) const { return (x - mean).cwiseQuotient(stddev); }
    static FeatureScaler fit(const Mat& features);
};

/// 8 -> hidden (sigmoid) -> 2, with sigmoid outputs normalized to sum 1.
struct AnnModel {
    Mat w1, w2;
    Vec b1, b2;
    FeatureScaler scaler;

    /// probability of the positive class for one raw feature row
    double positive_probability(const Vec& features) const;
    void validate() const;
};

struct SvmModel {
    Vec weights = Vec::Zero(8);
    double bias = 0.0;
    FeatureScaler scaler;

    double decision(const Vec& features) const;
};

struct EpochStats {
    int epoch = 0;
    double weighted_loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
};

AnnModel train_ann(const Mat& features, const std::vector<int>& labels,
                   const TrainConfig& config, TrainLog* log = nullptr);

/// Mean class-weighted cross-entropy of the model on a labeled set.
double ann_weighted_loss(const AnnModel& model, const Mat& features,
                         const std::vector<int>& labels, double cost0, double cost1);

SvmModel train_svm(const Mat& features, const std::vector<int>& labels,
                   const TrainConfig& config, TrainLog* log = nullptr);

struct FoldResult {
    int fold = 0;
    ConfusionCounts counts;
    MetricRow metrics;
};

/// Stratified k-fold over the validation slice (a seeded sample of
/// validation_fraction of the data).
std::vector<FoldResult> cross_validate(const Mat& features, const std::vector<int>& labels,
                                       const TrainConfig& config, Method kind);

/// Scores every sample; within each packet the positive-classified sample
/// with the highest score becomes the peak (raw packet maximum as a flagged
/// fallback when no positive exists).
template <typename ModelT>
ExtractionOutcome extract_ml(const VecRef& samples, const std::vector<WavePacket>& packets,
                             const ModelT& model, const FeatureConfig& feature_config);

template <>
ExtractionOutcome extract_ml<AnnModel>(const VecRef& samples,
                                       const std::vector<WavePacket>& packets,
                                       const AnnModel& model, const FeatureConfig& feature_config);
template <>
ExtractionOutcome extract_ml<SvmModel>(const VecRef& samples,
                                       const std::vector<WavePacket>& packets,
                                       const SvmModel& model, const FeatureConfig& feature_config);

void save_ann(const AnnModel& model, const std::filesystem::path& path);
AnnModel load_ann(const std::filesystem::path& path);
void save_svm(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm(const std::filesystem::path& path);

void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path);

}  // namespace uct
