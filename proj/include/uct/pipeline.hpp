#pragma once

#include "uct/config.hpp"

#include <filesystem>
#include <functional>

namespace uct {

/// Stage entry points used by the command-line tool. Each stage reads and
/// writes only the documented artifacts under config.output_dir:
///
///   dataset/            binary records, labels.csv, manifest.txt
///   gate.csv            record_id, std_dev, is_transmission
///   models/             ann.model, svm.model, *_train_log.csv, *_cv.csv
///   extract_<m>.csv     per-packet readings and projection values
///   metrics_<m>.csv     per-record metric rows
///   metrics_summary.csv, metrics_boxplot.csv
///   sinogram_*.csv, recon_<m>.csv/.pgm, rmse_table.csv
///   report.txt
///
/// The pipeline chain runs generate, gate, train, extract, evaluate,
/// reconstruct, report. (Training precedes extraction so the ann/svm
/// extractors have models to run with.)
void run_generate(const PipelineConfig& config);
void run_gate(const PipelineConfig& config);
void run_train(const PipelineConfig& config);
void run_extract(const PipelineConfig& config);
void run_evaluate(const PipelineConfig& config);
void run_reconstruct(const PipelineConfig& config);
void run_report(const PipelineConfig& config);
void run_pipeline(const PipelineConfig& config);

/// Deterministic worker pool: fn(i) for i in [0, total), any schedule.
void parallel_for_index(int total, int workers, const std::function<void(int)>& fn);

/// Evenly spaced record ids used as the training set.
std::vector<int64_t> training_record_ids(const ScanGeometry& geometry, int count);

}  // namespace uct
