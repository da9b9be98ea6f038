#pragma once

#include "uct/classify.hpp"
#include "uct/extract.hpp"
#include "uct/preprocess.hpp"
#include "uct/synth.hpp"
#include "uct/tomo.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace uct {

/// Single source of truth for a pipeline run. Serializes to one JSON file;
/// unknown keys are rejected on load.
struct PipelineConfig {
    ScanGeometry geometry;
    PhantomSpec phantom;
    SynthConfig synth;
    double gate_tau = 8.6734e-5;
    std::vector<Method> methods = {Method::Gradient, Method::Fft, Method::Wavelet, Method::Ann,
                                   Method::Svm};
    GradientConfig gradient;
    FftConfig fft;
    WaveletExtractConfig wavelet;
    FeatureConfig features;
    TrainConfig training;
    int training_records = 10;
    int match_tolerance = 3;           // samples, for peak scoring
    double reference_amplitude = 0.0;  // 0 = calibrate from the strongest record
    std::string output_dir = "out";
    int workers = 0;                   // 0 = hardware concurrency

    void validate() const;
};

PipelineConfig default_config();
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

}  // namespace uct
