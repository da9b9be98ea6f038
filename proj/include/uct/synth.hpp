#pragma once

#include "uct/tomo.hpp"
#include "uct/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace uct {

struct BurstSpec {
    double carrier_frequency = 1.5e6;   // Hz
    double rise_time = 5.2267e-6;       // s (0.49 of the default burst duration)
    double fall_time = 5.2267e-6;       // s
    double duty_cycle = 0.0432;         // excitation metadata; layout uses the PRI below
    int cycles_per_burst = 16;
    double pulse_repetition_interval = 0.0;  // s; 0 = fit packet count into the record

    double burst_duration() const { return cycles_per_burst / carrier_frequency; }
    void validate() const;
};

struct DistortionSpec {
    double probability = 0.0;           // per packet
    double relative_amplitude = 0.2;    // dimple depth vs packet peak-to-trough
    void validate() const;
};

struct SynthConfig {
    BurstSpec burst;
    DistortionSpec distortion;
    int record_length = 50002;
    double sample_rate = 50e6;          // Hz
    double noise_sigma = 2e-5;          // additive Gaussian, voltage units
    double base_amplitude = 1e-3;       // A0: unattenuated carrier peak
    double attenuation_scale = 0.08;    // A = A0 exp(-scale * line integral)
    uint64_t seed = 1;

    void validate() const;
};

struct SynthRecord {
    WaveformRecord record;
    GroundTruthLabels labels;
    double line_integral = 0.0;
    uint64_t derived_seed = 0;
};

/// One ray. The per-record RNG is derived from (seed, rotation, translation),
/// so records are independent of generation order. A ray whose attenuated
/// amplitude underflows to zero produces a noise-only record with no labels.
SynthRecord synth_record(double line_integral, const ScanGeometry& geometry,
                         const SynthConfig& config, int rotation, int translation);

struct ManifestEntry {
    int rotation = 0;
    int translation = 0;
    std::string filename;
    uint64_t seed = 0;
    double line_integral = 0.0;
};

struct DatasetManifest {
    ScanGeometry geometry;
    SynthConfig config;
    std::vector<ManifestEntry> entries;
};

/// Scans the phantom with the tomo module's forward projector and writes one
/// binary record per (rotation, translation), labels.csv and manifest.txt.
DatasetManifest synth_dataset(const Phantom& phantom, const ScanGeometry& geometry,
                              const SynthConfig& config, const std::filesystem::path& out_dir,
                              int workers = 1);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

uint64_t derive_seed(uint64_t master, int rotation, int translation);

}  // namespace uct
