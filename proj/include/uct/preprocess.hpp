#pragma once

#include "uct/waveform.hpp"

#include <cstdint>
#include <vector>

namespace uct {

struct GateDecision {
    int64_t record_id = 0;
    double std_dev = 0.0;
    double threshold = 0.0;
    bool is_transmission = false;   // std_dev > threshold, strictly
};

/// Population (1/n) standard deviation against the threshold tau.
/// std == tau classifies as noise (strict inequality).
GateDecision gate_noise(const WaveformRecord& record, double tau);

/// Removes the least-squares straight-line fit. Result has zero mean and
/// zero least-squares slope.
Vec detrend(const VecRef& samples);

struct SegmentationConfig {
    // Moving-RMS window; 0 derives one burst duration from the expected layout.
    int window_samples = 0;
    double threshold_factor = 4.0;     // enter at k * noise floor
    double exit_ratio = 0.5;           // leave at k * exit_ratio * floor
    double min_envelope_fraction = 0.05;  // lower bound on the enter level, vs envelope max
};

/// Splits a detrended record into per-burst spans. Strategy 1 is a moving-RMS
/// envelope with hysteresis; if the detected count falls outside
/// [expected_min, expected_max], falls back to equal division using the
/// in-range count whose division boundaries cross the least energy.
std::vector<WavePacket> segment_packets(const VecRef& samples, double sample_rate,
                                        int expected_min, int expected_max,
                                        const SegmentationConfig& config = {});

}  // namespace uct
