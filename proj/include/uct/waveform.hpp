#pragma once

#include "uct/types.hpp"

#include <cstdint>
#include <vector>

namespace uct {

/// One acquisition file: the sampled trace plus its scan position.
/// Immutable after construction; validate() enforces the invariants.
struct WaveformRecord {
    Vec samples;
    double sample_rate = 50e6;   // Hz
    int rotation_index = 0;
    int translation_index = 0;

    void validate() const;
    int64_t record_id(int translations) const {
        return static_cast<int64_t>(rotation_index) * translations + translation_index;
    }
};

struct ScanGeometry {
    int rotations = 40;
    int translations = 40;
    double signal_frequency = 1.5e6;        // Hz
    int packet_count_min = 7;
    int packet_count_max = 8;

    void validate() const;
};

/// Half-open sample-index span [start, end) of one tone burst.
struct WavePacket {
    int start = 0;
    int end = 0;

    int length() const { return end - start; }
    bool contains(int idx) const { return idx >= start && idx < end; }
};

/// Validates span bounds, ordering and disjointness in O(n).
void validate_packets(const std::vector<WavePacket>& packets, int record_length);

struct AmplitudeReading {
    int peak_index = 0;
    int trough_index = 0;
    double amplitude = 0.0;     // samples[peak] - samples[trough], >= 0
};

/// Recomputes the amplitude from the samples and checks the reading contract.
void validate_reading(const AmplitudeReading& r, const Vec& samples);

/// Per-packet truth emitted by the synthetic scanner.
struct LabeledPeak {
    int peak_index = 0;
    int trough_index = 0;
    double true_amplitude = 0.0;    // peak-to-trough of the clean signal
};

struct GroundTruthLabels {
    int64_t record_id = 0;
    std::vector<LabeledPeak> peaks;

    std::vector<int> peak_indices() const {
        std::vector<int> out;
        out.reserve(peaks.size());
        for (const auto& p : peaks) out.push_back(p.peak_index);
        return out;
    }
};

}  // namespace uct
