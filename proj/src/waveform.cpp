#include "uct/waveform.hpp"

#include <cmath>

namespace uct {

void WaveformRecord::validate() const {
    if (samples.size() == 0) throw EmptyRecordError("record has no samples");
    if (!(sample_rate > 0.0)) throw RejectedValueError("sample_rate must be > 0");
    if (rotation_index < 0 || translation_index < 0)
        throw RejectedValueError("scan indices must be non-negative");
    if (!samples.allFinite())
        throw RejectedValueError("record contains NaN or Inf samples");
}

void ScanGeometry::validate() const {
    if (rotations <= 0 || translations <= 0)
        throw GeometryError("rotation and translation counts must be positive");
    if (!(signal_frequency > 0.0))
        throw RejectedValueError("signal_frequency must be > 0");
    if (packet_count_min < 1 || packet_count_max < packet_count_min)
        throw RejectedValueError("invalid packet count range");
}

void validate_packets(const std::vector<WavePacket>& packets, int record_length) {
    int prev_end = 0;
    for (const auto& p : packets) {
        if (p.start < 0 || p.end > record_length || p.start >= p.end)
            throw RejectedValueError("packet span out of bounds");
        if (p.start < prev_end)
            throw RejectedValueError("packets overlap or are unordered");
        prev_end = p.end;
    }
}

void validate_reading(const AmplitudeReading& r, const Vec& samples) {
    const int n = static_cast<int>(samples.size());
    if (r.peak_index < 0 || r.peak_index >= n || r.trough_index < 0 || r.trough_index >= n)
        throw RejectedValueError("reading index out of range");
    if (r.trough_index <= r.peak_index)
        throw RejectedValueError("trough must lie forward of peak");
    const double amp = samples[r.peak_index] - samples[r.trough_index];
    if (amp < 0.0)
        throw RejectedValueError("peak value below trough value");
    if (std::abs(amp - r.amplitude) > 1e-12 * std::max(1.0, std::abs(amp)))
        throw RejectedValueError("stored amplitude does not match samples");
}

}  // namespace uct
