#pragma once

#include "uct/waveform.hpp"
#include "uct/wavelet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace uct {

enum class Method { Gradient, Fft, Wavelet, Ann, Svm };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct PacketReading {
    int packet_index = 0;
    AmplitudeReading reading;
    bool used_fallback = false;   // ml path: positive class missing in packet
};

/// Per-record extraction output. Packets that yielded no reading are listed
/// in failed_packets instead of readings.
struct ExtractionOutcome {
    int64_t record_id = 0;
    Method method = Method::Gradient;
    std::vector<PacketReading> readings;
    std::vector<int> failed_packets;
    double projection_value = 0.0;   // (mean packet amplitude)^2

    bool complete(size_t packet_count) const {
        return readings.size() == packet_count && failed_packets.empty();
    }
};

double projection_from_readings(const std::vector<PacketReading>& readings);

/// Indices of local maxima/minima by first-difference sign change; plateaus
/// resolve to their first sample.
struct Extrema {
    std::vector<int> maxima;
    std::vector<int> minima;
};
Extrema find_extrema(const VecRef& samples);

/// Topographic prominence of the local minimum at j (depth below the lower
/// of the two barriers separating it from the nearest deeper samples).
double minimum_prominence(const VecRef& segment, int j);

/// First local minimum after peak whose prominence clears
/// prominence_fraction * (segment peak-to-peak); falls back to the deepest
/// forward minimum when none qualifies.
std::optional<int> forward_trough(const VecRef& segment, int peak, double prominence_fraction);

struct GradientConfig {
    double prominence_fraction = 0.1;
};

struct FftConfig {
    double passband_fraction = 0.4;      // band half-width as a fraction of f0
    double noise_threshold_factor = 5.0; // vs median spectral magnitude
    double min_window_periods = 3.0;
    double prominence_fraction = 0.1;
};

struct WaveletExtractConfig {
    WaveletConfig wavelet;
    double prominence_fraction = 0.1;
    // Half-width of the raw-sample read window, in coefficient scales. The
    // smoothed Shannon energy peaks on the burst flanks (it vanishes where
    // the normalized coefficient hits 1), so the window must reach back to
    // the envelope apex.
    int window_half_scales = 4;
};

ExtractionOutcome extract_gradient(const VecRef& samples, const std::vector<WavePacket>& packets,
                                   const GradientConfig& config = {});

ExtractionOutcome extract_fft(const VecRef& samples, double sample_rate, double signal_frequency,
                              const std::vector<WavePacket>& packets, const FftConfig& config = {});

ExtractionOutcome extract_wavelet(const VecRef& samples, double sample_rate,
                                  double signal_frequency, const std::vector<WavePacket>& packets,
                                  const WaveletExtractConfig& config = {});

}  // namespace uct
