#include "uct/extract.hpp"

#include "uct/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace uct {

std::string method_name(Method m) {
    switch (m) {
        case Method::Gradient: return "gradient";
        case Method::Fft: return "fft";
        case Method::Wavelet: return "wavelet";
        case Method::Ann: return "ann";
        case Method::Svm: return "svm";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "gradient") return Method::Gradient;
    if (name == "fft") return Method::Fft;
    if (name == "wavelet") return Method::Wavelet;
    if (name == "ann") return Method::Ann;
    if (name == "svm") return Method::Svm;
    throw RejectedValueError("unknown method: " + name);
}

double projection_from_readings(const std::vector<PacketReading>& readings) {
    if (readings.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : readings) sum += r.reading.amplitude;
    const double mean = sum / static_cast<double>(readings.size());
    return mean * mean;
}

Extrema find_extrema(const VecRef& x) {
    const int n = static_cast<int>(x.size());
    Extrema out;
    if (n < 3) return out;
    int prev_sign = 0;
    int plateau_start = 0;
    for (int i = 1; i < n; ++i) {
        const double d = x[i] - x[i - 1];
        const int s = (d > 0.0) - (d < 0.0);
        if (s == 0) continue;       // plateau: keep walking, remember where it began
        if (prev_sign > 0 && s < 0) out.maxima.push_back(plateau_start);
        if (prev_sign < 0 && s > 0) out.minima.push_back(plateau_start);
        prev_sign = s;
        plateau_start = i;
    }
    return out;
}

double minimum_prominence(const VecRef& seg, int j) {
    const int n = static_cast<int>(seg.size());
    const double v = seg[j];
    double left = v;
    for (int i = j - 1; i >= 0; --i) {
        if (seg[i] < v) break;
        left = std::max(left, seg[i]);
    }
    double right = v;
    for (int i = j + 1; i < n; ++i) {
        if (seg[i] < v) break;
        right = std::max(right, seg[i]);
    }
    return std::min(left, right) - v;
}

std::optional<int> forward_trough(const VecRef& seg, int peak, double prominence_fraction) {
    const Extrema ex = find_extrema(seg);
    const double range = seg.maxCoeff() - seg.minCoeff();
    std::optional<int> deepest;
    for (int m : ex.minima) {
        if (m <= peak) continue;
        if (minimum_prominence(seg, m) >= prominence_fraction * range) return m;
        if (!deepest || seg[m] < seg[*deepest]) deepest = m;
    }
    return deepest;
}

namespace {

// Window-based reader shared by the fft and wavelet paths: raw-sample argmax
// inside [win_lo, win_hi), then the forward trough searched within the packet.
std::optional<PacketReading> read_window(const VecRef& samples, const WavePacket& packet,
                                         int win_lo, int win_hi, int packet_index,
                                         double prominence_fraction) {
    win_lo = std::max(win_lo, packet.start);
    win_hi = std::min(win_hi, packet.end);
    if (win_hi - win_lo < 1) return std::nullopt;
    int peak = win_lo;
    for (int i = win_lo + 1; i < win_hi; ++i)
        if (samples[i] > samples[peak]) peak = i;

    const auto seg = samples.segment(packet.start, packet.length());
    const auto trough_local = forward_trough(seg, peak - packet.start, prominence_fraction);
    if (!trough_local) return std::nullopt;
    const int trough = packet.start + *trough_local;
    const double amp = samples[peak] - samples[trough];
    if (amp < 0.0) return std::nullopt;
    return PacketReading{packet_index, AmplitudeReading{peak, trough, amp}, false};
}

}  // namespace

ExtractionOutcome extract_gradient(const VecRef& samples, const std::vector<WavePacket>& packets,
                                   const GradientConfig& config) {
    validate_packets(packets, static_cast<int>(samples.size()));
    ExtractionOutcome out;
    out.method = Method::Gradient;
    for (size_t p = 0; p < packets.size(); ++p) {
        const auto seg = samples.segment(packets[p].start, packets[p].length());
        const Extrema ex = find_extrema(seg);
        if (ex.maxima.empty()) {
            out.failed_packets.push_back(static_cast<int>(p));
            continue;
        }
        int peak = ex.maxima.front();
        for (int m : ex.maxima)
            if (seg[m] > seg[peak]) peak = m;
        const auto trough = forward_trough(seg, peak, config.prominence_fraction);
        if (!trough) {
            out.failed_packets.push_back(static_cast<int>(p));
            continue;
        }
        AmplitudeReading r;
        r.peak_index = packets[p].start + peak;
        r.trough_index = packets[p].start + *trough;
        r.amplitude = seg[peak] - seg[*trough];
        out.readings.push_back({static_cast<int>(p), r, false});
    }
    out.projection_value = projection_from_readings(out.readings);
    return out;
}

ExtractionOutcome extract_fft(const VecRef& samples, double sample_rate, double signal_frequency,
                              const std::vector<WavePacket>& packets, const FftConfig& config) {
    validate_packets(packets, static_cast<int>(samples.size()));
    if (!(signal_frequency > 0.0) || signal_frequency >= sample_rate / 2.0)
        throw RejectedValueError("signal frequency must sit below Nyquist");
    const int n = static_cast<int>(samples.size());

    auto spectrum = fft_real_padded(samples.data(), n);
    const size_t nfft = spectrum.size();

    // median magnitude as the noise reference
    std::vector<double> mags(nfft);
    for (size_t i = 0; i < nfft; ++i) mags[i] = std::abs(spectrum[i]);
    std::vector<double> tmp = mags;
    auto* mid = tmp.data() + tmp.size() / 2;
    std::nth_element(tmp.data(), mid, tmp.data() + tmp.size());
    const double threshold = config.noise_threshold_factor * *mid;

    const double bin_hz = sample_rate / static_cast<double>(nfft);
    const double lo_hz = signal_frequency * (1.0 - config.passband_fraction);
    const double hi_hz = signal_frequency * (1.0 + config.passband_fraction);
    size_t kept = 0;
    for (size_t i = 0; i < nfft; ++i) {
        const double f = static_cast<double>(i) * bin_hz;
        const double falias = std::min(f, sample_rate - f);   // mirror bin frequency
        const bool in_band = falias >= lo_hz && falias <= hi_hz;
        if (!in_band || mags[i] < threshold) {
            spectrum[i] = {0.0, 0.0};
        } else {
            ++kept;
        }
    }
    if (kept == 0) throw AllNoiseError("no spectral bin above the noise threshold");

    fft_inplace(spectrum, true);
    Vec filtered(n);
    for (int i = 0; i < n; ++i) filtered[i] = spectrum[i].real();

    const int min_window =
        std::max(3, static_cast<int>(std::lround(config.min_window_periods * sample_rate /
                                                 signal_frequency)));

    ExtractionOutcome out;
    out.method = Method::Fft;
    for (size_t p = 0; p < packets.size(); ++p) {
        const auto& pk = packets[p];
        // greedy shrink toward the filtered-signal maximum while window RMS rises
        int lo = pk.start, hi = pk.end;
        auto window_rms = [&](int a, int b) {
            double acc = 0.0;
            for (int i = a; i < b; ++i) acc += filtered[i] * filtered[i];
            return std::sqrt(acc / std::max(1, b - a));
        };
        double rms = window_rms(lo, hi);
        while (hi - lo > min_window) {
            int center = lo;
            for (int i = lo + 1; i < hi; ++i)
                if (filtered[i] > filtered[center]) center = i;
            int half = std::max(min_window / 2, (hi - lo) / 4);
            int nlo = std::max(pk.start, center - half);
            int nhi = std::min(pk.end, center + half + 1);
            if (nhi - nlo < 3) throw WindowError("optimized window collapsed below 3 samples");
            if (nhi - nlo >= hi - lo) break;
            const double nrms = window_rms(nlo, nhi);
            if (nrms <= rms) break;
            lo = nlo;
            hi = nhi;
            rms = nrms;
        }
        auto reading = read_window(samples, pk, lo, hi, static_cast<int>(p),
                                   config.prominence_fraction);
        if (reading)
            out.readings.push_back(*reading);
        else
            out.failed_packets.push_back(static_cast<int>(p));
    }
    out.projection_value = projection_from_readings(out.readings);
    return out;
}

ExtractionOutcome extract_wavelet(const VecRef& samples, double sample_rate,
                                  double signal_frequency, const std::vector<WavePacket>& packets,
                                  const WaveletExtractConfig& config) {
    validate_packets(packets, static_cast<int>(samples.size()));
    const int level =
        band_level_for_frequency(sample_rate, signal_frequency, config.wavelet.levels);
    const WaveletPyramid pyr = dwt(samples, config.wavelet);
    const Vec energy =
        shannon_energy(pyr.details[level - 1], config.wavelet.smoothing_window);

    const int scale = 1 << level;
    // filter group delay accumulated over `level` stages (10-tap centroid 4.5)
    const int delay = static_cast<int>(std::lround(4.5 * (scale - 1)));
    const int nc = static_cast<int>(energy.size());

    ExtractionOutcome out;
    out.method = Method::Wavelet;
    for (size_t p = 0; p < packets.size(); ++p) {
        const auto& pk = packets[p];
        int clo = std::max(0, (pk.start - delay) / scale);
        int chi = std::min(nc, (pk.end - delay + scale - 1) / scale);
        if (chi <= clo) {
            out.failed_packets.push_back(static_cast<int>(p));
            continue;
        }
        int kc = clo;
        for (int k = clo + 1; k < chi; ++k)
            if (energy[k] > energy[kc]) kc = k;
        const int center = kc * scale + delay + scale / 2;
        const int half = config.window_half_scales * scale;
        const auto reading = read_window(samples, pk, center - half, center + half,
                                         static_cast<int>(p), config.prominence_fraction);
        if (reading)
            out.readings.push_back(*reading);
        else
            out.failed_packets.push_back(static_cast<int>(p));
    }
    out.projection_value = projection_from_readings(out.readings);
    return out;
}

}  // namespace uct
