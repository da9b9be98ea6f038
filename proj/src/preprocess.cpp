#include "uct/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace uct {

GateDecision gate_noise(const WaveformRecord& record, double tau) {
    record.validate();
    if (!(tau > 0.0)) throw RejectedValueError("gate threshold must be > 0");
    const double mean = record.samples.mean();
    const double var = (record.samples.array() - mean).square().mean();
    GateDecision d;
    d.std_dev = std::sqrt(var);
    d.threshold = tau;
    d.is_transmission = d.std_dev > tau;
    return d;
}

Vec detrend(const VecRef& samples) {
    const Eigen::Index n = samples.size();
    if (n < 2) throw TooShortError("detrend needs at least 2 samples");
    const double tbar = 0.5 * static_cast<double>(n - 1);
    const double xbar = samples.mean();
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - tbar;
        num += dt * (samples[i] - xbar);
        den += dt * dt;
    }
    const double slope = num / den;
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out[i] = samples[i] - (xbar + slope * (static_cast<double>(i) - tbar));
    return out;
}

namespace {

// Moving RMS over a centered window via a prefix sum of x^2.
Vec moving_rms(const VecRef& x, int w) {
    const int n = static_cast<int>(x.size());
    std::vector<double> prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
    Vec env(n);
    const int half = w / 2;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n, i + half + 1);
        env[i] = std::sqrt((prefix[hi] - prefix[lo]) / (hi - lo));
    }
    return env;
}

double median_of(Vec v) {
    auto* b = v.data();
    auto* m = b + v.size() / 2;
    std::nth_element(b, m, b + v.size());
    return *m;
}

std::vector<WavePacket> envelope_regions(const Vec& env, double enter, double exit, int pad,
                                         int n) {
    std::vector<WavePacket> regions;
    bool inside = false;
    int start = 0;
    for (int i = 0; i < n; ++i) {
        if (!inside && env[i] > enter) {
            inside = true;
            start = i;
        } else if (inside && env[i] < exit) {
            inside = false;
            regions.push_back({start, i});
        }
    }
    if (inside) regions.push_back({start, n});
    // grow by the envelope smear and merge anything that now touches
    std::vector<WavePacket> merged;
    for (auto r : regions) {
        r.start = std::max(0, r.start - pad);
        r.end = std::min(n, r.end + pad);
        if (!merged.empty() && r.start <= merged.back().end)
            merged.back().end = std::max(merged.back().end, r.end);
        else
            merged.push_back(r);
    }
    return merged;
}

// Energy that equal division boundaries would cut through; used to pick the
// fallback count.
double boundary_crossing_energy(const VecRef& x, int count, int margin) {
    const int n = static_cast<int>(x.size());
    double acc = 0.0;
    for (int b = 1; b < count; ++b) {
        const int c = static_cast<int>(static_cast<int64_t>(n) * b / count);
        const int lo = std::max(0, c - margin);
        const int hi = std::min(n, c + margin);
        for (int i = lo; i < hi; ++i) acc += x[i] * x[i];
    }
    return acc;
}

}  // namespace

std::vector<WavePacket> segment_packets(const VecRef& samples, double sample_rate,
                                        int expected_min, int expected_max,
                                        const SegmentationConfig& config) {
    const int n = static_cast<int>(samples.size());
    if (n < 16) throw TooShortError("record too short to segment");
    if (!(sample_rate > 0.0)) throw RejectedValueError("sample_rate must be > 0");
    if (expected_min < 1 || expected_max < expected_min)
        throw RejectedValueError("invalid expected packet count range");

    int w = config.window_samples;
    if (w <= 0) w = std::max(32, n / (expected_max * 12));  // ~ one burst duration
    w = std::min(w, n / 2);

    const Vec env = moving_rms(samples, w);
    const double env_max = env.maxCoeff();
    if (env_max <= 0.0) throw SegmentationError("segmentation found 0 packets (count 0)");

    const double floor = median_of(env);
    const double enter = std::max(config.threshold_factor * floor,
                                  config.min_envelope_fraction * env_max);
    const double exit = enter * config.exit_ratio;

    std::vector<WavePacket> packets = envelope_regions(env, enter, exit, w / 2, n);
    const int detected = static_cast<int>(packets.size());
    if (detected >= expected_min && detected <= expected_max) return packets;

    if (detected == 0)
        throw SegmentationError("segmentation found 0 packets (count 0)");

    // strategy 2: equal division, choosing the in-range count whose internal
    // boundaries cut the least energy
    int best_count = expected_min;
    double best_energy = std::numeric_limits<double>::infinity();
    for (int count = expected_min; count <= expected_max; ++count) {
        const double e = boundary_crossing_energy(samples, count, std::max(8, w / 8));
        if (e < best_energy) {
            best_energy = e;
            best_count = count;
        }
    }
    std::vector<WavePacket> divided;
    for (int b = 0; b < best_count; ++b) {
        const int lo = static_cast<int>(static_cast<int64_t>(n) * b / best_count);
        const int hi = static_cast<int>(static_cast<int64_t>(n) * (b + 1) / best_count);
        divided.push_back({lo, hi});
    }
    return divided;
}

}  // namespace uct
