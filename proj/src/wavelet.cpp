#include "uct/wavelet.hpp"

#include <cmath>

namespace uct {
namespace {

// Symlet-5 scaling coefficients (standard published 10-tap table).
constexpr double kSym5RecLo[10] = {
    0.027333068345077982,  0.029519490925774643, -0.039134249302383094,
    0.1993975339773936,    0.7234076904024206,    0.6339789634582119,
    0.01660210576452232,  -0.17532808990845047,  -0.021101834024758855,
    0.019538882735286728};

WaveletFilter make_sym5() {
    WaveletFilter f;
    f.lowpass.resize(10);
    f.highpass.resize(10);
    for (int i = 0; i < 10; ++i) f.lowpass[i] = kSym5RecLo[9 - i];
    for (int i = 0; i < 10; ++i)
        f.highpass[i] = (i % 2 == 0 ? 1.0 : -1.0) * kSym5RecLo[i];
    return f;
}

void dwt_step(const double* x, int n, const WaveletFilter& f, Vec& approx, Vec& detail) {
    // n even: circular convolution downsampled by 2
    const int m = n / 2;
    const int L = static_cast<int>(f.lowpass.size());
    approx.resize(m);
    detail.resize(m);
    for (int k = 0; k < m; ++k) {
        double sa = 0.0, sd = 0.0;
        for (int i = 0; i < L; ++i) {
            const int idx = (2 * k + i) % n;
            sa += f.lowpass[i] * x[idx];
            sd += f.highpass[i] * x[idx];
        }
        approx[k] = sa;
        detail[k] = sd;
    }
}

void idwt_step(const Vec& approx, const Vec& detail, const WaveletFilter& f, double* x, int n) {
    const int m = n / 2;
    const int L = static_cast<int>(f.lowpass.size());
    for (int i = 0; i < n; ++i) x[i] = 0.0;
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < L; ++i) {
            const int idx = (2 * k + i) % n;
            x[idx] += f.lowpass[i] * approx[k] + f.highpass[i] * detail[k];
        }
    }
}

}  // namespace

void WaveletConfig::validate() const {
    if (levels < 1) throw RejectedValueError("wavelet levels must be >= 1");
    if (smoothing_window < 1 || smoothing_window % 2 == 0)
        throw RejectedValueError("smoothing window must be odd and >= 1");
    wavelet_filter(family);
}

const WaveletFilter& wavelet_filter(const std::string& family) {
    static const WaveletFilter sym5 = make_sym5();
    if (family == "sym5") return sym5;
    throw RejectedValueError("unknown wavelet family: " + family);
}

double WaveletPyramid::energy() const {
    double e = approx.squaredNorm();
    for (const auto& d : details) e += d.squaredNorm();
    return e;
}

WaveletPyramid dwt(const VecRef& samples, const WaveletConfig& config) {
    config.validate();
    const int n = static_cast<int>(samples.size());
    if (n < (1 << config.levels))
        throw TooShortError("signal length " + std::to_string(n) +
                            " below 2^levels = " + std::to_string(1 << config.levels));
    const auto& filt = wavelet_filter(config.family);

    WaveletPyramid pyr;
    Vec current = samples;
    for (int level = 0; level < config.levels; ++level) {
        const int len = static_cast<int>(current.size());
        pyr.level_input_lengths.push_back(len);
        const int core = len - (len % 2);
        Vec approx, detail;
        dwt_step(current.data(), core, filt, approx, detail);
        if (len % 2 == 1) {
            approx.conservativeResize(approx.size() + 1);
            approx[approx.size() - 1] = current[len - 1];   // odd tail passes through
        }
        pyr.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    pyr.approx = std::move(current);
    return pyr;
}

Vec idwt(const WaveletPyramid& pyramid, const WaveletConfig& config) {
    config.validate();
    if (pyramid.details.size() != pyramid.level_input_lengths.size())
        throw ShapeError("pyramid level bookkeeping mismatch");
    const auto& filt = wavelet_filter(config.family);

    Vec current = pyramid.approx;
    for (int level = static_cast<int>(pyramid.details.size()) - 1; level >= 0; --level) {
        const int len = pyramid.level_input_lengths[level];
        const int core = len - (len % 2);
        Vec approx = current;
        double tail = 0.0;
        if (len % 2 == 1) {
            tail = approx[approx.size() - 1];
            approx.conservativeResize(approx.size() - 1);
        }
        if (approx.size() != pyramid.details[level].size())
            throw ShapeError("pyramid band length mismatch at level " + std::to_string(level + 1));
        Vec out(len);
        idwt_step(approx, pyramid.details[level], filt, out.data(), core);
        if (len % 2 == 1) out[len - 1] = tail;
        current = std::move(out);
    }
    return current;
}

Vec shannon_energy(const VecRef& coefficients, int smoothing_window) {
    if (smoothing_window < 1 || smoothing_window % 2 == 0)
        throw RejectedValueError("smoothing window must be odd and >= 1");
    const int n = static_cast<int>(coefficients.size());
    Vec energy = Vec::Zero(n);
    const double peak = coefficients.cwiseAbs().maxCoeff();
    if (peak == 0.0) return energy;   // all-zero input stays all-zero
    for (int i = 0; i < n; ++i) {
        const double u = coefficients[i] / peak;
        const double u2 = u * u;
        energy[i] = (u2 == 0.0) ? 0.0 : -u2 * std::log(u2);
    }
    if (smoothing_window == 1) return energy;
    std::vector<double> prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + energy[i];
    Vec smooth(n);
    const int half = smoothing_window / 2;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n, i + half + 1);
        smooth[i] = (prefix[hi] - prefix[lo]) / (hi - lo);
    }
    return smooth;
}

int band_level_for_frequency(double sample_rate, double frequency, int levels) {
    for (int level = 1; level <= levels; ++level) {
        const double hi = sample_rate / std::pow(2.0, level);
        const double lo = sample_rate / std::pow(2.0, level + 1);
        if (frequency >= lo && frequency <= hi) return level;
    }
    throw BandError("signal frequency " + std::to_string(frequency) +
                    " outside every detail band for " + std::to_string(levels) + " levels");
}

}  // namespace uct
