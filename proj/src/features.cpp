#include "uct/features.hpp"

#include "uct/extract.hpp"
#include "uct/fft.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace uct {
namespace {

constexpr double kLogFloor = 1e-30;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

void FeatureConfig::validate() const {
    if (neighborhood < 1) throw RejectedValueError("neighborhood m must be >= 1");
    if (mfcc_frame < 8 || (mfcc_frame & (mfcc_frame - 1)) != 0)
        throw RejectedValueError("mfcc frame must be a power of two >= 8");
    if (mfcc_filters < 2) throw RejectedValueError("mfcc needs at least 2 filters");
    if (mfcc_stride < 1) throw RejectedValueError("mfcc stride must be >= 1");
    if (!(sample_rate > 0.0)) throw RejectedValueError("sample_rate must be > 0");
}

Vec mfcc_first_coefficient(const VecRef& samples, const FeatureConfig& config) {
    config.validate();
    const int n = static_cast<int>(samples.size());
    const int frame = config.mfcc_frame;
    const int nbins = frame / 2 + 1;
    const int nfilt = config.mfcc_filters;

    // triangular mel filterbank over [0, fs/2]
    std::vector<double> edges(nfilt + 2);
    const double mel_hi = hz_to_mel(config.sample_rate / 2.0);
    for (int j = 0; j < nfilt + 2; ++j)
        edges[j] = mel_to_hz(mel_hi * j / (nfilt + 1)) / (config.sample_rate / 2.0) * (nbins - 1);

    std::vector<double> window(frame);
    for (int i = 0; i < frame; ++i)
        window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (frame - 1));

    const int ncenters = (n + config.mfcc_stride - 1) / config.mfcc_stride;
    Vec out(ncenters);
    std::vector<std::complex<double>> buf(frame);
    std::vector<double> power(nbins);
    for (int c = 0; c < ncenters; ++c) {
        const int center = c * config.mfcc_stride;
        for (int i = 0; i < frame; ++i) {
            const int idx = center - frame / 2 + i;
            const double v = (idx >= 0 && idx < n) ? samples[idx] : 0.0;
            buf[i] = {v * window[i], 0.0};
        }
        fft_inplace(buf, false);
        for (int k = 0; k < nbins; ++k) power[k] = std::norm(buf[k]);

        double c0 = 0.0;
        for (int j = 0; j < nfilt; ++j) {
            const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
            double e = 0.0;
            for (int k = static_cast<int>(std::ceil(lo)); k <= static_cast<int>(hi) && k < nbins;
                 ++k) {
                if (k < 0) continue;
                double w = 0.0;
                if (k <= mid && mid > lo)
                    w = (k - lo) / (mid - lo);
                else if (k > mid && hi > mid)
                    w = (hi - k) / (hi - mid);
                if (w > 0.0) e += w * power[k];
            }
            c0 += std::log(std::max(e, kLogFloor));   // DCT-II coefficient 0
        }
        out[c] = c0;
    }
    return out;
}

Mat compute_features(const VecRef& x, const FeatureConfig& config) {
    config.validate();
    const int n = static_cast<int>(x.size());
    const int m = config.neighborhood;
    if (n <= 2 * m) throw TooShortError("need more than 2m samples for features");

    Mat features = Mat::Zero(n, 8);

    // Y(i): displacement of the first extremum after i
    const Extrema ex = find_extrema(x);
    std::vector<int> all;
    all.reserve(ex.maxima.size() + ex.minima.size());
    std::merge(ex.maxima.begin(), ex.maxima.end(), ex.minima.begin(), ex.minima.end(),
               std::back_inserter(all));
    Vec y = Vec::Zero(n);
    {
        int e = 0;
        for (int i = 0; i < n; ++i) {
            while (e < static_cast<int>(all.size()) && all[e] <= i) ++e;
            y[i] = (e < static_cast<int>(all.size())) ? x[all[e]] : 0.0;
        }
    }

    // prefix sums of |x| and of raw f1 for the windowed ratios
    std::vector<double> pabs(n + 1, 0.0);
    for (int i = 0; i < n; ++i) pabs[i + 1] = pabs[i] + std::abs(x[i]);
    const double total_abs = pabs[n];

    Vec f1_raw(n);
    for (int i = 0; i < n; ++i) f1_raw[i] = std::abs(std::abs(x[i]) - std::abs(y[i]));
    const double f1_max = f1_raw.maxCoeff();

    std::vector<double> pf1(n + 1, 0.0);
    for (int i = 0; i < n; ++i) pf1[i + 1] = pf1[i] + f1_raw[i];

    const Vec c0 = mfcc_first_coefficient(x, config);

    std::vector<char> is_max(n, 0);
    for (int i : ex.maxima) is_max[i] = 1;

    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - m);
        const int hi = std::min(n - 1, i + m);

        if (f1_max > 0.0) features(i, 0) = f1_raw[i] / f1_max;

        const double wsum = pabs[hi + 1] - pabs[lo];
        if (wsum > 0.0) features(i, 1) = std::abs(x[i]) * 2.0 * m / wsum;

        features(i, 2) = is_max[i] ? 1.0 : 0.0;

        if (total_abs > 0.0) features(i, 3) = std::abs(x[i]) * n / total_abs;

        features(i, 4) = c0[i / config.mfcc_stride];

        if (y[i] != 0.0) features(i, 5) = x[i] / std::abs(y[i]);

        double wmax = config.f7_absolute ? std::abs(x[lo]) : x[lo];
        for (int k = lo + 1; k <= hi; ++k)
            wmax = std::max(wmax, config.f7_absolute ? std::abs(x[k]) : x[k]);
        if (wmax != 0.0) features(i, 6) = (config.f7_absolute ? std::abs(x[i]) : x[i]) / wmax;

        // the f1 normalization constant cancels in the ratio
        const double f1sum = pf1[hi + 1] - pf1[lo];
        if (f1sum > 0.0) features(i, 7) = f1_raw[i] * 2.0 * m / f1sum;
    }
    return features;
}

}  // namespace uct
