#pragma once

#include "uct/types.hpp"

#include <string>
#include <vector>

namespace uct {

struct WaveletConfig {
    int levels = 6;
    std::string family = "sym5";
    int smoothing_window = 9;   // odd, >= 1

    void validate() const;
};

/// Decomposition filter pair (orthonormal). Only sym5 ships; the tag keeps
/// the config explicit about what ran.
struct WaveletFilter {
    Vec lowpass;
    Vec highpass;
};

const WaveletFilter& wavelet_filter(const std::string& family);

/// details[l] holds level l+1 detail coefficients; approx is the deepest
/// approximation band. level_input_lengths[l] is the signal length each
/// level consumed (needed to invert the odd-length handling).
struct WaveletPyramid {
    std::vector<Vec> details;
    Vec approx;
    std::vector<int> level_input_lengths;

    double energy() const;
};

/// Periodized orthogonal DWT. Odd-length levels pass their trailing sample
/// into the approximation band unchanged, which keeps the transform exactly
/// orthogonal and the approximation lengths on the ceil(n/2) recursion.
WaveletPyramid dwt(const VecRef& samples, const WaveletConfig& config);
Vec idwt(const WaveletPyramid& pyramid, const WaveletConfig& config);

/// -u^2 ln(u^2) of the max-normalized input, then a centered moving average
/// (window truncated at the edges).
Vec shannon_energy(const VecRef& coefficients, int smoothing_window);

/// 1-based detail level whose dyadic band [fs/2^(L+1), fs/2^L] contains f.
int band_level_for_frequency(double sample_rate, double frequency, int levels);

}  // namespace uct
