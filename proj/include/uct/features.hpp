#pragma once

#include "uct/types.hpp"

namespace uct {

struct FeatureConfig {
    int neighborhood = 25;      // m: half-width for f2/f7/f8
    bool f7_absolute = false;   // printed formula uses the signed neighborhood max
    int mfcc_frame = 256;
    int mfcc_filters = 26;
    int mfcc_stride = 16;       // f5 held constant between frame centers
    double sample_rate = 50e6;

    void validate() const;
};

/// Eight features per sample, column k = feature k+1. Zero denominators fall
/// back to 0 so finite input always yields finite features.
Mat compute_features(const VecRef& samples, const FeatureConfig& config = {});

/// First mel-cepstral coefficient per frame center (f5 backend, exposed for
/// the oracle tests).
Vec mfcc_first_coefficient(const VecRef& samples, const FeatureConfig& config);

}  // namespace uct
