#pragma once

#include "uct/extract.hpp"
#include "uct/types.hpp"
#include "uct/waveform.hpp"

#include <filesystem>
#include <vector>

namespace uct {

struct PhantomSpec {
    double outer_diameter_cm = 2.4;
    double inner_diameter_cm = 1.2;
    double outer_value = 1.0;    // steel, relative attenuation
    double inner_value = 0.4;    // aluminium
    double field_of_view_cm = 4.8;
    int grid = 40;
    int edge_supersampling = 8;  // partial-volume averaging; 1 = pixel-center rule

    double pixel_size() const { return field_of_view_cm / grid; }
    void validate() const;
};

struct Phantom {
    Mat image;          // grid x grid, row = y
    double pixel_size = 0.12;
    double field_of_view = 4.8;
};

Phantom make_phantom(const PhantomSpec& spec);

struct Sinogram {
    Mat values;                         // rotations x translations
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
    double translation_spacing = 0.12;  // cm
    double field_of_view = 4.8;

    int rotations() const { return static_cast<int>(values.rows()); }
    int translations() const { return static_cast<int>(values.cols()); }
    double angle_rad(int r) const { return M_PI * r / rotations(); }
    double offset_cm(int t) const {
        return (t - (translations() - 1) / 2.0) * translation_spacing;
    }
};

/// Line integrals over the phantom grid: bilinear interpolation sampled at
/// quarter-pixel steps along each ray.
Sinogram forward_project(const Phantom& phantom, const ScanGeometry& geometry);

enum class SinogramMode { RawSquaredAmplitude, Attenuation };

struct AssembleOptions {
    SinogramMode mode = SinogramMode::Attenuation;
    double reference_amplitude = 1.0;  // unattenuated peak-to-trough reading
    double attenuation_scale = 1.0;    // generator exponent scale; entry = -ln(A^2/A0^2)/(2*scale)
};

struct RecordProjection {
    int rotation_index = 0;
    int translation_index = 0;
    double projection_value = 0.0;   // squared mean packet amplitude
    bool valid = true;               // false when gated as noise or extraction failed
};

Sinogram assemble_sinogram(const std::vector<RecordProjection>& results,
                           const ScanGeometry& geometry, const AssembleOptions& options,
                           double field_of_view_cm);

struct ReconImage {
    Mat image;
    bool unit_range = false;
};

/// Ramp-filtered back-projection onto a grid of translations x translations
/// pixels; masked sinogram entries contribute zero with per-pixel weight
/// renormalization.
ReconImage reconstruct_fbp(const Sinogram& sinogram);

/// Clamps negatives to zero and scales the maximum to 1 (attenuation images
/// are physically non-negative). All-nonpositive input maps to all zeros.
ReconImage unit_range_normalize(const Mat& image);

double rmse(const ReconImage& a, const ReconImage& b);

void write_sinogram_csv(const Sinogram& s, const std::filesystem::path& path);
Sinogram read_sinogram_csv(const std::filesystem::path& path, double field_of_view_cm);
void write_image_csv(const Mat& image, const std::filesystem::path& path);
void write_pgm(const Mat& image, const std::filesystem::path& path);

}  // namespace uct
