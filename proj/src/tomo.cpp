#include "uct/tomo.hpp"

#include "uct/fft.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

namespace uct {

void PhantomSpec::validate() const {
    if (!(inner_diameter_cm >= 0.0) || !(inner_diameter_cm < outer_diameter_cm))
        throw GeometryError("inner diameter must be in [0, outer diameter)");
    if (!(outer_diameter_cm <= field_of_view_cm))
        throw GeometryError("phantom must fit inside the field of view");
    if (grid < 2) throw GeometryError("grid must be at least 2");
    if (edge_supersampling < 1) throw GeometryError("edge supersampling must be >= 1");
    if (outer_value < 0.0 || inner_value < 0.0)
        throw RejectedValueError("attenuation values must be >= 0");
}

Phantom make_phantom(const PhantomSpec& spec) {
    spec.validate();
    const int n = spec.grid;
    const double pix = spec.pixel_size();
    const double half_fov = spec.field_of_view_cm / 2.0;
    const double r_outer = spec.outer_diameter_cm / 2.0;
    const double r_inner = spec.inner_diameter_cm / 2.0;
    const int ss = spec.edge_supersampling;

    Phantom ph;
    ph.pixel_size = pix;
    ph.field_of_view = spec.field_of_view_cm;
    ph.image = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int sj = 0; sj < ss; ++sj) {
                for (int si = 0; si < ss; ++si) {
                    const double x = (i + (si + 0.5) / ss) * pix - half_fov;
                    const double y = (j + (sj + 0.5) / ss) * pix - half_fov;
                    const double r = std::hypot(x, y);
                    if (r <= r_inner)
                        acc += spec.inner_value;
                    else if (r <= r_outer)
                        acc += spec.outer_value;
                }
            }
            ph.image(j, i) = acc / (ss * ss);
        }
    }
    return ph;
}

namespace {

double bilinear(const Mat& img, double fx, double fy) {
    // fx, fy in pixel coordinates (pixel centers at integers)
    const int n = static_cast<int>(img.rows());
    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    double acc = 0.0;
    for (int dj = 0; dj <= 1; ++dj) {
        for (int di = 0; di <= 1; ++di) {
            const int ii = i0 + di, jj = j0 + dj;
            if (ii < 0 || ii >= n || jj < 0 || jj >= n) continue;
            const double w = (1.0 - std::abs(fx - ii)) * (1.0 - std::abs(fy - jj));
            acc += w * img(jj, ii);
        }
    }
    return acc;
}

}  // namespace

Sinogram forward_project(const Phantom& phantom, const ScanGeometry& geometry) {
    geometry.validate();
    const int R = geometry.rotations;
    const int T = geometry.translations;
    const int n = static_cast<int>(phantom.image.rows());
    const double fov = phantom.field_of_view;
    const double pix = phantom.pixel_size;
    const double spacing = fov / T;

    Sinogram s;
    s.values = Mat::Zero(R, T);
    s.valid.setConstant(R, T, true);
    s.translation_spacing = spacing;
    s.field_of_view = fov;

    const double step = pix / 4.0;
    const double ray_len = fov * 1.5;
    const int nsteps = static_cast<int>(ray_len / step);
    for (int r = 0; r < R; ++r) {
        const double theta = M_PI * r / R;
        const double ct = std::cos(theta), st = std::sin(theta);
        for (int t = 0; t < T; ++t) {
            const double off = (t - (T - 1) / 2.0) * spacing;
            double acc = 0.0;
            for (int k = 0; k < nsteps; ++k) {
                const double along = (k + 0.5) * step - ray_len / 2.0;
                const double x = off * ct - along * st;
                const double y = off * st + along * ct;
                const double fx = (x + fov / 2.0) / pix - 0.5;
                const double fy = (y + fov / 2.0) / pix - 0.5;
                acc += bilinear(phantom.image, fx, fy);
            }
            s.values(r, t) = acc * step;
        }
    }
    return s;
}

Sinogram assemble_sinogram(const std::vector<RecordProjection>& results,
                           const ScanGeometry& geometry, const AssembleOptions& options,
                           double field_of_view_cm) {
    geometry.validate();
    const int R = geometry.rotations;
    const int T = geometry.translations;
    Sinogram s;
    s.values = Mat::Zero(R, T);
    s.valid.setConstant(R, T, false);
    s.translation_spacing = field_of_view_cm / T;
    s.field_of_view = field_of_view_cm;

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen(R, T);
    seen.setConstant(false);
    for (const auto& res : results) {
        if (res.rotation_index < 0 || res.rotation_index >= R || res.translation_index < 0 ||
            res.translation_index >= T)
            throw GeometryError("projection entry outside scan geometry");
        if (seen(res.rotation_index, res.translation_index))
            throw DuplicateEntryError("duplicate entry at rotation " +
                                      std::to_string(res.rotation_index) + ", translation " +
                                      std::to_string(res.translation_index));
        seen(res.rotation_index, res.translation_index) = true;
        if (!res.valid) continue;   // masked: value 0, excluded from weighting

        double value = 0.0;
        if (options.mode == SinogramMode::RawSquaredAmplitude) {
            value = res.projection_value;
        } else {
            const double ref2 = options.reference_amplitude * options.reference_amplitude;
            if (!(res.projection_value > 0.0) || !(ref2 > 0.0)) continue;  // mask unusable rays
            value = -std::log(res.projection_value / ref2) /
                    (2.0 * options.attenuation_scale);
        }
        s.values(res.rotation_index, res.translation_index) = value;
        s.valid(res.rotation_index, res.translation_index) = true;
    }
    return s;
}

ReconImage reconstruct_fbp(const Sinogram& sino) {
    const int R = sino.rotations();
    const int T = sino.translations();
    if (!sino.valid.any()) throw EmptyDataError("every sinogram entry is masked");

    // band-limited ramp kernel, length 2T+1, wrapped into a padded buffer
    const size_t pad = next_pow2(static_cast<size_t>(4 * T));
    std::vector<std::complex<double>> kernel(pad, {0.0, 0.0});
    const double d = sino.translation_spacing;
    {
        std::vector<double> h(2 * T + 1, 0.0);
        h[T] = 1.0 / (4.0 * d * d);
        for (int k = -T; k <= T; ++k) {
            if (k % 2 != 0) h[T + k] = -1.0 / std::pow(M_PI * k * d, 2);
        }
        for (int k = 0; k <= T; ++k) kernel[k] = {h[T + k], 0.0};
        for (int k = 1; k <= T; ++k) kernel[pad - k] = {h[T - k], 0.0};
    }
    fft_inplace(kernel, false);

    const int N = T;
    const double pix = sino.field_of_view / N;
    Mat image = Mat::Zero(N, N);
    Mat weight = Mat::Zero(N, N);

    std::vector<std::complex<double>> prof(pad);
    for (int r = 0; r < R; ++r) {
        for (size_t i = 0; i < pad; ++i) prof[i] = {0.0, 0.0};
        for (int t = 0; t < T; ++t)
            prof[t] = {sino.valid(r, t) ? sino.values(r, t) : 0.0, 0.0};
        fft_inplace(prof, false);
        for (size_t i = 0; i < pad; ++i) prof[i] *= kernel[i];
        fft_inplace(prof, true);

        const double theta = sino.angle_rad(r);
        const double ct = std::cos(theta), st = std::sin(theta);
        for (int j = 0; j < N; ++j) {
            const double y = (j + 0.5) * pix - sino.field_of_view / 2.0;
            for (int i = 0; i < N; ++i) {
                const double x = (i + 0.5) * pix - sino.field_of_view / 2.0;
                const double tt = (x * ct + y * st) / d + (T - 1) / 2.0;
                const int t0 = static_cast<int>(std::floor(tt));
                const double frac = tt - t0;
                // out-of-detector terms count as valid zeros; only masked
                // entries reduce the renormalization weight
                double v = 0.0, w = 1.0;
                if (t0 >= 0 && t0 < T) {
                    v += (1.0 - frac) * prof[t0].real();
                    if (!sino.valid(r, t0)) w -= (1.0 - frac);
                }
                if (t0 + 1 >= 0 && t0 + 1 < T) {
                    v += frac * prof[t0 + 1].real();
                    if (!sino.valid(r, t0 + 1)) w -= frac;
                }
                image(j, i) += v;
                weight(j, i) += w;
            }
        }
    }
    // masked entries carry weight 0; renormalize by the observed fraction
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            image(j, i) *= (weight(j, i) > 0.0) ? (M_PI / weight(j, i)) : 0.0;
    ReconImage out;
    out.image = std::move(image);
    out.unit_range = false;
    return out;
}

ReconImage unit_range_normalize(const Mat& image) {
    ReconImage out;
    out.image = image.cwiseMax(0.0);
    const double hi = out.image.maxCoeff();
    if (hi > 0.0)
        out.image /= hi;
    else
        out.image.setZero();
    out.unit_range = true;
    return out;
}

double rmse(const ReconImage& a, const ReconImage& b) {
    if (a.image.rows() != b.image.rows() || a.image.cols() != b.image.cols())
        throw ShapeError("rmse needs equal image dimensions");
    return std::sqrt((a.image - b.image).array().square().mean());
}

void write_sinogram_csv(const Sinogram& s, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    char buf[64];
    for (int r = 0; r < s.rotations(); ++r) {
        for (int t = 0; t < s.translations(); ++t) {
            if (t) os.put(',');
            if (!s.valid(r, t)) {
                os << "NA";
            } else {
                auto res = std::to_chars(buf, buf + sizeof(buf), s.values(r, t),
                                         std::chars_format::general, 17);
                os.write(buf, res.ptr - buf);
            }
        }
        os.put('\n');
    }
    if (!os) throw IoError("write failed for " + path.string());
}

Sinogram read_sinogram_csv(const std::filesystem::path& path, double field_of_view_cm) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::vector<std::vector<std::string>> cells;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(tok);
        cells.push_back(std::move(row));
    }
    if (cells.empty()) throw FormatError("empty sinogram csv: " + path.string());
    const int R = static_cast<int>(cells.size());
    const int T = static_cast<int>(cells[0].size());
    Sinogram s;
    s.values = Mat::Zero(R, T);
    s.valid.setConstant(R, T, false);
    s.translation_spacing = field_of_view_cm / T;
    s.field_of_view = field_of_view_cm;
    for (int r = 0; r < R; ++r) {
        if (static_cast<int>(cells[r].size()) != T)
            throw FormatError("ragged sinogram csv: " + path.string());
        for (int t = 0; t < T; ++t) {
            if (cells[r][t] == "NA") continue;
            s.values(r, t) = std::stod(cells[r][t]);
            s.valid(r, t) = true;
        }
    }
    return s;
}

void write_image_csv(const Mat& image, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    char buf[64];
    for (Eigen::Index j = 0; j < image.rows(); ++j) {
        for (Eigen::Index i = 0; i < image.cols(); ++i) {
            if (i) os.put(',');
            auto res = std::to_chars(buf, buf + sizeof(buf), image(j, i),
                                     std::chars_format::general, 17);
            os.write(buf, res.ptr - buf);
        }
        os.put('\n');
    }
}

void write_pgm(const Mat& image, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    const double lo = image.minCoeff();
    const double hi = image.maxCoeff();
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    os << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
    for (Eigen::Index j = 0; j < image.rows(); ++j)
        for (Eigen::Index i = 0; i < image.cols(); ++i)
            os.put(static_cast<char>(
                static_cast<unsigned char>(std::lround((image(j, i) - lo) * scale))));
    if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace uct
