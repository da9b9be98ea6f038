#include "uct/synth.hpp"

#include "uct/waveform_io.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace uct {

void BurstSpec::validate() const {
    if (!(carrier_frequency > 0.0)) throw RejectedValueError("carrier must be > 0");
    if (rise_time < 0.0 || fall_time < 0.0)
        throw RejectedValueError("rise/fall times must be >= 0");
    if (cycles_per_burst < 1) throw RejectedValueError("cycles per burst must be >= 1");
    if (!(duty_cycle > 0.0) || duty_cycle > 1.0)
        throw RejectedValueError("duty cycle must be in (0, 1]");
    if (rise_time + fall_time >= burst_duration())
        throw LayoutError("rise + fall must be shorter than the burst");
}

void DistortionSpec::validate() const {
    if (probability < 0.0 || probability > 1.0)
        throw RejectedValueError("distortion probability must be in [0, 1]");
    if (!(relative_amplitude > 0.0) || relative_amplitude >= 1.0)
        throw RejectedValueError("distortion relative amplitude must be in (0, 1)");
}

void SynthConfig::validate() const {
    burst.validate();
    distortion.validate();
    if (record_length < 16) throw RejectedValueError("record length too short");
    if (!(sample_rate > 0.0)) throw RejectedValueError("sample rate must be > 0");
    if (burst.carrier_frequency >= sample_rate / 2.0)
        throw RejectedValueError("carrier must sit below Nyquist");
    if (noise_sigma < 0.0) throw RejectedValueError("noise sigma must be >= 0");
    if (!(base_amplitude > 0.0)) throw RejectedValueError("base amplitude must be > 0");
    if (!(attenuation_scale > 0.0)) throw RejectedValueError("attenuation scale must be > 0");
}

uint64_t derive_seed(uint64_t master, int rotation, int translation) {
    // splitmix64 over the packed key
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(rotation) * 65536ULL +
                                                   static_cast<uint64_t>(translation) + 1ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SynthRecord synth_record(double line_integral, const ScanGeometry& geometry,
                         const SynthConfig& config, int rotation, int translation) {
    geometry.validate();
    config.validate();
    if (line_integral < 0.0) throw RejectedValueError("line integral must be >= 0");

    const int n = config.record_length;
    const double fs = config.sample_rate;
    const double f0 = config.burst.carrier_frequency;

    SynthRecord out;
    out.line_integral = line_integral;
    out.derived_seed = derive_seed(config.seed, rotation, translation);
    out.record.sample_rate = fs;
    out.record.rotation_index = rotation;
    out.record.translation_index = translation;
    out.record.samples = Vec::Zero(n);
    out.labels.record_id =
        static_cast<int64_t>(rotation) * geometry.translations + translation;

    std::mt19937_64 rng(out.derived_seed);
    std::uniform_int_distribution<int> count_dist(geometry.packet_count_min,
                                                  geometry.packet_count_max);
    const int packet_count = count_dist(rng);

    const int burst_len = static_cast<int>(std::lround(config.burst.burst_duration() * fs));
    int pri = config.burst.pulse_repetition_interval > 0.0
                  ? static_cast<int>(std::lround(config.burst.pulse_repetition_interval * fs))
                  : n / packet_count;
    if (burst_len > pri || packet_count * pri > n)
        throw LayoutError("burst does not fit the pulse repetition interval");

    const double amplitude = config.base_amplitude *
                             std::exp(-config.attenuation_scale * line_integral);
    Vec& x = out.record.samples;

    if (amplitude > 0.0) {
        const double rise_n = config.burst.rise_time * fs;
        const double fall_n = config.burst.fall_time * fs;
        const double period = fs / f0;
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        for (int b = 0; b < packet_count; ++b) {
            const int start = b * pri + (pri - burst_len) / 2;
            const bool distort = config.distortion.probability > 0.0 &&
                                 unit(rng) < config.distortion.probability;
            // trapezoid envelope times the carrier
            int apex = start;
            for (int t = 0; t < burst_len; ++t) {
                double env = 1.0;
                if (rise_n > 0.0) env = std::min(env, t / rise_n);
                if (fall_n > 0.0) env = std::min(env, (burst_len - 1 - t) / fall_n);
                env = std::max(env, 0.0);
                x[start + t] = amplitude * env * std::sin(2.0 * M_PI * f0 / fs * t);
                if (x[start + t] > x[apex]) apex = start + t;
            }
            if (distort) {
                // sharp dimple a quarter period after the main peak: adds the
                // small additional trough/peak pair without unseating the peak
                const int c = apex + static_cast<int>(std::lround(period / 4.0));
                const int w = std::max(2, static_cast<int>(std::lround(period / 16.0)));
                double lo = x[start], hi = x[start];
                for (int t = start; t < start + burst_len; ++t) {
                    lo = std::min(lo, x[t]);
                    hi = std::max(hi, x[t]);
                }
                const double depth = config.distortion.relative_amplitude * (hi - lo);
                for (int t = std::max(start, c - w);
                     t <= std::min(start + burst_len - 1, c + w); ++t) {
                    const double u = std::cos(M_PI * (t - c) / (2.0 * w));
                    x[t] -= depth * u * u;
                }
                apex = start;
                for (int t = start; t < start + burst_len; ++t)
                    if (x[t] > x[apex]) apex = t;
            }
            if (apex + 1 >= start + burst_len) continue;  // degenerate burst, no forward trough
            int trough = apex + 1;
            for (int t = apex + 1; t < start + burst_len; ++t)
                if (x[t] < x[trough]) trough = t;
            out.labels.peaks.push_back(LabeledPeak{apex, trough, x[apex] - x[trough]});
        }
    }

    if (config.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, config.noise_sigma);
        for (int i = 0; i < n; ++i) x[i] += noise(rng);
    }
    return out;
}

namespace {

std::string record_filename(int rotation, int translation) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "rec_r%03d_t%03d.uctw", rotation, translation);
    return buf;
}

}  // namespace

DatasetManifest synth_dataset(const Phantom& phantom, const ScanGeometry& geometry,
                              const SynthConfig& config, const std::filesystem::path& out_dir,
                              int workers) {
    geometry.validate();
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string());

    const Sinogram integrals = forward_project(phantom, geometry);

    DatasetManifest manifest;
    manifest.geometry = geometry;
    manifest.config = config;
    manifest.entries.resize(static_cast<size_t>(geometry.rotations) * geometry.translations);
    std::vector<GroundTruthLabels> labels(manifest.entries.size());

    const int total = geometry.rotations * geometry.translations;
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mu;

    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= total || failed.load()) return;
            const int r = k / geometry.translations;
            const int t = k % geometry.translations;
            try {
                SynthRecord sr = synth_record(integrals.values(r, t), geometry, config, r, t);
                const std::string name = record_filename(r, t);
                write_record(sr.record, out_dir / name, FileFormat::Binary);
                manifest.entries[k] = {r, t, name, sr.derived_seed, sr.line_integral};
                labels[k] = std::move(sr.labels);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mu);
                failed.store(true);
                if (error_message.empty()) error_message = e.what();
            }
        }
    };
    const int nthreads = std::max(1, workers);
    std::vector<std::thread> threads;
    for (int i = 0; i < nthreads; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
    if (failed.load()) throw IoError("dataset generation failed: " + error_message);

    write_labels_csv(out_dir / "labels.csv", labels);
    write_manifest(manifest, out_dir / "manifest.txt");
    return manifest;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    char buf[64];
    auto num = [&](double v) {
        auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
        return std::string(buf, r.ptr);
    };
    os << "uct_manifest v1\n";
    os << "rotations: " << m.geometry.rotations << '\n';
    os << "translations: " << m.geometry.translations << '\n';
    os << "signal_frequency: " << num(m.geometry.signal_frequency) << '\n';
    os << "packet_count_min: " << m.geometry.packet_count_min << '\n';
    os << "packet_count_max: " << m.geometry.packet_count_max << '\n';
    os << "record_length: " << m.config.record_length << '\n';
    os << "sample_rate: " << num(m.config.sample_rate) << '\n';
    os << "noise_sigma: " << num(m.config.noise_sigma) << '\n';
    os << "base_amplitude: " << num(m.config.base_amplitude) << '\n';
    os << "attenuation_scale: " << num(m.config.attenuation_scale) << '\n';
    os << "carrier_frequency: " << num(m.config.burst.carrier_frequency) << '\n';
    os << "rise_time: " << num(m.config.burst.rise_time) << '\n';
    os << "fall_time: " << num(m.config.burst.fall_time) << '\n';
    os << "duty_cycle: " << num(m.config.burst.duty_cycle) << '\n';
    os << "cycles_per_burst: " << m.config.burst.cycles_per_burst << '\n';
    os << "pulse_repetition_interval: " << num(m.config.burst.pulse_repetition_interval) << '\n';
    os << "distortion_probability: " << num(m.config.distortion.probability) << '\n';
    os << "distortion_relative_amplitude: " << num(m.config.distortion.relative_amplitude)
       << '\n';
    os << "seed: " << m.config.seed << '\n';
    os << "records:\n";
    for (const auto& e : m.entries)
        os << e.rotation << ' ' << e.translation << ' ' << e.filename << ' ' << e.seed << ' '
           << num(e.line_integral) << '\n';
    if (!os) throw IoError("write failed for " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    if (line != "uct_manifest v1") throw FormatError("bad manifest header");
    DatasetManifest m;
    while (std::getline(is, line)) {
        if (line == "records:") break;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw FormatError("bad manifest line: " + line);
        const std::string key = line.substr(0, colon);
        const std::string val = line.substr(colon + 2);
        if (key == "rotations") m.geometry.rotations = std::stoi(val);
        else if (key == "translations") m.geometry.translations = std::stoi(val);
        else if (key == "signal_frequency") m.geometry.signal_frequency = std::stod(val);
        else if (key == "packet_count_min") m.geometry.packet_count_min = std::stoi(val);
        else if (key == "packet_count_max") m.geometry.packet_count_max = std::stoi(val);
        else if (key == "record_length") m.config.record_length = std::stoi(val);
        else if (key == "sample_rate") m.config.sample_rate = std::stod(val);
        else if (key == "noise_sigma") m.config.noise_sigma = std::stod(val);
        else if (key == "base_amplitude") m.config.base_amplitude = std::stod(val);
        else if (key == "attenuation_scale") m.config.attenuation_scale = std::stod(val);
        else if (key == "carrier_frequency") m.config.burst.carrier_frequency = std::stod(val);
        else if (key == "rise_time") m.config.burst.rise_time = std::stod(val);
        else if (key == "fall_time") m.config.burst.fall_time = std::stod(val);
        else if (key == "duty_cycle") m.config.burst.duty_cycle = std::stod(val);
        else if (key == "cycles_per_burst") m.config.burst.cycles_per_burst = std::stoi(val);
        else if (key == "pulse_repetition_interval")
            m.config.burst.pulse_repetition_interval = std::stod(val);
        else if (key == "distortion_probability")
            m.config.distortion.probability = std::stod(val);
        else if (key == "distortion_relative_amplitude")
            m.config.distortion.relative_amplitude = std::stod(val);
        else if (key == "seed") m.config.seed = std::stoull(val);
        else throw FormatError("unknown manifest key: " + key);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        ManifestEntry e;
        if (!(ss >> e.rotation >> e.translation >> e.filename >> e.seed >> e.line_integral))
            throw FormatError("bad manifest record line: " + line);
        m.entries.push_back(std::move(e));
    }
    return m;
}

}  // namespace uct
