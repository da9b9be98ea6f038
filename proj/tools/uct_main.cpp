#include "uct/pipeline.hpp"
#include "uct/waveform_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace {

// --flag overrides applied on top of the loaded config file
struct Overrides {
    std::string config_path;
    std::string output_dir;
    int workers = -1;
    int64_t seed = -1;
    double noise_sigma = -1.0;
    double distortion_probability = -1.0;
    double tau = -1.0;
    std::vector<std::string> methods;
};

uct::PipelineConfig resolve_config(const Overrides& ov) {
    uct::PipelineConfig config =
        ov.config_path.empty() ? uct::default_config() : uct::load_config(ov.config_path);
    if (!ov.output_dir.empty()) config.output_dir = ov.output_dir;
    if (ov.workers >= 0) config.workers = ov.workers;
    if (ov.seed >= 0) {
        config.synth.seed = static_cast<uint64_t>(ov.seed);
        config.training.seed = static_cast<uint64_t>(ov.seed);
    }
    if (ov.noise_sigma >= 0.0) config.synth.noise_sigma = ov.noise_sigma;
    if (ov.distortion_probability >= 0.0)
        config.synth.distortion.probability = ov.distortion_probability;
    if (ov.tau > 0.0) config.gate_tau = ov.tau;
    if (!ov.methods.empty()) {
        config.methods.clear();
        for (const auto& name : ov.methods) config.methods.push_back(uct::method_from_name(name));
    }
    config.validate();
    return config;
}

// ad-hoc single-record extraction, prints readings to stdout
int extract_single(const uct::PipelineConfig& config, const std::string& record_path,
                   const std::string& method_name_str) {
    const uct::Method method = uct::method_from_name(method_name_str);
    const auto format = record_path.size() > 4 &&
                                record_path.substr(record_path.size() - 4) == ".txt"
                            ? uct::FileFormat::Text
                            : uct::FileFormat::Binary;
    const uct::WaveformRecord rec = uct::read_record(record_path, format);
    const uct::GateDecision gd = uct::gate_noise(rec, config.gate_tau);
    if (!gd.is_transmission) {
        std::cerr << "record gated as noise (std=" << gd.std_dev << ")\n";
        return 1;
    }
    const uct::Vec det = uct::detrend(rec.samples);
    uct::SegmentationConfig sc;
    sc.window_samples = static_cast<int>(
        std::lround(config.synth.burst.burst_duration() * config.synth.sample_rate));
    const auto packets =
        uct::segment_packets(det, rec.sample_rate, config.geometry.packet_count_min,
                             config.geometry.packet_count_max, sc);
    uct::ExtractionOutcome oc;
    switch (method) {
        case uct::Method::Gradient:
            oc = uct::extract_gradient(det, packets, config.gradient);
            break;
        case uct::Method::Fft:
            oc = uct::extract_fft(det, rec.sample_rate, config.geometry.signal_frequency,
                                  packets, config.fft);
            break;
        case uct::Method::Wavelet:
            oc = uct::extract_wavelet(det, rec.sample_rate, config.geometry.signal_frequency,
                                      packets, config.wavelet);
            break;
        default:
            std::cerr << "single-record extraction supports the conventional methods\n";
            return 1;
    }
    std::cout << "packet_index,peak_index,trough_index,amplitude\n";
    for (const auto& r : oc.readings)
        std::cout << r.packet_index << ',' << r.reading.peak_index << ','
                  << r.reading.trough_index << ',' << r.reading.amplitude << '\n';
    std::cout << "projection_value," << oc.projection_value << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ultrasound-CT transmission amplitude extraction toolkit"};
    app.require_subcommand(1);

    Overrides ov;
    app.add_option("--config", ov.config_path, "pipeline config file (json)");
    app.add_option("-o,--output", ov.output_dir, "output directory override");
    app.add_option("-j,--workers", ov.workers, "worker thread count override");
    app.add_option("--seed", ov.seed, "master seed override");
    app.add_option("--noise-sigma", ov.noise_sigma, "synthetic noise sigma override");
    app.add_option("--distortion-probability", ov.distortion_probability,
                   "per-packet distortion probability override");
    app.add_option("--tau", ov.tau, "gate threshold override");
    app.add_option("--method", ov.methods, "method selection (repeatable)");

    auto* c_generate = app.add_subcommand("generate", "synthesize the scan dataset");
    auto* c_gate = app.add_subcommand("gate", "classify records as transmission or noise");
    auto* c_extract = app.add_subcommand("extract", "extract amplitude readings");
    std::string single_record;
    std::string single_method = "gradient";
    c_extract->add_option("--record", single_record,
                          "extract a single record file and print readings");
    auto* c_train = app.add_subcommand("train", "train the ann and svm classifiers");
    auto* c_evaluate = app.add_subcommand("evaluate", "score extractions against labels");
    auto* c_reconstruct =
        app.add_subcommand("reconstruct", "assemble sinograms and reconstruct");
    auto* c_report = app.add_subcommand("report", "summarize csv artifacts");
    auto* c_pipeline = app.add_subcommand("pipeline", "run every stage in order");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;   // usage errors exit 2
    }

    std::string stage = "config";
    try {
        const uct::PipelineConfig config = resolve_config(ov);
        if (c_extract->parsed() && !single_record.empty()) {
            stage = "extract";
            const std::string m = ov.methods.empty() ? single_method : ov.methods.front();
            return extract_single(config, single_record, m);
        }
        if (c_generate->parsed()) { stage = "generate"; uct::run_generate(config); }
        else if (c_gate->parsed()) { stage = "gate"; uct::run_gate(config); }
        else if (c_extract->parsed()) { stage = "extract"; uct::run_extract(config); }
        else if (c_train->parsed()) { stage = "train"; uct::run_train(config); }
        else if (c_evaluate->parsed()) { stage = "evaluate"; uct::run_evaluate(config); }
        else if (c_reconstruct->parsed()) { stage = "reconstruct"; uct::run_reconstruct(config); }
        else if (c_report->parsed()) { stage = "report"; uct::run_report(config); }
        else if (c_pipeline->parsed()) {
            stage = "pipeline";
            std::filesystem::create_directories(config.output_dir);
            uct::save_config(config, std::filesystem::path(config.output_dir) / "config.json");
            uct::run_pipeline(config);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: stage=" << stage << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
