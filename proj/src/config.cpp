#include "uct/config.hpp"

#include <json.hpp>

#include <fstream>

namespace uct {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& scope, const std::set<std::string>& known) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.count(key))
            throw ConfigError("unknown config key '" + scope + key + "'");
    }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void PipelineConfig::validate() const {
    geometry.validate();
    phantom.validate();
    synth.validate();
    if (!(gate_tau > 0.0)) throw ConfigError("gate tau must be > 0");
    if (methods.empty()) throw ConfigError("at least one method must be selected");
    features.validate();
    training.validate();
    wavelet.wavelet.validate();
    if (training_records < 1) throw ConfigError("training_records must be >= 1");
    if (match_tolerance < 0) throw ConfigError("match_tolerance must be >= 0");
    if (reference_amplitude < 0.0) throw ConfigError("reference_amplitude must be >= 0");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (synth.sample_rate != features.sample_rate)
        throw ConfigError("features.sample_rate must match synth.sample_rate");
}

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }

    PipelineConfig c;
    check_keys(j, "",
               {"geometry", "phantom", "synth", "gate", "methods", "extract", "features",
                "training", "sinogram", "output_dir", "workers", "match_tolerance"});

    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        check_keys(g, "geometry.",
                   {"rotations", "translations", "signal_frequency", "packet_count_min",
                    "packet_count_max"});
        maybe(g, "rotations", c.geometry.rotations);
        maybe(g, "translations", c.geometry.translations);
        maybe(g, "signal_frequency", c.geometry.signal_frequency);
        maybe(g, "packet_count_min", c.geometry.packet_count_min);
        maybe(g, "packet_count_max", c.geometry.packet_count_max);
    }
    if (j.contains("phantom")) {
        const auto& p = j["phantom"];
        check_keys(p, "phantom.",
                   {"outer_diameter_cm", "inner_diameter_cm", "outer_value", "inner_value",
                    "field_of_view_cm", "grid", "edge_supersampling"});
        maybe(p, "outer_diameter_cm", c.phantom.outer_diameter_cm);
        maybe(p, "inner_diameter_cm", c.phantom.inner_diameter_cm);
        maybe(p, "outer_value", c.phantom.outer_value);
        maybe(p, "inner_value", c.phantom.inner_value);
        maybe(p, "field_of_view_cm", c.phantom.field_of_view_cm);
        maybe(p, "grid", c.phantom.grid);
        maybe(p, "edge_supersampling", c.phantom.edge_supersampling);
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        check_keys(s, "synth.",
                   {"record_length", "sample_rate", "noise_sigma", "base_amplitude",
                    "attenuation_scale", "seed", "burst", "distortion"});
        maybe(s, "record_length", c.synth.record_length);
        maybe(s, "sample_rate", c.synth.sample_rate);
        maybe(s, "noise_sigma", c.synth.noise_sigma);
        maybe(s, "base_amplitude", c.synth.base_amplitude);
        maybe(s, "attenuation_scale", c.synth.attenuation_scale);
        maybe(s, "seed", c.synth.seed);
        if (s.contains("burst")) {
            const auto& b = s["burst"];
            check_keys(b, "synth.burst.",
                       {"carrier_frequency", "rise_time", "fall_time", "duty_cycle",
                        "cycles_per_burst", "pulse_repetition_interval"});
            maybe(b, "carrier_frequency", c.synth.burst.carrier_frequency);
            maybe(b, "rise_time", c.synth.burst.rise_time);
            maybe(b, "fall_time", c.synth.burst.fall_time);
            maybe(b, "duty_cycle", c.synth.burst.duty_cycle);
            maybe(b, "cycles_per_burst", c.synth.burst.cycles_per_burst);
            maybe(b, "pulse_repetition_interval", c.synth.burst.pulse_repetition_interval);
        }
        if (s.contains("distortion")) {
            const auto& d = s["distortion"];
            check_keys(d, "synth.distortion.", {"probability", "relative_amplitude"});
            maybe(d, "probability", c.synth.distortion.probability);
            maybe(d, "relative_amplitude", c.synth.distortion.relative_amplitude);
        }
    }
    if (j.contains("gate")) {
        const auto& g = j["gate"];
        check_keys(g, "gate.", {"tau"});
        maybe(g, "tau", c.gate_tau);
    }
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& name : j["methods"]) c.methods.push_back(method_from_name(name));
    }
    if (j.contains("extract")) {
        const auto& e = j["extract"];
        check_keys(e, "extract.", {"prominence_fraction", "fft", "wavelet"});
        if (e.contains("prominence_fraction")) {
            const double p = e["prominence_fraction"].get<double>();
            c.gradient.prominence_fraction = p;
            c.fft.prominence_fraction = p;
            c.wavelet.prominence_fraction = p;
        }
        if (e.contains("fft")) {
            const auto& f = e["fft"];
            check_keys(f, "extract.fft.",
                       {"passband_fraction", "noise_threshold_factor", "min_window_periods"});
            maybe(f, "passband_fraction", c.fft.passband_fraction);
            maybe(f, "noise_threshold_factor", c.fft.noise_threshold_factor);
            maybe(f, "min_window_periods", c.fft.min_window_periods);
        }
        if (e.contains("wavelet")) {
            const auto& w = e["wavelet"];
            check_keys(w, "extract.wavelet.", {"levels", "family", "smoothing_window"});
            maybe(w, "levels", c.wavelet.wavelet.levels);
            maybe(w, "family", c.wavelet.wavelet.family);
            maybe(w, "smoothing_window", c.wavelet.wavelet.smoothing_window);
        }
    }
    if (j.contains("features")) {
        const auto& f = j["features"];
        check_keys(f, "features.",
                   {"neighborhood", "f7_absolute", "mfcc_frame", "mfcc_filters", "mfcc_stride"});
        maybe(f, "neighborhood", c.features.neighborhood);
        maybe(f, "f7_absolute", c.features.f7_absolute);
        maybe(f, "mfcc_frame", c.features.mfcc_frame);
        maybe(f, "mfcc_filters", c.features.mfcc_filters);
        maybe(f, "mfcc_stride", c.features.mfcc_stride);
    }
    if (j.contains("training")) {
        const auto& t = j["training"];
        check_keys(t, "training.",
                   {"batch_size", "epochs", "majority_cost", "minority_cost", "folds",
                    "validation_fraction", "hidden_units", "learning_rate", "svm_learning_rate",
                    "svm_regularization", "seed", "records"});
        maybe(t, "batch_size", c.training.batch_size);
        maybe(t, "epochs", c.training.epochs);
        maybe(t, "majority_cost", c.training.majority_cost);
        maybe(t, "minority_cost", c.training.minority_cost);
        maybe(t, "folds", c.training.folds);
        maybe(t, "validation_fraction", c.training.validation_fraction);
        maybe(t, "hidden_units", c.training.hidden_units);
        maybe(t, "learning_rate", c.training.learning_rate);
        maybe(t, "svm_learning_rate", c.training.svm_learning_rate);
        maybe(t, "svm_regularization", c.training.svm_regularization);
        maybe(t, "seed", c.training.seed);
        maybe(t, "records", c.training_records);
    }
    if (j.contains("sinogram")) {
        const auto& s = j["sinogram"];
        check_keys(s, "sinogram.", {"reference_amplitude"});
        maybe(s, "reference_amplitude", c.reference_amplitude);
    }
    maybe(j, "output_dir", c.output_dir);
    maybe(j, "workers", c.workers);
    maybe(j, "match_tolerance", c.match_tolerance);

    c.features.sample_rate = c.synth.sample_rate;
    c.validate();
    return c;
}

void save_config(const PipelineConfig& c, const std::filesystem::path& path) {
    json j;
    j["geometry"] = {{"rotations", c.geometry.rotations},
                     {"translations", c.geometry.translations},
                     {"signal_frequency", c.geometry.signal_frequency},
                     {"packet_count_min", c.geometry.packet_count_min},
                     {"packet_count_max", c.geometry.packet_count_max}};
    j["phantom"] = {{"outer_diameter_cm", c.phantom.outer_diameter_cm},
                    {"inner_diameter_cm", c.phantom.inner_diameter_cm},
                    {"outer_value", c.phantom.outer_value},
                    {"inner_value", c.phantom.inner_value},
                    {"field_of_view_cm", c.phantom.field_of_view_cm},
                    {"grid", c.phantom.grid},
                    {"edge_supersampling", c.phantom.edge_supersampling}};
    j["synth"] = {{"record_length", c.synth.record_length},
                  {"sample_rate", c.synth.sample_rate},
                  {"noise_sigma", c.synth.noise_sigma},
                  {"base_amplitude", c.synth.base_amplitude},
                  {"attenuation_scale", c.synth.attenuation_scale},
                  {"seed", c.synth.seed},
                  {"burst",
                   {{"carrier_frequency", c.synth.burst.carrier_frequency},
                    {"rise_time", c.synth.burst.rise_time},
                    {"fall_time", c.synth.burst.fall_time},
                    {"duty_cycle", c.synth.burst.duty_cycle},
                    {"cycles_per_burst", c.synth.burst.cycles_per_burst},
                    {"pulse_repetition_interval", c.synth.burst.pulse_repetition_interval}}},
                  {"distortion",
                   {{"probability", c.synth.distortion.probability},
                    {"relative_amplitude", c.synth.distortion.relative_amplitude}}}};
    j["gate"] = {{"tau", c.gate_tau}};
    json methods = json::array();
    for (Method m : c.methods) methods.push_back(method_name(m));
    j["methods"] = methods;
    j["extract"] = {{"prominence_fraction", c.gradient.prominence_fraction},
                    {"fft",
                     {{"passband_fraction", c.fft.passband_fraction},
                      {"noise_threshold_factor", c.fft.noise_threshold_factor},
                      {"min_window_periods", c.fft.min_window_periods}}},
                    {"wavelet",
                     {{"levels", c.wavelet.wavelet.levels},
                      {"family", c.wavelet.wavelet.family},
                      {"smoothing_window", c.wavelet.wavelet.smoothing_window}}}};
    j["features"] = {{"neighborhood", c.features.neighborhood},
                     {"f7_absolute", c.features.f7_absolute},
                     {"mfcc_frame", c.features.mfcc_frame},
                     {"mfcc_filters", c.features.mfcc_filters},
                     {"mfcc_stride", c.features.mfcc_stride}};
    j["training"] = {{"batch_size", c.training.batch_size},
                     {"epochs", c.training.epochs},
                     {"majority_cost", c.training.majority_cost},
                     {"minority_cost", c.training.minority_cost},
                     {"folds", c.training.folds},
                     {"validation_fraction", c.training.validation_fraction},
                     {"hidden_units", c.training.hidden_units},
                     {"learning_rate", c.training.learning_rate},
                     {"svm_learning_rate", c.training.svm_learning_rate},
                     {"svm_regularization", c.training.svm_regularization},
                     {"seed", c.training.seed},
                     {"records", c.training_records}};
    j["sinogram"] = {{"reference_amplitude", c.reference_amplitude}};
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    j["match_tolerance"] = c.match_tolerance;

    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << j.dump(2) << '\n';
}

}  // namespace uct
