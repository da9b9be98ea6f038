#include "uct/pipeline.hpp"

#include "uct/waveform_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace uct {
namespace {

namespace fs = std::filesystem;

int effective_workers(const PipelineConfig& c) {
    if (c.workers > 0) return c.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 2;
}

class StageTimer {
public:
    explicit StageTimer(std::string stage) : stage_(std::move(stage)) {
        start_ = std::chrono::steady_clock::now();
    }
    ~StageTimer() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        const double sec =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() / 1000.0;
        std::cerr << "stage=" << stage_ << " elapsed_s=" << sec << '\n';
    }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt17(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

fs::path dataset_dir(const PipelineConfig& c) { return fs::path(c.output_dir) / "dataset"; }
fs::path models_dir(const PipelineConfig& c) { return fs::path(c.output_dir) / "models"; }

SegmentationConfig segmentation_config(const PipelineConfig& c) {
    SegmentationConfig sc;
    sc.window_samples = static_cast<int>(
        std::lround(c.synth.burst.burst_duration() * c.synth.sample_rate));
    return sc;
}

struct GateRow {
    int64_t record_id;
    double std_dev;
    bool is_transmission;
};

std::vector<GateRow> read_gate_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string() + " (run the gate stage first)");
    std::string line;
    std::getline(is, line);
    std::vector<GateRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c);
        rows.push_back({std::stoll(a), std::stod(b), c == "1"});
    }
    return rows;
}

struct ExtractRow {
    int64_t record_id;
    int packet_index;
    int peak_index;
    int trough_index;
    double amplitude;
    double projection_value;
};

fs::path extract_csv_path(const PipelineConfig& c, Method m) {
    return fs::path(c.output_dir) / ("extract_" + method_name(m) + ".csv");
}

std::vector<ExtractRow> read_extract_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string() + " (run the extract stage first)");
    std::string line;
    std::getline(is, line);
    std::vector<ExtractRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string f[7];
        for (int i = 0; i < 6; ++i) std::getline(ss, f[i], ',');
        std::getline(ss, f[6]);
        rows.push_back({std::stoll(f[0]), std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4]),
                        std::stod(f[5]), std::stod(f[6])});
    }
    return rows;
}

// record preprocessing shared by the extract stage and training
struct PreparedRecord {
    WaveformRecord raw;
    Vec detrended;
    std::vector<WavePacket> packets;
    bool is_transmission = true;
};

PreparedRecord prepare_record(const fs::path& file, const PipelineConfig& config) {
    PreparedRecord out;
    out.raw = read_record(file, FileFormat::Binary);
    const GateDecision gd = gate_noise(out.raw, config.gate_tau);
    out.is_transmission = gd.is_transmission;
    if (!out.is_transmission) return out;
    out.detrended = detrend(out.raw.samples);
    out.packets = segment_packets(out.detrended, out.raw.sample_rate,
                                  config.geometry.packet_count_min,
                                  config.geometry.packet_count_max,
                                  segmentation_config(config));
    return out;
}

}  // namespace

void parallel_for_index(int total, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, total));
    if (workers == 1) {
        for (int i = 0; i < total; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string message;
    std::mutex mu;
    auto body = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= total || failed.load()) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                failed.store(true);
                if (message.empty()) message = e.what();
            }
        }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (failed.load()) throw Error(message);
}

std::vector<int64_t> training_record_ids(const ScanGeometry& geometry, int count) {
    const int64_t total = static_cast<int64_t>(geometry.rotations) * geometry.translations;
    count = static_cast<int>(std::min<int64_t>(count, total));
    std::vector<int64_t> ids;
    for (int k = 0; k < count; ++k) ids.push_back(k * total / count);
    return ids;
}

void run_generate(const PipelineConfig& config) {
    StageTimer timer("generate");
    config.validate();
    fs::create_directories(config.output_dir);
    const Phantom phantom = make_phantom(config.phantom);
    synth_dataset(phantom, config.geometry, config.synth, dataset_dir(config),
                  effective_workers(config));
    write_image_csv(phantom.image, fs::path(config.output_dir) / "phantom.csv");
    write_pgm(phantom.image, fs::path(config.output_dir) / "phantom.pgm");
    std::cerr << "stage=generate records="
              << config.geometry.rotations * config.geometry.translations << '\n';
}

void run_gate(const PipelineConfig& config) {
    StageTimer timer("gate");
    const DatasetManifest manifest = read_manifest(dataset_dir(config) / "manifest.txt");
    const int total = static_cast<int>(manifest.entries.size());
    std::vector<GateDecision> decisions(total);
    parallel_for_index(total, effective_workers(config), [&](int i) {
        const auto& e = manifest.entries[i];
        const WaveformRecord rec =
            read_record(dataset_dir(config) / e.filename, FileFormat::Binary);
        decisions[i] = gate_noise(rec, config.gate_tau);
        decisions[i].record_id = rec.record_id(manifest.geometry.translations);
    });
    std::ofstream os(fs::path(config.output_dir) / "gate.csv");
    if (!os) throw IoError("cannot write gate.csv");
    os << "record_id,std_dev,is_transmission\n";
    int kept = 0;
    for (const auto& d : decisions) {
        os << d.record_id << ',' << fmt17(d.std_dev) << ',' << (d.is_transmission ? 1 : 0)
           << '\n';
        kept += d.is_transmission ? 1 : 0;
    }
    std::cerr << "stage=gate transmission=" << kept << " noise=" << total - kept << '\n';
}

void run_train(const PipelineConfig& config) {
    StageTimer timer("train");
    const bool want_ann =
        std::count(config.methods.begin(), config.methods.end(), Method::Ann) > 0;
    const bool want_svm =
        std::count(config.methods.begin(), config.methods.end(), Method::Svm) > 0;
    if (!want_ann && !want_svm) {
        std::cerr << "stage=train skipped=1\n";
        return;
    }
    const DatasetManifest manifest = read_manifest(dataset_dir(config) / "manifest.txt");
    const auto labels_all = read_labels_csv(dataset_dir(config) / "labels.csv");
    std::map<int64_t, const GroundTruthLabels*> labels_by_id;
    for (const auto& l : labels_all) labels_by_id[l.record_id] = &l;

    const auto ids = training_record_ids(config.geometry, config.training_records);
    const int n_per = config.synth.record_length;
    Mat features(static_cast<Eigen::Index>(ids.size()) * n_per, 8);
    std::vector<int> labels(ids.size() * n_per, 0);

    FeatureConfig fc = config.features;
    fc.sample_rate = config.synth.sample_rate;

    parallel_for_index(static_cast<int>(ids.size()), effective_workers(config), [&](int k) {
        const int64_t id = ids[k];
        const int r = static_cast<int>(id / config.geometry.translations);
        const int t = static_cast<int>(id % config.geometry.translations);
        char buf[48];
        std::snprintf(buf, sizeof(buf), "rec_r%03d_t%03d.uctw", r, t);
        const WaveformRecord rec = read_record(dataset_dir(config) / buf, FileFormat::Binary);
        const Vec det = detrend(rec.samples);
        features.middleRows(static_cast<Eigen::Index>(k) * n_per, n_per) =
            compute_features(det, fc);
        const auto it = labels_by_id.find(id);
        if (it != labels_by_id.end())
            for (const auto& p : it->second->peaks) labels[k * n_per + p.peak_index] = 1;
    });

    fs::create_directories(models_dir(config));
    if (want_ann) {
        TrainLog log;
        const AnnModel model = train_ann(features, labels, config.training, &log);
        save_ann(model, models_dir(config) / "ann.model");
        write_train_log_csv(log, models_dir(config) / "ann_train_log.csv");
        const auto cv = cross_validate(features, labels, config.training, Method::Ann);
        std::ofstream os(models_dir(config) / "ann_cv.csv");
        os << "fold,tp,tn,fp,fn,accuracy,f1,recall,precision,specificity,mcc\n";
        for (const auto& f : cv)
            os << f.fold << ',' << f.counts.tp << ',' << f.counts.tn << ',' << f.counts.fp
               << ',' << f.counts.fn << ',' << fmt17(f.metrics.accuracy) << ','
               << fmt17(f.metrics.f1) << ',' << fmt17(f.metrics.recall) << ','
               << fmt17(f.metrics.precision) << ',' << fmt17(f.metrics.specificity) << ','
               << fmt17(f.metrics.mcc) << '\n';
    }
    if (want_svm) {
        TrainLog log;
        const SvmModel model = train_svm(features, labels, config.training, &log);
        save_svm(model, models_dir(config) / "svm.model");
        write_train_log_csv(log, models_dir(config) / "svm_train_log.csv");
        const auto cv = cross_validate(features, labels, config.training, Method::Svm);
        std::ofstream os(models_dir(config) / "svm_cv.csv");
        os << "fold,tp,tn,fp,fn,accuracy,f1,recall,precision,specificity,mcc\n";
        for (const auto& f : cv)
            os << f.fold << ',' << f.counts.tp << ',' << f.counts.tn << ',' << f.counts.fp
               << ',' << f.counts.fn << ',' << fmt17(f.metrics.accuracy) << ','
               << fmt17(f.metrics.f1) << ',' << fmt17(f.metrics.recall) << ','
               << fmt17(f.metrics.precision) << ',' << fmt17(f.metrics.specificity) << ','
               << fmt17(f.metrics.mcc) << '\n';
    }
    std::cerr << "stage=train records=" << ids.size() << '\n';
}

void run_extract(const PipelineConfig& config) {
    StageTimer timer("extract");
    const DatasetManifest manifest = read_manifest(dataset_dir(config) / "manifest.txt");
    const int total = static_cast<int>(manifest.entries.size());

    AnnModel ann;
    SvmModel svm;
    for (Method m : config.methods) {
        if (m == Method::Ann)
            ann = load_ann(models_dir(config) / "ann.model");
        else if (m == Method::Svm)
            svm = load_svm(models_dir(config) / "svm.model");
    }
    FeatureConfig fc = config.features;
    fc.sample_rate = config.synth.sample_rate;

    std::vector<std::map<Method, ExtractionOutcome>> outcomes(total);
    std::atomic<int64_t> fallback_packets{0};
    parallel_for_index(total, effective_workers(config), [&](int i) {
        const auto& e = manifest.entries[i];
        PreparedRecord prep =
            prepare_record(dataset_dir(config) / e.filename, config);
        if (!prep.is_transmission) return;   // masked records produce no rows
        const int64_t id = prep.raw.record_id(manifest.geometry.translations);
        for (Method m : config.methods) {
            ExtractionOutcome oc;
            switch (m) {
                case Method::Gradient:
                    oc = extract_gradient(prep.detrended, prep.packets, config.gradient);
                    break;
                case Method::Fft:
                    oc = extract_fft(prep.detrended, prep.raw.sample_rate,
                                     config.geometry.signal_frequency, prep.packets, config.fft);
                    break;
                case Method::Wavelet:
                    oc = extract_wavelet(prep.detrended, prep.raw.sample_rate,
                                         config.geometry.signal_frequency, prep.packets,
                                         config.wavelet);
                    break;
                case Method::Ann:
                    oc = extract_ml(prep.detrended, prep.packets, ann, fc);
                    break;
                case Method::Svm:
                    oc = extract_ml(prep.detrended, prep.packets, svm, fc);
                    break;
            }
            oc.record_id = id;
            for (const auto& r : oc.readings)
                if (r.used_fallback) fallback_packets.fetch_add(1);
            outcomes[i][m] = std::move(oc);
        }
    });

    for (Method m : config.methods) {
        std::ofstream os(extract_csv_path(config, m));
        if (!os) throw IoError("cannot write extract csv");
        os << "record_id,method,packet_index,peak_index,trough_index,amplitude,projection_value\n";
        for (int i = 0; i < total; ++i) {
            const auto it = outcomes[i].find(m);
            if (it == outcomes[i].end()) continue;
            const auto& oc = it->second;
            for (const auto& r : oc.readings)
                os << oc.record_id << ',' << method_name(m) << ',' << r.packet_index << ','
                   << r.reading.peak_index << ',' << r.reading.trough_index << ','
                   << fmt17(r.reading.amplitude) << ',' << fmt17(oc.projection_value) << '\n';
        }
    }
    std::cerr << "stage=extract records=" << total
              << " fallback_packets=" << fallback_packets.load() << '\n';
}

void run_evaluate(const PipelineConfig& config) {
    StageTimer timer("evaluate");
    const auto labels_all = read_labels_csv(dataset_dir(config) / "labels.csv");
    const int n = config.synth.record_length;

    std::ofstream summary(fs::path(config.output_dir) / "metrics_summary.csv");
    summary << "method,metric,mean,median,stddev,q1,q3,min,max\n";
    std::ofstream boxplot(fs::path(config.output_dir) / "metrics_boxplot.csv");
    boxplot << "method,metric,min,q1,median,q3,max\n";

    for (Method m : config.methods) {
        const auto rows = read_extract_csv(extract_csv_path(config, m));
        std::map<int64_t, std::vector<int>> predicted;
        for (const auto& r : rows) predicted[r.record_id].push_back(r.peak_index);

        std::vector<MetricRow> metric_rows;
        std::ofstream os(fs::path(config.output_dir) /
                         ("metrics_" + method_name(m) + ".csv"));
        os << "record_id,method,accuracy,f1,recall,precision,specificity,mcc\n";
        for (const auto& lab : labels_all) {
            const auto it = predicted.find(lab.record_id);
            const std::vector<int> preds =
                it == predicted.end() ? std::vector<int>{} : it->second;
            const ScoreResult sr =
                score_record(preds, lab.peak_indices(), n, config.match_tolerance);
            const MetricRow row = derive_metrics(sr.counts);
            metric_rows.push_back(row);
            os << lab.record_id << ',' << method_name(m) << ',' << fmt17(row.accuracy) << ','
               << fmt17(row.f1) << ',' << fmt17(row.recall) << ',' << fmt17(row.precision)
               << ',' << fmt17(row.specificity) << ',' << fmt17(row.mcc) << '\n';
        }
        const MetricReport report = aggregate(metric_rows, method_name(m));
        for (int k = 0; k < 6; ++k) {
            const auto& s = report.summary[k];
            summary << report.method << ',' << kMetricNames[k] << ',' << fmt17(s.mean) << ','
                    << fmt17(s.median) << ',' << fmt17(s.stddev) << ',' << fmt17(s.q1) << ','
                    << fmt17(s.q3) << ',' << fmt17(s.min) << ',' << fmt17(s.max) << '\n';
            boxplot << report.method << ',' << kMetricNames[k] << ',' << fmt17(s.min) << ','
                    << fmt17(s.q1) << ',' << fmt17(s.median) << ',' << fmt17(s.q3) << ','
                    << fmt17(s.max) << '\n';
        }
    }
    std::cerr << "stage=evaluate methods=" << config.methods.size() << '\n';
}

void run_reconstruct(const PipelineConfig& config) {
    StageTimer timer("reconstruct");
    const DatasetManifest manifest = read_manifest(dataset_dir(config) / "manifest.txt");
    const auto gate_rows = read_gate_csv(fs::path(config.output_dir) / "gate.csv");
    std::map<int64_t, bool> transmission;
    for (const auto& g : gate_rows) transmission[g.record_id] = g.is_transmission;

    const Phantom phantom = make_phantom(config.phantom);
    const Sinogram reference_sino = forward_project(phantom, config.geometry);
    write_sinogram_csv(reference_sino, fs::path(config.output_dir) / "sinogram_phantom.csv");
    const ReconImage phantom_unit = unit_range_normalize(phantom.image);

    std::ofstream rmse_table(fs::path(config.output_dir) / "rmse_table.csv");
    rmse_table << "method,rmse\n";

    const int T = config.geometry.translations;
    for (Method m : config.methods) {
        const auto rows = read_extract_csv(extract_csv_path(config, m));
        std::map<int64_t, double> projection;
        for (const auto& r : rows) projection[r.record_id] = r.projection_value;

        std::vector<RecordProjection> entries;
        double max_proj = 0.0;
        for (const auto& e : manifest.entries) {
            const int64_t id = static_cast<int64_t>(e.rotation) * T + e.translation;
            RecordProjection rp;
            rp.rotation_index = e.rotation;
            rp.translation_index = e.translation;
            const auto it = projection.find(id);
            const auto gt = transmission.find(id);
            rp.valid = it != projection.end() && gt != transmission.end() && gt->second;
            rp.projection_value = rp.valid ? it->second : 0.0;
            max_proj = std::max(max_proj, rp.projection_value);
            entries.push_back(rp);
        }

        AssembleOptions opt;
        opt.mode = SinogramMode::Attenuation;
        opt.attenuation_scale = config.synth.attenuation_scale;
        opt.reference_amplitude =
            config.reference_amplitude > 0.0 ? config.reference_amplitude : std::sqrt(max_proj);
        if (!(opt.reference_amplitude > 0.0))
            throw EmptyDataError("no usable projection for " + method_name(m));

        const Sinogram atten = assemble_sinogram(entries, config.geometry, opt,
                                                 config.phantom.field_of_view_cm);
        AssembleOptions raw_opt = opt;
        raw_opt.mode = SinogramMode::RawSquaredAmplitude;
        const Sinogram raw = assemble_sinogram(entries, config.geometry, raw_opt,
                                               config.phantom.field_of_view_cm);
        write_sinogram_csv(raw, fs::path(config.output_dir) /
                                    ("sinogram_raw_" + method_name(m) + ".csv"));
        write_sinogram_csv(atten, fs::path(config.output_dir) /
                                      ("sinogram_atten_" + method_name(m) + ".csv"));

        const ReconImage recon = reconstruct_fbp(atten);
        const ReconImage recon_unit = unit_range_normalize(recon.image);
        write_image_csv(recon_unit.image,
                        fs::path(config.output_dir) / ("recon_" + method_name(m) + ".csv"));
        write_pgm(recon_unit.image,
                  fs::path(config.output_dir) / ("recon_" + method_name(m) + ".pgm"));
        rmse_table << method_name(m) << ',' << fmt17(rmse(recon_unit, phantom_unit)) << '\n';
    }
    std::cerr << "stage=reconstruct methods=" << config.methods.size() << '\n';
}

void run_report(const PipelineConfig& config) {
    StageTimer timer("report");
    // report consumes only csv artifacts
    const fs::path out(config.output_dir);
    std::ofstream os(out / "report.txt");
    if (!os) throw IoError("cannot write report.txt");

    os << "UCT projection extraction report\n";
    os << "================================\n\n";

    {
        const auto gate_rows = read_gate_csv(out / "gate.csv");
        int kept = 0;
        for (const auto& g : gate_rows) kept += g.is_transmission ? 1 : 0;
        os << "Records: " << gate_rows.size() << " (" << kept << " transmission, "
           << gate_rows.size() - kept << " gated as noise)\n\n";
    }

    std::ifstream summary(out / "metrics_summary.csv");
    if (!summary) throw IoError("metrics_summary.csv missing (run evaluate first)");
    std::map<std::string, std::map<std::string, double>> mean_by_method;
    {
        std::string line;
        std::getline(summary, line);
        while (std::getline(summary, line)) {
            std::istringstream ss(line);
            std::string method, metric, mean;
            std::getline(ss, method, ',');
            std::getline(ss, metric, ',');
            std::getline(ss, mean, ',');
            mean_by_method[method][metric] = std::stod(mean);
        }
    }
    os << "Mean metrics per method\n";
    os << "method";
    for (const char* name : kMetricNames) os << '\t' << name;
    os << '\n';
    for (const auto& [method, metrics] : mean_by_method) {
        os << method;
        for (const char* name : kMetricNames) {
            const auto it = metrics.find(name);
            os << '\t' << (it == metrics.end() ? 0.0 : it->second);
        }
        os << '\n';
    }
    os << '\n';

    // qualitative ordering check (reported, not asserted)
    auto mean_f1 = [&](const char* m) {
        const auto it = mean_by_method.find(m);
        return it == mean_by_method.end() ? -1.0 : it->second.at("f1");
    };
    const double f_fft = mean_f1("fft"), f_grad = mean_f1("gradient"), f_wav = mean_f1("wavelet");
    if (f_fft >= 0 && f_grad >= 0 && f_wav >= 0) {
        os << "Conventional F1 ordering (fft >= gradient >= wavelet): "
           << ((f_fft >= f_grad && f_grad >= f_wav) ? "holds" : "does not hold") << " (fft="
           << f_fft << ", gradient=" << f_grad << ", wavelet=" << f_wav << ")\n\n";
    }

    std::ifstream rmse_table(out / "rmse_table.csv");
    if (rmse_table) {
        os << "Reconstruction RMSE vs phantom (unit range)\n";
        std::string line;
        std::getline(rmse_table, line);
        while (std::getline(rmse_table, line)) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            os << line.substr(0, comma) << '\t' << line.substr(comma + 1) << '\n';
        }
    }
    std::cerr << "stage=report done=1\n";
}

void run_pipeline(const PipelineConfig& config) {
    StageTimer timer("pipeline");
    run_generate(config);
    run_gate(config);
    run_train(config);
    run_extract(config);
    run_evaluate(config);
    run_reconstruct(config);
    run_report(config);
}

}  // namespace uct
