#include "uct/classify.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace uct {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_two_classes(const std::vector<int>& labels) {
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 0) has0 = true;
        else if (y == 1) has1 = true;
        else throw RejectedValueError("labels must be 0 or 1");
    }
    if (!has0 || !has1)
        throw DegenerateLabelsError("training needs at least one sample of each class");
}

std::vector<size_t> shuffled_indices(size_t n, std::mt19937_64& rng) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

void write_vec(std::ostream& os, const char* key, const double* v, size_t n) {
    os << key << ':';
    char buf[64];
    for (size_t i = 0; i < n; ++i) {
        auto r = std::to_chars(buf, buf + sizeof(buf), v[i], std::chars_format::general, 17);
        os << ' ';
        os.write(buf, r.ptr - buf);
    }
    os << '\n';
}

std::vector<double> parse_vec(const std::string& line, const std::string& key) {
    if (line.rfind(key + ":", 0) != 0)
        throw FormatError("model file: expected key '" + key + "'");
    std::istringstream ss(line.substr(key.size() + 1));
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    return out;
}

}  // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) throw RejectedValueError("batch size must be >= 1");
    if (epochs < 0) throw RejectedValueError("epochs must be >= 0");
    if (!(majority_cost > 0.0) || !(minority_cost > 0.0))
        throw RejectedValueError("class costs must be > 0");
    if (folds < 2) throw RejectedValueError("folds must be >= 2");
    if (!(validation_fraction > 0.0) || validation_fraction > 1.0)
        throw RejectedValueError("validation fraction must be in (0, 1]");
    if (hidden_units < 1) throw RejectedValueError("hidden units must be >= 1");
}

FeatureScaler FeatureScaler::fit(const Mat& features) {
    FeatureScaler s;
    s.mean = features.colwise().mean();
    Vec var = (features.rowwise() - s.mean.transpose()).array().square().colwise().mean();
    s.stddev = var.array().sqrt();
    for (Eigen::Index j = 0; j < s.stddev.size(); ++j)
        if (s.stddev[j] == 0.0) s.stddev[j] = 1.0;
    return s;
}

double AnnModel::positive_probability(const Vec& features) const {
    const Vec x = scaler.apply(features);
    Vec h = (w1 * x + b1).unaryExpr([](double z) { return sigmoid(z); });
    Vec o = (w2 * h + b2).unaryExpr([](double z) { return sigmoid(z); });
    const double s = o.sum();
    return s == 0.0 ? 0.5 : o[1] / s;
}

void AnnModel::validate() const {
    if (w1.cols() != 8 || w1.rows() != b1.size() || w2.cols() != w1.rows() ||
        w2.rows() != 2 || b2.size() != 2)
        throw ShapeError("ann parameter shapes do not chain");
    if (!w1.allFinite() || !w2.allFinite() || !b1.allFinite() || !b2.allFinite())
        throw RejectedValueError("ann parameters must be finite");
}

double SvmModel::decision(const Vec& features) const {
    return weights.dot(scaler.apply(features)) + bias;
}

AnnModel train_ann(const Mat& features, const std::vector<int>& labels,
                   const TrainConfig& config, TrainLog* log) {
    config.validate();
    if (features.rows() != static_cast<Eigen::Index>(labels.size()))
        throw ShapeError("feature rows and label count differ");
    if (features.cols() != 8) throw ShapeError("expected 8 feature columns");
    require_two_classes(labels);

    const int h = config.hidden_units;
    std::mt19937_64 rng(config.seed);

    AnnModel model;
    model.scaler = FeatureScaler::fit(features);
    // Glorot-uniform init, seeded
    auto init = [&rng](Mat& w, int rows, int cols) {
        const double r = std::sqrt(6.0 / (rows + cols));
        std::uniform_real_distribution<double> dist(-r, r);
        w.resize(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) w(i, j) = dist(rng);
    };
    init(model.w1, h, 8);
    model.b1 = Vec::Zero(h);
    init(model.w2, 2, h);
    model.b2 = Vec::Zero(2);

    const Eigen::Index n = features.rows();
    Mat x(n, 8);
    for (Eigen::Index i = 0; i < n; ++i)
        x.row(i) = model.scaler.apply(features.row(i).transpose()).transpose();

    // class sizes decide which label carries the majority cost
    int64_t count1 = 0;
    for (int y : labels) count1 += y;
    const bool positive_is_minority = 2 * count1 < n;
    const double cost0 = positive_is_minority ? config.majority_cost : config.minority_cost;
    const double cost1 = positive_is_minority ? config.minority_cost : config.majority_cost;

    // adam state
    Mat mw1 = Mat::Zero(h, 8), vw1 = Mat::Zero(h, 8);
    Vec mb1 = Vec::Zero(h), vb1 = Vec::Zero(h);
    Mat mw2 = Mat::Zero(2, h), vw2 = Mat::Zero(2, h);
    Vec mb2 = Vec::Zero(2), vb2 = Vec::Zero(2);
    int64_t step = 0;

    auto adam_update = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
        mom = config.adam_beta1 * mom + (1.0 - config.adam_beta1) * grad;
        vel = config.adam_beta2 * vel.array().matrix() +
              (1.0 - config.adam_beta2) * grad.array().square().matrix();
        const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
        param.array() -= config.learning_rate * (mom.array() / bc1) /
                         ((vel.array() / bc2).sqrt() + config.adam_epsilon);
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = shuffled_indices(static_cast<size_t>(n), rng);
        double loss_sum = 0.0;
        int64_t correct = 0;
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            const size_t end = std::min(order.size(), start + config.batch_size);
            const double bsize = static_cast<double>(end - start);
            Mat gw1 = Mat::Zero(h, 8), gw2 = Mat::Zero(2, h);
            Vec gb1 = Vec::Zero(h), gb2 = Vec::Zero(2);
            for (size_t ii = start; ii < end; ++ii) {
                const Eigen::Index i = static_cast<Eigen::Index>(order[ii]);
                const int yi = labels[i];
                const double w = yi == 1 ? cost1 : cost0;
                const Vec xi = x.row(i).transpose();
                const Vec hz = model.w1 * xi + model.b1;
                const Vec ha = hz.unaryExpr([](double z) { return sigmoid(z); });
                const Vec oz = model.w2 * ha + model.b2;
                const Vec oa = oz.unaryExpr([](double z) { return sigmoid(z); });
                const double S = oa.sum();
                const double p_y = oa[yi] / S;
                loss_sum += -w * std::log(std::max(p_y, 1e-300));
                if ((oa[1] > oa[0]) == (yi == 1)) ++correct;

                // d(-w log(o_y / S))/doz_c = -w [ 1{c==y} (1 - o_y) - o_c (1 - o_c) / S ]
                Vec dz(2);
                for (int c = 0; c < 2; ++c) {
                    const double ind = (c == yi) ? 1.0 : 0.0;
                    dz[c] = -w * (ind * (1.0 - oa[yi]) - oa[c] * (1.0 - oa[c]) / S);
                }
                gw2 += dz * ha.transpose();
                gb2 += dz;
                const Vec dh =
                    (model.w2.transpose() * dz).cwiseProduct(ha.cwiseProduct(Vec::Ones(h) - ha));
                gw1 += dh * xi.transpose();
                gb1 += dh;
            }
            ++step;
            gw1 /= bsize; gb1 /= bsize; gw2 /= bsize; gb2 /= bsize;
            adam_update(model.w1, mw1, vw1, gw1);
            adam_update(model.b1, mb1, vb1, gb1);
            adam_update(model.w2, mw2, vw2, gw2);
            adam_update(model.b2, mb2, vb2, gb2);
        }
        if (log)
            log->epochs.push_back({epoch + 1, loss_sum / static_cast<double>(n),
                                   static_cast<double>(correct) / static_cast<double>(n)});
    }
    model.validate();
    return model;
}

double ann_weighted_loss(const AnnModel& model, const Mat& features,
                         const std::vector<int>& labels, double cost0, double cost1) {
    if (features.rows() != static_cast<Eigen::Index>(labels.size()))
        throw ShapeError("feature rows and label count differ");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const Vec x = model.scaler.apply(features.row(i).transpose());
        const Vec h = (model.w1 * x + model.b1).unaryExpr([](double z) { return sigmoid(z); });
        const Vec o = (model.w2 * h + model.b2).unaryExpr([](double z) { return sigmoid(z); });
        const double p = o[labels[i]] / o.sum();
        acc += -(labels[i] == 1 ? cost1 : cost0) * std::log(std::max(p, 1e-300));
    }
    return acc / static_cast<double>(features.rows());
}

SvmModel train_svm(const Mat& features, const std::vector<int>& labels,
                   const TrainConfig& config, TrainLog* log) {
    config.validate();
    if (features.rows() != static_cast<Eigen::Index>(labels.size()))
        throw ShapeError("feature rows and label count differ");
    if (features.cols() != 8) throw ShapeError("expected 8 feature columns");
    require_two_classes(labels);

    SvmModel model;   // zero weights and bias at init
    if (config.epochs == 0) {
        model.scaler = FeatureScaler::fit(features);
        return model;
    }
    model.scaler = FeatureScaler::fit(features);

    const Eigen::Index n = features.rows();
    Mat x(n, 8);
    for (Eigen::Index i = 0; i < n; ++i)
        x.row(i) = model.scaler.apply(features.row(i).transpose()).transpose();

    std::mt19937_64 rng(config.seed);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = shuffled_indices(static_cast<size_t>(n), rng);
        double loss_sum = 0.0;
        int64_t correct = 0;
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            const size_t end = std::min(order.size(), start + config.batch_size);
            const double bsize = static_cast<double>(end - start);
            Vec gw = config.svm_regularization * model.weights;
            double gb = 0.0;
            for (size_t ii = start; ii < end; ++ii) {
                const Eigen::Index i = static_cast<Eigen::Index>(order[ii]);
                const double y = labels[i] == 1 ? 1.0 : -1.0;
                const Vec xi = x.row(i).transpose();
                const double margin = y * (model.weights.dot(xi) + model.bias);
                loss_sum += std::max(0.0, 1.0 - margin);
                if (margin > 0.0) ++correct;
                if (margin < 1.0) {   // equal cost for both classes
                    gw -= (y / bsize) * xi;
                    gb -= y / bsize;
                }
            }
            model.weights -= config.svm_learning_rate * gw;
            model.bias -= config.svm_learning_rate * gb;
        }
        if (log)
            log->epochs.push_back({epoch + 1, loss_sum / static_cast<double>(n),
                                   static_cast<double>(correct) / static_cast<double>(n)});
    }
    return model;
}

std::vector<FoldResult> cross_validate(const Mat& features, const std::vector<int>& labels,
                                       const TrainConfig& config, Method kind) {
    config.validate();
    require_two_classes(labels);
    const size_t n = labels.size();
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    // validation slice: seeded sample of validation_fraction of the data
    auto all = shuffled_indices(n, rng);
    const size_t slice_size = std::max<size_t>(config.folds,
        static_cast<size_t>(std::llround(config.validation_fraction * static_cast<double>(n))));
    all.resize(std::min(n, slice_size));

    // stratified fold assignment: positives and negatives dealt round-robin
    std::vector<int> fold_of(all.size());
    int pos_fold = 0, neg_fold = 0;
    for (size_t i = 0; i < all.size(); ++i) {
        if (labels[all[i]] == 1)
            fold_of[i] = pos_fold++ % config.folds;
        else
            fold_of[i] = neg_fold++ % config.folds;
    }
    if (pos_fold < config.folds)
        throw StratificationError("a fold has no positive samples (" +
                                  std::to_string(pos_fold) + " positives for " +
                                  std::to_string(config.folds) + " folds)");

    std::vector<FoldResult> results;
    for (int fold = 0; fold < config.folds; ++fold) {
        std::vector<size_t> train_idx, test_idx;
        for (size_t i = 0; i < all.size(); ++i)
            (fold_of[i] == fold ? test_idx : train_idx).push_back(all[i]);

        Mat ftrain(train_idx.size(), 8);
        std::vector<int> ltrain(train_idx.size());
        for (size_t i = 0; i < train_idx.size(); ++i) {
            ftrain.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(train_idx[i]));
            ltrain[i] = labels[train_idx[i]];
        }

        ConfusionCounts counts;
        auto tally = [&](bool predicted_positive, int truth) {
            if (predicted_positive && truth == 1) ++counts.tp;
            else if (predicted_positive) ++counts.fp;
            else if (truth == 1) ++counts.fn;
            else ++counts.tn;
        };
        if (kind == Method::Ann) {
            const AnnModel m = train_ann(ftrain, ltrain, config);
            for (size_t i : test_idx)
                tally(m.positive_probability(features.row(static_cast<Eigen::Index>(i)).transpose()) > 0.5,
                      labels[i]);
        } else if (kind == Method::Svm) {
            const SvmModel m = train_svm(ftrain, ltrain, config);
            for (size_t i : test_idx)
                tally(m.decision(features.row(static_cast<Eigen::Index>(i)).transpose()) > 0.0,
                      labels[i]);
        } else {
            throw RejectedValueError("cross_validate supports ann and svm only");
        }
        results.push_back({fold, counts, derive_metrics(counts)});
    }
    return results;
}

namespace {

template <typename Scorer>
ExtractionOutcome extract_with_scores(const VecRef& samples,
                                      const std::vector<WavePacket>& packets, Method method,
                                      const FeatureConfig& fc, Scorer&& score) {
    validate_packets(packets, static_cast<int>(samples.size()));
    const Mat features = compute_features(samples, fc);

    ExtractionOutcome out;
    out.method = method;
    for (size_t p = 0; p < packets.size(); ++p) {
        const auto& pk = packets[p];
        int best = -1;
        double best_score = 0.0;
        for (int i = pk.start; i < pk.end; ++i) {
            const auto [positive, s] = score(features.row(i).transpose());
            if (positive && (best < 0 || s > best_score)) {
                best = i;
                best_score = s;
            }
        }
        bool fallback = false;
        if (best < 0) {   // no positive classification inside the packet
            fallback = true;
            best = pk.start;
            for (int i = pk.start + 1; i < pk.end; ++i)
                if (samples[i] > samples[best]) best = i;
        }
        const auto seg = samples.segment(pk.start, pk.length());
        const auto trough = forward_trough(seg, best - pk.start, 0.1);
        if (!trough) {
            out.failed_packets.push_back(static_cast<int>(p));
            continue;
        }
        AmplitudeReading r;
        r.peak_index = best;
        r.trough_index = pk.start + *trough;
        r.amplitude = samples[r.peak_index] - samples[r.trough_index];
        if (r.amplitude < 0.0) {
            out.failed_packets.push_back(static_cast<int>(p));
            continue;
        }
        out.readings.push_back({static_cast<int>(p), r, fallback});
    }
    out.projection_value = projection_from_readings(out.readings);
    return out;
}

}  // namespace

template <>
ExtractionOutcome extract_ml<AnnModel>(const VecRef& samples,
                                       const std::vector<WavePacket>& packets,
                                       const AnnModel& model, const FeatureConfig& fc) {
    return extract_with_scores(samples, packets, Method::Ann, fc, [&](const Vec& f) {
        const double p = model.positive_probability(f);
        return std::pair<bool, double>(p > 0.5, p);
    });
}

template <>
ExtractionOutcome extract_ml<SvmModel>(const VecRef& samples,
                                       const std::vector<WavePacket>& packets,
                                       const SvmModel& model, const FeatureConfig& fc) {
    return extract_with_scores(samples, packets, Method::Svm, fc, [&](const Vec& f) {
        const double d = model.decision(f);
        return std::pair<bool, double>(d > 0.0, d);
    });
}

void save_ann(const AnnModel& model, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "uct_model v1\nkind: ann\n";
    os << "layers: 8 " << model.w1.rows() << " 2\n";
    write_vec(os, "scaler_mean", model.scaler.mean.data(), 8);
    write_vec(os, "scaler_std", model.scaler.stddev.data(), 8);
    // Eigen stores column-major; serialize row-major for readability
    Mat w1t = model.w1.transpose();
    Mat w2t = model.w2.transpose();
    write_vec(os, "w1", w1t.data(), static_cast<size_t>(w1t.size()));
    write_vec(os, "b1", model.b1.data(), static_cast<size_t>(model.b1.size()));
    write_vec(os, "w2", w2t.data(), static_cast<size_t>(w2t.size()));
    write_vec(os, "b2", model.b2.data(), static_cast<size_t>(model.b2.size()));
    if (!os) throw IoError("write failed for " + path.string());
}

AnnModel load_ann(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    if (line != "uct_model v1") throw FormatError("bad model header");
    std::getline(is, line);
    if (line != "kind: ann") throw FormatError("not an ann model");
    std::getline(is, line);
    int in = 0, h = 0, outn = 0;
    if (std::sscanf(line.c_str(), "layers: %d %d %d", &in, &h, &outn) != 3 || in != 8 ||
        outn != 2 || h < 1)
        throw FormatError("bad layers line");
    AnnModel m;
    auto next = [&](const std::string& key) {
        std::getline(is, line);
        return parse_vec(line, key);
    };
    auto mean = next("scaler_mean");
    auto stdd = next("scaler_std");
    auto w1 = next("w1");
    auto b1 = next("b1");
    auto w2 = next("w2");
    auto b2 = next("b2");
    if (mean.size() != 8 || stdd.size() != 8 || w1.size() != static_cast<size_t>(8 * h) ||
        b1.size() != static_cast<size_t>(h) || w2.size() != static_cast<size_t>(2 * h) ||
        b2.size() != 2)
        throw FormatError("model array sizes inconsistent with layers");
    m.scaler.mean = Eigen::Map<Vec>(mean.data(), 8);
    m.scaler.stddev = Eigen::Map<Vec>(stdd.data(), 8);
    m.w1 = Eigen::Map<Mat>(w1.data(), 8, h).transpose();
    m.b1 = Eigen::Map<Vec>(b1.data(), h);
    m.w2 = Eigen::Map<Mat>(w2.data(), h, 2).transpose();
    m.b2 = Eigen::Map<Vec>(b2.data(), 2);
    m.validate();
    return m;
}

void save_svm(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "uct_model v1\nkind: svm\n";
    write_vec(os, "scaler_mean", model.scaler.mean.data(), 8);
    write_vec(os, "scaler_std", model.scaler.stddev.data(), 8);
    write_vec(os, "w", model.weights.data(), 8);
    write_vec(os, "b", &model.bias, 1);
    if (!os) throw IoError("write failed for " + path.string());
}

SvmModel load_svm(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    if (line != "uct_model v1") throw FormatError("bad model header");
    std::getline(is, line);
    if (line != "kind: svm") throw FormatError("not an svm model");
    SvmModel m;
    auto next = [&](const std::string& key) {
        std::getline(is, line);
        return parse_vec(line, key);
    };
    auto mean = next("scaler_mean");
    auto stdd = next("scaler_std");
    auto w = next("w");
    auto b = next("b");
    if (mean.size() != 8 || stdd.size() != 8 || w.size() != 8 || b.size() != 1)
        throw FormatError("svm model array sizes wrong");
    m.scaler.mean = Eigen::Map<Vec>(mean.data(), 8);
    m.scaler.stddev = Eigen::Map<Vec>(stdd.data(), 8);
    m.weights = Eigen::Map<Vec>(w.data(), 8);
    m.bias = b[0];
    return m;
}

void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "epoch,weighted_loss,train_accuracy\n";
    for (const auto& e : log.epochs)
        os << e.epoch << ',' << e.weighted_loss << ',' << e.train_accuracy << '\n';
}

}  // namespace uct
