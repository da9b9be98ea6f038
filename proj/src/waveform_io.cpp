#include "uct/waveform_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace uct {
namespace {

constexpr char kMagic[4] = {'U', 'C', 'T', 'W'};
constexpr uint8_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary waveform format assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError("binary record truncated");
    return v;
}

double parse_sample(const std::string& tok, size_t line_no) {
    double v = 0.0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e)
        throw ParseError("non-numeric sample at line " + std::to_string(line_no) +
                         ": '" + tok + "'");
    return v;
}

WaveformRecord read_text(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    WaveformRecord rec;
    std::map<std::string, std::string> header;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) break;   // blank line terminates the header
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw FormatError("malformed header line " + std::to_string(line_no) +
                              " in " + path.string());
        std::string key = line.substr(0, colon);
        std::string val = line.substr(colon + 1);
        val.erase(0, val.find_first_not_of(" \t"));
        header[key] = val;
    }
    try {
        rec.sample_rate = std::stod(header.at("sample_rate"));
        rec.rotation_index = std::stoi(header.at("rotation_index"));
        rec.translation_index = std::stoi(header.at("translation_index"));
    } catch (const std::out_of_range&) {
        throw FormatError("missing header key in " + path.string());
    } catch (const std::exception&) {
        throw FormatError("unparsable header value in " + path.string());
    }
    std::vector<double> samples;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        samples.push_back(parse_sample(line, line_no));
    }
    if (samples.empty()) throw EmptyRecordError("no samples in " + path.string());
    rec.samples = Eigen::Map<const Vec>(samples.data(), static_cast<Eigen::Index>(samples.size()));
    rec.validate();
    return rec;
}

void write_text(const WaveformRecord& rec, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "sample_rate: ";
    {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof(buf), rec.sample_rate,
                               std::chars_format::general, 17);
        os.write(buf, r.ptr - buf);
    }
    os << "\nrotation_index: " << rec.rotation_index
       << "\ntranslation_index: " << rec.translation_index << "\n\n";
    char buf[64];
    for (Eigen::Index i = 0; i < rec.samples.size(); ++i) {
        auto r = std::to_chars(buf, buf + sizeof(buf), rec.samples[i],
                               std::chars_format::general, 17);
        os.write(buf, r.ptr - buf);
        os.put('\n');
    }
    if (!os) throw IoError("write failed for " + path.string());
}

WaveformRecord read_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic in " + path.string());
    const auto version = get<uint8_t>(is);
    if (version != kVersion)
        throw FormatError("unsupported version " + std::to_string(version));
    WaveformRecord rec;
    rec.sample_rate = get<double>(is);
    rec.rotation_index = static_cast<int>(get<uint32_t>(is));
    rec.translation_index = static_cast<int>(get<uint32_t>(is));
    const auto count = get<uint64_t>(is);
    if (count == 0) throw EmptyRecordError("header declares 0 samples: " + path.string());
    rec.samples.resize(static_cast<Eigen::Index>(count));
    is.read(reinterpret_cast<char*>(rec.samples.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw FormatError("binary record truncated: " + path.string());
    rec.validate();
    return rec;
}

void write_binary(const WaveformRecord& rec, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, rec.sample_rate);
    put(os, static_cast<uint32_t>(rec.rotation_index));
    put(os, static_cast<uint32_t>(rec.translation_index));
    put(os, static_cast<uint64_t>(rec.samples.size()));
    os.write(reinterpret_cast<const char*>(rec.samples.data()),
             static_cast<std::streamsize>(rec.samples.size() * sizeof(double)));
    if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace

WaveformRecord read_record(const std::filesystem::path& path, FileFormat format) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    return format == FileFormat::Text ? read_text(path) : read_binary(path);
}

void write_record(const WaveformRecord& record, const std::filesystem::path& path,
                  FileFormat format) {
    record.validate();   // rejects NaN/Inf and empty records before touching disk
    if (format == FileFormat::Text)
        write_text(record, path);
    else
        write_binary(record, path);
}

void write_labels_csv(const std::filesystem::path& path,
                      const std::vector<GroundTruthLabels>& labels) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "record_id,peak_index,trough_index,true_amplitude\n";
    char buf[64];
    for (const auto& rec : labels) {
        for (const auto& p : rec.peaks) {
            os << rec.record_id << ',' << p.peak_index << ',' << p.trough_index << ',';
            auto r = std::to_chars(buf, buf + sizeof(buf), p.true_amplitude,
                                   std::chars_format::general, 17);
            os.write(buf, r.ptr - buf);
            os.put('\n');
        }
    }
    if (!os) throw IoError("write failed for " + path.string());
}

std::vector<GroundTruthLabels> read_labels_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line.rfind("record_id,", 0) != 0)
        throw FormatError("missing labels header in " + path.string());
    std::vector<GroundTruthLabels> out;
    size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string f0, f1, f2, f3;
        if (!std::getline(ss, f0, ',') || !std::getline(ss, f1, ',') ||
            !std::getline(ss, f2, ',') || !std::getline(ss, f3))
            throw ParseError("bad labels row at line " + std::to_string(line_no));
        const int64_t id = std::stoll(f0);
        if (out.empty() || out.back().record_id != id) {
            out.push_back(GroundTruthLabels{id, {}});
        }
        out.back().peaks.push_back(
            LabeledPeak{std::stoi(f1), std::stoi(f2), parse_sample(f3, line_no)});
    }
    return out;
}

}  // namespace uct
