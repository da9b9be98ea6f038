#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uct/waveform_io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

using namespace uct;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    static int counter = 0;
    return fs::temp_directory_path() / ("uct_wave_" + std::to_string(counter++) + "_" + name);
}

WaveformRecord random_record(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1e-4);
    WaveformRecord rec;
    rec.samples.resize(n);
    for (int i = 0; i < n; ++i) rec.samples[i] = dist(rng);
    rec.sample_rate = 50e6;
    rec.rotation_index = 3;
    rec.translation_index = 17;
    return rec;
}

}  // namespace

TEST_CASE("binary round trip is bit exact") {
    const WaveformRecord rec = random_record(50002, 1);
    const auto path = temp_file("rt.uctw");
    write_record(rec, path, FileFormat::Binary);
    const WaveformRecord back = read_record(path, FileFormat::Binary);
    REQUIRE(back.samples.size() == rec.samples.size());
    CHECK(back.sample_rate == rec.sample_rate);
    CHECK(back.rotation_index == rec.rotation_index);
    CHECK(back.translation_index == rec.translation_index);
    for (int i = 0; i < rec.samples.size(); ++i) REQUIRE(back.samples[i] == rec.samples[i]);
    fs::remove(path);
}

TEST_CASE("binary payload is exactly 8 bytes per sample plus the header") {
    const WaveformRecord rec = random_record(50002, 2);
    const auto path = temp_file("size.uctw");
    write_record(rec, path, FileFormat::Binary);
    // magic 4 + version 1 + sample_rate 8 + rotation 4 + translation 4 + count 8
    const uintmax_t header = 4 + 1 + 8 + 4 + 4 + 8;
    CHECK(fs::file_size(path) == header + 8ull * 50002ull);
    fs::remove(path);
}

TEST_CASE("text round trip reproduces samples exactly at 17 significant digits") {
    const WaveformRecord rec = random_record(500, 3);
    const auto path = temp_file("rt.txt");
    write_record(rec, path, FileFormat::Text);
    const WaveformRecord back = read_record(path, FileFormat::Text);
    REQUIRE(back.samples.size() == rec.samples.size());
    // 17 significant digits round-trip doubles exactly
    for (int i = 0; i < rec.samples.size(); ++i) CHECK(back.samples[i] == rec.samples[i]);
    fs::remove(path);
}

TEST_CASE("round trip property over sizes and formats") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 2000);
        const WaveformRecord rec = random_record(n, rng());
        for (auto format : {FileFormat::Text, FileFormat::Binary}) {
            const auto path = temp_file("prop");
            write_record(rec, path, format);
            const WaveformRecord back = read_record(path, format);
            REQUIRE(back.samples.size() == n);
            for (int i = 0; i < n; ++i) REQUIRE(back.samples[i] == rec.samples[i]);
            fs::remove(path);
        }
    }
}

TEST_CASE("a full length text record reads back with every sample") {
    const WaveformRecord rec = random_record(50002, 12);
    const auto path = temp_file("full.txt");
    write_record(rec, path, FileFormat::Text);
    const WaveformRecord back = read_record(path, FileFormat::Text);
    CHECK(back.samples.size() == 50002);
    CHECK(back.samples[50001] == rec.samples[50001]);
    fs::remove(path);
}

TEST_CASE("unwritable destination raises IoError") {
    const WaveformRecord rec = random_record(8, 13);
    CHECK_THROWS_AS(write_record(rec, "/nonexistent_dir/rec.uctw", FileFormat::Binary), IoError);
    CHECK_THROWS_AS(read_record("/nonexistent_dir/rec.uctw", FileFormat::Binary), IoError);
}

TEST_CASE("binary header declaring zero samples raises EmptyRecordError") {
    const auto path = temp_file("empty.uctw");
    std::ofstream os(path, std::ios::binary);
    os.write("UCTW", 4);
    const uint8_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 1);
    const double rate = 50e6;
    os.write(reinterpret_cast<const char*>(&rate), 8);
    const uint32_t zero32 = 0;
    os.write(reinterpret_cast<const char*>(&zero32), 4);
    os.write(reinterpret_cast<const char*>(&zero32), 4);
    const uint64_t count = 0;
    os.write(reinterpret_cast<const char*>(&count), 8);
    os.close();
    CHECK_THROWS_AS(read_record(path, FileFormat::Binary), EmptyRecordError);
    fs::remove(path);
}

TEST_CASE("non numeric sample raises ParseError naming the line") {
    const auto path = temp_file("bad.txt");
    std::ofstream os(path);
    os << "sample_rate: 50000000\nrotation_index: 0\ntranslation_index: 0\n\n"
       << "0.25\nnot_a_number\n0.5\n";
    os.close();
    try {
        read_record(path, FileFormat::Text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 6") != std::string::npos);
    }
    fs::remove(path);
}

TEST_CASE("malformed header raises FormatError") {
    const auto path = temp_file("hdr.txt");
    std::ofstream os(path);
    os << "sample_rate 50000000\n\n0.25\n";   // missing colon
    os.close();
    CHECK_THROWS_AS(read_record(path, FileFormat::Text), FormatError);
    fs::remove(path);
}

TEST_CASE("NaN sample is rejected before writing") {
    WaveformRecord rec = random_record(16, 4);
    rec.samples[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(write_record(rec, temp_file("nan.uctw"), FileFormat::Binary),
                    RejectedValueError);
}

TEST_CASE("packet validation enforces bounds, order and disjointness") {
    CHECK_NOTHROW(validate_packets({{0, 10}, {10, 20}, {25, 30}}, 30));
    CHECK_THROWS_AS(validate_packets({{0, 10}, {5, 20}}, 30), RejectedValueError);
    CHECK_THROWS_AS(validate_packets({{10, 20}, {0, 9}}, 30), RejectedValueError);
    CHECK_THROWS_AS(validate_packets({{0, 31}}, 30), RejectedValueError);
    CHECK_THROWS_AS(validate_packets({{5, 5}}, 30), RejectedValueError);
}

TEST_CASE("amplitude readings are re-derivable from the samples") {
    Vec x(6);
    x << 0.0, 1.0, 0.5, -1.0, 0.0, 0.2;
    AmplitudeReading ok{1, 3, 2.0};
    CHECK_NOTHROW(validate_reading(ok, x));
    AmplitudeReading backwards{3, 1, 2.0};
    CHECK_THROWS_AS(validate_reading(backwards, x), RejectedValueError);
    AmplitudeReading wrong{1, 3, 1.5};
    CHECK_THROWS_AS(validate_reading(wrong, x), RejectedValueError);
}

TEST_CASE("labels csv round trip") {
    std::vector<GroundTruthLabels> labels(2);
    labels[0].record_id = 41;
    labels[0].peaks = {{100, 117, 2.5e-4}, {700, 719, 1.25e-4}};
    labels[1].record_id = 42;
    labels[1].peaks = {{55, 60, 3.0e-6}};
    const auto path = temp_file("labels.csv");
    write_labels_csv(path, labels);
    const auto back = read_labels_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].record_id == 41);
    REQUIRE(back[0].peaks.size() == 2);
    CHECK(back[0].peaks[1].peak_index == 700);
    CHECK(back[0].peaks[1].true_amplitude == 1.25e-4);
    CHECK(back[1].peaks[0].trough_index == 60);
    fs::remove(path);
}
