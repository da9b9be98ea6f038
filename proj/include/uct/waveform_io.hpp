#pragma once

#include "uct/waveform.hpp"

#include <filesystem>
#include <map>
#include <vector>

namespace uct {

enum class FileFormat { Text, Binary };

/// Text: "key: value" header block (sample_rate, rotation_index,
/// translation_index) terminated by a blank line, then one decimal sample
/// per line with 17 significant digits.
/// Binary: "UCTW" magic, version byte, header fields, little-endian f64 payload.
WaveformRecord read_record(const std::filesystem::path& path, FileFormat format);
void write_record(const WaveformRecord& record, const std::filesystem::path& path,
                  FileFormat format);

void write_labels_csv(const std::filesystem::path& path,
                      const std::vector<GroundTruthLabels>& labels);
std::vector<GroundTruthLabels> read_labels_csv(const std::filesystem::path& path);

}  // namespace uct
