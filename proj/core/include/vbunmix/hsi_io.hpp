#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vbunmix/model.hpp"
#include "vbunmix/vb_engine.hpp"

namespace vbunmix {

enum class Interleave { BSQ, BIL, BIP };
enum class CubeDataType { Int16, Float32 };
enum class ByteOrder { Little, Big };

std::string to_string(Interleave il);

// The seven fields read from an ENVI text header. Unknown keys are ignored;
// `header offset` defaults to 0 when absent.
struct EnviHeader {
  std::size_t samples = 0;
  std::size_t lines = 0;
  std::size_t bands = 0;
  Interleave interleave = Interleave::BSQ;
  CubeDataType data_type = CubeDataType::Int16;
  ByteOrder byte_order = ByteOrder::Little;
  std::size_t header_offset = 0;
};

// Parses "key = value" lines, case-insensitive keys, brace-delimited values
// skipped. Supported data types: 2 (int16) and 4 (float32).
// Throws ParseError naming the offending key.
EnviHeader parse_envi_header(std::string_view text);

// Decoded cube, addressable as (line, sample, band); stored pixel-major so a
// pixel's spectrum is contiguous.
struct HsiCube {
  std::size_t lines = 0;
  std::size_t samples = 0;
  std::size_t bands = 0;
  std::vector<double> data;  // lines * samples * bands

  double at(std::size_t line, std::size_t sample, std::size_t band) const noexcept {
    return data[(line * samples + sample) * bands + band];
  }
  std::size_t pixel_count() const noexcept { return lines * samples; }
  PixelBlock pixel_block() const noexcept { return {data.data(), pixel_count(), bands}; }
};

// Decodes raw interleaved samples against the header. The byte count must be
// exactly lines*samples*bands*element_size + header_offset.
HsiCube load_cube(const EnviHeader& header, std::span<const std::byte> raw);

// 1-based band indices to drop, kept sorted and unique.
struct BandExclusion {
  std::vector<std::size_t> excluded;

  // Accepts a preset name ("none", "cuprite-1997") or comma-separated ranges
  // like "1-2,104-113,221". Throws ParseError on malformed input.
  static BandExclusion parse(std::string_view text);
  static BandExclusion cuprite_1997();
  static BandExclusion none() { return {}; }

  std::size_t retained(std::size_t bands) const { return bands - excluded.size(); }
};

// Drops the excluded bands; retained order is preserved. Excluding every
// band (or an out-of-range index) is a domain error.
HsiCube apply_band_exclusion(const HsiCube& cube, const BandExclusion& exclusion);
// Row-wise reduction of a signature matrix whose M equals the original band
// count, so cube and matrix stay aligned.
EndmemberMatrix apply_band_exclusion(const EndmemberMatrix& phi, const BandExclusion& exclusion);

// Rectangular numeric CSV, M rows by N columns, one column per endmember.
// Ragged rows and non-numeric cells throw ParseError with row/column info.
EndmemberMatrix load_endmembers_csv(std::string_view text);

struct AbundanceMap {
  std::size_t lines = 0;
  std::size_t samples = 0;
  std::size_t endmembers = 0;
  std::vector<double> values;  // (line, sample, endmember), pixel-major; -1 rows mark failures
  std::vector<std::string> labels;

  double at(std::size_t line, std::size_t sample, std::size_t e) const noexcept {
    return values[(line * samples + sample) * endmembers + e];
  }
};

// Reassembles a batch result into an image-shaped map. Labels default to
// em01..emNN when empty.
AbundanceMap to_abundance_map(const BatchResult& batch, std::size_t lines, std::size_t samples,
                              std::vector<std::string> labels = {});

struct OutputFormats {
  bool csv = true;
  bool pgm = true;
};

// Writes one CSV (full precision, row-major) and/or one binary PGM (P5,
// maxval 255, per-map max scaled to 255) per endmember, plus a sidecar list
// of sentinel pixels. Returns the paths written.
std::vector<std::filesystem::path> write_abundance_outputs(const AbundanceMap& map,
                                                           const std::filesystem::path& directory,
                                                           const OutputFormats& formats = {});

// Whole-file helpers used by the CLI.
std::string read_text_file(const std::filesystem::path& file);
std::vector<std::byte> read_binary_file(const std::filesystem::path& file);

}  // namespace vbunmix
