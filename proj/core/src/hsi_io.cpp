#include "vbunmix/hsi_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vbunmix/errors.hpp"

namespace vbunmix {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t parse_size(std::string_view value, const std::string& key) {
  std::size_t out = 0;
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("ENVI header: key '" + key + "' has a non-integer value '" +
                     std::string(value) + "'");
  }
  return out;
}

std::size_t element_size(CubeDataType t) { return t == CubeDataType::Int16 ? 2 : 4; }

double decode_element(const std::byte* p, CubeDataType type, ByteOrder order) {
  unsigned char b[4];
  const std::size_t n = element_size(type);
  if (order == ByteOrder::Little) {
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<unsigned char>(p[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<unsigned char>(p[n - 1 - i]);
  }
  if (type == CubeDataType::Int16) {
    const std::uint16_t u = static_cast<std::uint16_t>(b[0]) |
                            (static_cast<std::uint16_t>(b[1]) << 8);
    return static_cast<double>(static_cast<std::int16_t>(u));
  }
  std::uint32_t u = 0;
  for (std::size_t i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  float f;
  std::memcpy(&f, &u, sizeof f);
  return static_cast<double>(f);
}

}  // namespace

std::string to_string(Interleave il) {
  switch (il) {
    case Interleave::BSQ: return "bsq";
    case Interleave::BIL: return "bil";
    case Interleave::BIP: return "bip";
  }
  return "?";
}

EnviHeader parse_envi_header(std::string_view text) {
  EnviHeader h;
  bool have_samples = false, have_lines = false, have_bands = false, have_interleave = false,
       have_data_type = false, have_byte_order = false;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line == "ENVI" || line.front() == ';') continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) continue;  // tolerate stray lines
    const std::string key = lower(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));

    // brace-delimited values (wavelength lists etc.) may span lines; skip them
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string_view::npos && pos < text.size()) {
        std::size_t next = text.find('\n', pos);
        if (next == std::string_view::npos) next = text.size();
        value = trim(text.substr(pos, next - pos));
        pos = next + 1;
      }
      continue;
    }

    if (key == "samples") {
      h.samples = parse_size(value, key);
      have_samples = true;
    } else if (key == "lines") {
      h.lines = parse_size(value, key);
      have_lines = true;
    } else if (key == "bands") {
      h.bands = parse_size(value, key);
      have_bands = true;
    } else if (key == "interleave") {
      const std::string v = lower(value);
      if (v == "bsq") {
        h.interleave = Interleave::BSQ;
      } else if (v == "bil") {
        h.interleave = Interleave::BIL;
      } else if (v == "bip") {
        h.interleave = Interleave::BIP;
      } else {
        throw ParseError("ENVI header: unsupported interleave '" + std::string(value) + "'");
      }
      have_interleave = true;
    } else if (key == "data type") {
      const std::size_t code = parse_size(value, key);
      if (code == 2) {
        h.data_type = CubeDataType::Int16;
      } else if (code == 4) {
        h.data_type = CubeDataType::Float32;
      } else {
        throw ParseError("ENVI header: unsupported data type code " + std::to_string(code) +
                         " (supported: 2 = int16, 4 = float32)");
      }
      have_data_type = true;
    } else if (key == "byte order") {
      const std::size_t code = parse_size(value, key);
      if (code > 1) throw ParseError("ENVI header: byte order must be 0 or 1");
      h.byte_order = code == 0 ? ByteOrder::Little : ByteOrder::Big;
      have_byte_order = true;
    } else if (key == "header offset") {
      h.header_offset = parse_size(value, key);
    }
    // anything else: ignored for forward compatibility
  }

  const auto require = [](bool have, const char* key) {
    if (!have) throw ParseError(std::string("ENVI header: missing mandatory key '") + key + "'");
  };
  require(have_samples, "samples");
  require(have_lines, "lines");
  require(have_bands, "bands");
  require(have_interleave, "interleave");
  require(have_data_type, "data type");
  require(have_byte_order, "byte order");
  if (h.samples == 0 || h.lines == 0 || h.bands == 0) {
    throw ParseError("ENVI header: samples, lines and bands must all be nonzero");
  }
  return h;
}

HsiCube load_cube(const EnviHeader& header, std::span<const std::byte> raw) {
  const std::size_t elems = header.lines * header.samples * header.bands;
  const std::size_t expected = elems * element_size(header.data_type) + header.header_offset;
  if (raw.size() != expected) {
    throw IoError("cube data: expected " + std::to_string(expected) + " bytes, got " +
                  std::to_string(raw.size()));
  }
  const std::byte* base = raw.data() + header.header_offset;
  const std::size_t es = element_size(header.data_type);

  HsiCube cube;
  cube.lines = header.lines;
  cube.samples = header.samples;
  cube.bands = header.bands;
  cube.data.resize(elems);

  const std::size_t L = header.lines, S = header.samples, B = header.bands;
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t b = 0; b < B; ++b) {
        std::size_t src;
        switch (header.interleave) {
          case Interleave::BSQ: src = (b * L + l) * S + s; break;
          case Interleave::BIL: src = (l * B + b) * S + s; break;
          default:              src = (l * S + s) * B + b; break;
        }
        const double v = decode_element(base + src * es, header.data_type, header.byte_order);
        if (!std::isfinite(v)) {
          throw IoError("cube data: non-finite value at line " + std::to_string(l + 1) +
                        ", sample " + std::to_string(s + 1) + ", band " + std::to_string(b + 1));
        }
        cube.data[(l * S + s) * B + b] = v;
      }
    }
  }
  return cube;
}

BandExclusion BandExclusion::cuprite_1997() {
  BandExclusion e;
  const auto add_range = [&e](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b <= hi; ++b) e.excluded.push_back(b);
  };
  add_range(1, 2);
  add_range(104, 113);
  add_range(148, 167);
  add_range(221, 224);
  return e;
}

BandExclusion BandExclusion::parse(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t.empty() || t == "none") return none();
  if (t == "cuprite-1997") return cuprite_1997();

  BandExclusion e;
  const auto parse_band = [](std::string_view item, std::string_view whole) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), out);
    if (ec != std::errc() || ptr != item.data() + item.size() || out == 0) {
      throw ParseError("band exclusion: cannot parse '" + std::string(whole) +
                       "' (bands are 1-based integers)");
    }
    return out;
  };
  std::size_t pos = 0;
  while (pos <= t.size()) {
    std::size_t comma = t.find(',', pos);
    if (comma == std::string_view::npos) comma = t.size();
    const std::string item(trim(std::string_view(t).substr(pos, comma - pos)));
    pos = comma + 1;
    if (item.empty()) throw ParseError("band exclusion: empty item in list");
    const std::size_t dash = item.find('-');
    if (dash == std::string::npos) {
      e.excluded.push_back(parse_band(item, item));
    } else {
      const std::size_t lo = parse_band(std::string_view(item).substr(0, dash), item);
      const std::size_t hi = parse_band(std::string_view(item).substr(dash + 1), item);
      if (hi < lo) throw ParseError("band exclusion: bad range '" + item + "'");
      for (std::size_t b = lo; b <= hi; ++b) e.excluded.push_back(b);
    }
    if (pos > t.size()) break;
  }
  std::sort(e.excluded.begin(), e.excluded.end());
  e.excluded.erase(std::unique(e.excluded.begin(), e.excluded.end()), e.excluded.end());
  return e;
}

namespace {

std::vector<bool> retained_mask(std::size_t bands, const BandExclusion& exclusion) {
  std::vector<bool> keep(bands, true);
  for (std::size_t b : exclusion.excluded) {
    if (b == 0 || b > bands) {
      throw std::domain_error("band exclusion: index " + std::to_string(b) +
                              " outside [1, " + std::to_string(bands) + "]");
    }
    keep[b - 1] = false;
  }
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; })) {
    throw std::domain_error("band exclusion: cannot exclude every band");
  }
  return keep;
}

}  // namespace

HsiCube apply_band_exclusion(const HsiCube& cube, const BandExclusion& exclusion) {
  const auto keep = retained_mask(cube.bands, exclusion);
  const std::size_t kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  HsiCube out;
  out.lines = cube.lines;
  out.samples = cube.samples;
  out.bands = kept;
  out.data.resize(cube.pixel_count() * kept);
  for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
    const double* src = cube.data.data() + p * cube.bands;
    double* dst = out.data.data() + p * kept;
    std::size_t j = 0;
    for (std::size_t b = 0; b < cube.bands; ++b) {
      if (keep[b]) dst[j++] = src[b];
    }
  }
  return out;
}

EndmemberMatrix apply_band_exclusion(const EndmemberMatrix& phi, const BandExclusion& exclusion) {
  const auto keep = retained_mask(phi.bands(), exclusion);
  const std::size_t kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  std::vector<double> columns(kept * phi.endmember_count());
  for (std::size_t i = 0; i < phi.endmember_count(); ++i) {
    const auto col = phi.column(i);
    std::size_t j = 0;
    for (std::size_t b = 0; b < phi.bands(); ++b) {
      if (keep[b]) columns[i * kept + j++] = col[b];
    }
  }
  return EndmemberMatrix(kept, phi.endmember_count(), std::move(columns));
}

EndmemberMatrix load_endmembers_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    std::vector<double> row;
    std::size_t cell_start = 0;
    std::size_t col_no = 0;
    for (;;) {
      std::size_t comma = line.find(',', cell_start);
      const bool last = comma == std::string_view::npos;
      const std::string_view cell = trim(line.substr(cell_start, last ? line.size() - cell_start
                                                                      : comma - cell_start));
      ++col_no;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        throw ParseError("endmember CSV: non-numeric cell at row " + std::to_string(line_no) +
                         ", column " + std::to_string(col_no));
      }
      row.push_back(v);
      if (last) break;
      cell_start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("endmember CSV: row " + std::to_string(line_no) + " has " +
                       std::to_string(row.size()) + " cells, expected " +
                       std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("endmember CSV: no data rows");

  const std::size_t m = rows.size();
  const std::size_t n = rows.front().size();
  std::vector<double> columns(m * n);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) columns[i * m + k] = rows[k][i];
  }
  return EndmemberMatrix(m, n, std::move(columns));
}

AbundanceMap to_abundance_map(const BatchResult& batch, std::size_t lines, std::size_t samples,
                              std::vector<std::string> labels) {
  if (batch.pixels != lines * samples) {
    throw ShapeError("to_abundance_map: batch has " + std::to_string(batch.pixels) +
                     " pixels, image wants " + std::to_string(lines * samples));
  }
  AbundanceMap map;
  map.lines = lines;
  map.samples = samples;
  map.endmembers = batch.endmembers;
  map.values = batch.abundances;
  if (labels.empty()) {
    for (std::size_t e = 0; e < batch.endmembers; ++e) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "em%02zu", e + 1);
      labels.emplace_back(buf);
    }
  }
  if (labels.size() != batch.endmembers) {
    throw ShapeError("to_abundance_map: label count does not match endmember count");
  }
  map.labels = std::move(labels);
  return map;
}

std::vector<std::filesystem::path> write_abundance_outputs(const AbundanceMap& map,
                                                           const std::filesystem::path& directory,
                                                           const OutputFormats& formats) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec && !fs::is_directory(directory)) {
    throw IoError("cannot create output directory " + directory.string());
  }

  std::vector<fs::path> written;
  const std::size_t n = map.endmembers;

  // sentinel pixels: any row whose first component is negative
  std::vector<std::size_t> sentinels;
  for (std::size_t p = 0; p < map.lines * map.samples; ++p) {
    if (map.values[p * n] < 0.0) sentinels.push_back(p);
  }

  for (std::size_t e = 0; e < n; ++e) {
    const std::string& label = map.labels[e];
    if (formats.csv) {
      const fs::path path = directory / ("abundance_" + label + ".csv");
      std::ofstream f(path, std::ios::binary);
      if (!f) throw IoError("cannot open " + path.string());
      char buf[40];
      for (std::size_t l = 0; l < map.lines; ++l) {
        for (std::size_t s = 0; s < map.samples; ++s) {
          std::snprintf(buf, sizeof buf, "%.17g", map.at(l, s, e));
          f << (s ? "," : "") << buf;
        }
        f << "\n";
      }
      if (!f) throw IoError("write failed for " + path.string());
      written.push_back(path);
    }
    if (formats.pgm) {
      double peak = 0.0;
      for (std::size_t p = 0; p < map.lines * map.samples; ++p) {
        peak = std::max(peak, map.values[p * n + e]);
      }
      const fs::path path = directory / ("abundance_" + label + ".pgm");
      std::ofstream f(path, std::ios::binary);
      if (!f) throw IoError("cannot open " + path.string());
      f << "P5\n" << map.samples << " " << map.lines << "\n255\n";
      std::vector<unsigned char> rowbuf(map.samples);
      for (std::size_t l = 0; l < map.lines; ++l) {
        for (std::size_t s = 0; s < map.samples; ++s) {
          const double v = map.at(l, s, e);
          double scaled = (peak > 0.0 && v > 0.0) ? std::round(255.0 * v / peak) : 0.0;
          scaled = std::clamp(scaled, 0.0, 255.0);
          rowbuf[s] = static_cast<unsigned char>(scaled);
        }
        f.write(reinterpret_cast<const char*>(rowbuf.data()),
                static_cast<std::streamsize>(rowbuf.size()));
      }
      if (!f) throw IoError("write failed for " + path.string());
      written.push_back(path);
    }
  }

  {
    const fs::path path = directory / "sentinel_pixels.csv";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    f << "pixel,line,sample\n";
    for (std::size_t p : sentinels) {
      f << p << "," << p / map.samples << "," << p % map.samples << "\n";
    }
    written.push_back(path);
  }
  return written;
}

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot open " + file.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

std::vector<std::byte> read_binary_file(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("cannot open " + file.string());
  const std::streamsize size = f.tellg();
  f.seekg(0);
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !f.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw IoError("read failed for " + file.string());
  }
  return bytes;
}

}  // namespace vbunmix
