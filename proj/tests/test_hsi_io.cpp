#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vbunmix/errors.hpp"
#include "vbunmix/hsi_io.hpp"

using namespace vbunmix;

#ifndef VBUNMIX_FIXTURE_DIR
#define VBUNMIX_FIXTURE_DIR "tests/fixtures"
#endif

namespace {

const std::filesystem::path kFixtures = VBUNMIX_FIXTURE_DIR;

HsiCube load_fixture_cube(const std::string& stem) {
  const EnviHeader h = parse_envi_header(read_text_file(kFixtures / (stem + ".hdr")));
  return load_cube(h, read_binary_file(kFixtures / (stem + ".raw")));
}

}  // namespace

TEST_CASE("ENVI header: nominal parse") {
  const auto h = parse_envi_header(
      "samples = 191\nlines = 250\nbands = 224\ninterleave = bip\ndata type = 2\n"
      "byte order = 0\n");
  CHECK(h.samples == 191);
  CHECK(h.lines == 250);
  CHECK(h.bands == 224);
  CHECK(h.interleave == Interleave::BIP);
  CHECK(h.data_type == CubeDataType::Int16);
  CHECK(h.byte_order == ByteOrder::Little);
  CHECK(h.header_offset == 0);
}

TEST_CASE("ENVI header: unknown keys ignored, case-insensitive, brace lists skipped") {
  const auto h = parse_envi_header(
      "ENVI\ndescription = {\n  two line\n  description }\nSAMPLES = 3\nLines = 2\nBANDS = 4\n"
      "Interleave = BSQ\nData Type = 4\nByte Order = 1\nheader offset = 6\n"
      "wavelength units = Nanometers\nsome future key = 9\n");
  CHECK(h.samples == 3);
  CHECK(h.lines == 2);
  CHECK(h.bands == 4);
  CHECK(h.interleave == Interleave::BSQ);
  CHECK(h.data_type == CubeDataType::Float32);
  CHECK(h.byte_order == ByteOrder::Big);
  CHECK(h.header_offset == 6);
}

TEST_CASE("ENVI header: errors name the problem") {
  CHECK_THROWS_WITH_AS(
      parse_envi_header("samples = 3\nlines = 2\ninterleave = bip\ndata type = 2\nbyte order = 0\n"),
      doctest::Contains("bands"), ParseError);
  CHECK_THROWS_WITH_AS(parse_envi_header("samples = 2\nlines = 2\nbands = 2\ninterleave = bif\n"
                                         "data type = 2\nbyte order = 0\n"),
                       doctest::Contains("interleave"), ParseError);
  CHECK_THROWS_WITH_AS(parse_envi_header("samples = 2\nlines = 2\nbands = 2\ninterleave = bip\n"
                                         "data type = 3\nbyte order = 0\n"),
                       doctest::Contains("data type"), ParseError);
}

TEST_CASE("golden cubes: all three interleaves agree with the addressing table") {
  for (const std::string stem : {"cube2x2x2_bsq", "cube2x2x2_bil", "cube2x2x2_bip"}) {
    const HsiCube cube = load_fixture_cube(stem);
    REQUIRE(cube.lines == 2);
    REQUIRE(cube.samples == 2);
    REQUIRE(cube.bands == 2);
    for (std::size_t l = 0; l < 2; ++l) {
      for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t b = 0; b < 2; ++b) {
          CHECK(cube.at(l, s, b) == double(4 * l + 2 * s + b + 1));
        }
      }
    }
  }
}

TEST_CASE("golden cubes: big-endian float32 decodes to the same logical cube") {
  const HsiCube le = load_fixture_cube("cube2x2x2_bsq");
  const HsiCube be = load_fixture_cube("cube2x2x2_f32be");
  CHECK(le.data == be.data);
}

TEST_CASE("load_cube: truncated payload is rejected with byte counts") {
  const EnviHeader h = parse_envi_header(read_text_file(kFixtures / "cube2x2x2_bsq.hdr"));
  auto raw = read_binary_file(kFixtures / "cube2x2x2_bsq.raw");
  raw.pop_back();
  CHECK_THROWS_WITH_AS(load_cube(h, raw), doctest::Contains("expected 16 bytes, got 15"),
                       IoError);
}

TEST_CASE("band exclusion: parsing and the cuprite preset") {
  const auto preset = BandExclusion::parse("cuprite-1997");
  CHECK(preset.excluded.size() == 36);
  CHECK(preset.retained(224) == 188);

  const auto ranges = BandExclusion::parse("1-2,104-113,148-167,221-224");
  CHECK(ranges.excluded == preset.excluded);

  const auto single = BandExclusion::parse("5,2,2,9-9");
  CHECK(single.excluded == std::vector<std::size_t>{2, 5, 9});

  CHECK(BandExclusion::parse("none").excluded.empty());
  CHECK(BandExclusion::parse("").excluded.empty());

  CHECK_THROWS_AS(BandExclusion::parse("abc"), ParseError);
  CHECK_THROWS_AS(BandExclusion::parse("4-2"), ParseError);
  CHECK_THROWS_AS(BandExclusion::parse("0"), ParseError);
  CHECK_THROWS_AS(BandExclusion::parse("1,,2"), ParseError);
  CHECK_THROWS_AS(BandExclusion::parse("1-2x"), ParseError);
  CHECK_THROWS_AS(BandExclusion::parse("3y"), ParseError);
}

TEST_CASE("band exclusion: cube reduction") {
  HsiCube cube;
  cube.lines = 1;
  cube.samples = 2;
  cube.bands = 4;
  cube.data = {1, 2, 3, 4, 5, 6, 7, 8};

  const auto reduced = apply_band_exclusion(cube, BandExclusion::parse("2-3"));
  CHECK(reduced.bands == 2);
  CHECK(reduced.data == std::vector<double>{1, 4, 5, 8});

  const auto identity = apply_band_exclusion(cube, BandExclusion::none());
  CHECK(identity.data == cube.data);

  CHECK_THROWS_AS(apply_band_exclusion(cube, BandExclusion::parse("1-4")), std::domain_error);
  CHECK_THROWS_AS(apply_band_exclusion(cube, BandExclusion::parse("5")), std::domain_error);
}

TEST_CASE("band exclusion: paired matrix reduction keeps rows aligned") {
  // 4 bands, 2 endmembers; drop bands 2-3
  EndmemberMatrix phi(4, 2, {10, 20, 30, 40, 50, 60, 70, 80});
  const auto reduced = apply_band_exclusion(phi, BandExclusion::parse("2-3"));
  CHECK(reduced.bands() == 2);
  CHECK(reduced.at(0, 0) == 10);
  CHECK(reduced.at(1, 0) == 40);
  CHECK(reduced.at(0, 1) == 50);
  CHECK(reduced.at(1, 1) == 80);

  // the cube reduced by the same list stays aligned with the matrix rows
  HsiCube cube;
  cube.lines = 1;
  cube.samples = 1;
  cube.bands = 4;
  cube.data = {1, 2, 3, 4};
  const auto rcube = apply_band_exclusion(cube, BandExclusion::parse("2-3"));
  CHECK(rcube.data == std::vector<double>{1, 4});
}

TEST_CASE("endmember CSV: nominal and Cuprite-shaped") {
  const auto em = load_endmembers_csv("1,0\n0,1\n0,0\n");
  CHECK(em.bands() == 3);
  CHECK(em.endmember_count() == 2);
  CHECK(em.column_sq_norm(0) == doctest::Approx(1.0));
  CHECK(em.column_sq_norm(1) == doctest::Approx(1.0));

  std::string big;
  for (int k = 0; k < 188; ++k) {
    for (int i = 0; i < 14; ++i) big += (i ? "," : "") + std::to_string(0.1 + 0.01 * i + 0.001 * k);
    big += "\n";
  }
  const auto cuprite = load_endmembers_csv(big);
  CHECK(cuprite.bands() == 188);
  CHECK(cuprite.endmember_count() == 14);
}

TEST_CASE("endmember CSV: error positions") {
  CHECK_THROWS_WITH_AS(load_endmembers_csv("1,2\n3,x\n"), doctest::Contains("row 2, column 2"),
                       ParseError);
  CHECK_THROWS_WITH_AS(load_endmembers_csv("1,2\n3,\n"), doctest::Contains("row 2"), ParseError);
  CHECK_THROWS_WITH_AS(load_endmembers_csv("1,2\n3\n"), doctest::Contains("row 2"), ParseError);
  CHECK_THROWS_AS(load_endmembers_csv(""), ParseError);
  CHECK_THROWS_AS(load_endmembers_csv("1,2,\n"), ParseError);  // trailing comma
}

TEST_CASE("abundance outputs: scaling rule and round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "vbunmix_io_test";
  fs::remove_all(dir);

  BatchResult batch;
  batch.pixels = 4;
  batch.endmembers = 2;
  batch.abundances = {0.5, 0.125, 0.5, 0.25, 0.5, 0.0, 0.5, 0.5};
  batch.noise_precision.assign(4, 1.0);
  batch.reports.assign(4, {});
  const AbundanceMap map = to_abundance_map(batch, 2, 2);
  REQUIRE(map.labels.size() == 2);
  CHECK(map.labels[0] == "em01");

  write_abundance_outputs(map, dir);

  // constant map scales to full white
  {
    std::ifstream pgm(dir / "abundance_em01.pgm", std::ios::binary);
    REQUIRE(pgm.good());
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    pgm >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == 2);
    CHECK(h == 2);
    CHECK(maxval == 255);
    pgm.get();
    for (int i = 0; i < 4; ++i) CHECK(pgm.get() == 255);
  }
  // second map: 0.125/0.25/0/0.5 -> 64/128/0/255
  {
    std::ifstream pgm(dir / "abundance_em02.pgm", std::ios::binary);
    std::string magic;
    std::size_t w, h, maxval;
    pgm >> magic >> w >> h >> maxval;
    pgm.get();
    CHECK(pgm.get() == 64);
    CHECK(pgm.get() == 128);
    CHECK(pgm.get() == 0);
    CHECK(pgm.get() == 255);
  }
  // CSV round trip at full precision
  {
    const auto text = read_text_file(dir / "abundance_em02.csv");
    const auto back = load_endmembers_csv(text);  // same rectangular reader
    CHECK(back.bands() == 2);
    CHECK(back.at(0, 0) == 0.125);
    CHECK(back.at(0, 1) == 0.25);
    CHECK(back.at(1, 0) == 0.0);
    CHECK(back.at(1, 1) == 0.5);
  }
  fs::remove_all(dir);
}

TEST_CASE("abundance outputs: all-zero map and sentinel rows") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "vbunmix_io_test2";
  fs::remove_all(dir);

  BatchResult batch;
  batch.pixels = 2;
  batch.endmembers = 1;
  batch.abundances = {0.0, -1.0};  // second pixel failed
  batch.noise_precision = {1.0, -1.0};
  batch.reports.assign(2, {});
  const AbundanceMap map = to_abundance_map(batch, 1, 2);
  write_abundance_outputs(map, dir);

  std::ifstream pgm(dir / "abundance_em01.pgm", std::ios::binary);
  std::string magic;
  std::size_t w, h, maxval;
  pgm >> magic >> w >> h >> maxval;
  pgm.get();
  CHECK(pgm.get() == 0);  // zero map stays zero, no division blowup
  CHECK(pgm.get() == 0);  // sentinel renders black

  const auto sidecar = read_text_file(dir / "sentinel_pixels.csv");
  CHECK(sidecar.find("1,0,1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("interleave equivalence: one logical cube, three byte layouts") {
  // property check across a bigger cube than the golden fixture
  const std::size_t L = 3, S = 4, B = 5;
  std::vector<double> logical(L * S * B);
  for (std::size_t i = 0; i < logical.size(); ++i) logical[i] = double((i * 37) % 251) - 100.0;

  const auto encode_int16le = [&](Interleave il) {
    std::vector<std::byte> raw(L * S * B * 2);
    std::size_t pos = 0;
    const auto put = [&raw, &pos](double v) {
      const auto x = static_cast<std::int16_t>(v);
      raw[pos++] = static_cast<std::byte>(x & 0xff);
      raw[pos++] = static_cast<std::byte>((x >> 8) & 0xff);
    };
    if (il == Interleave::BSQ) {
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t s = 0; s < S; ++s) put(logical[(l * S + s) * B + b]);
    } else if (il == Interleave::BIL) {
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t s = 0; s < S; ++s) put(logical[(l * S + s) * B + b]);
    } else {
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t s = 0; s < S; ++s)
          for (std::size_t b = 0; b < B; ++b) put(logical[(l * S + s) * B + b]);
    }
    return raw;
  };

  EnviHeader h;
  h.samples = S;
  h.lines = L;
  h.bands = B;
  h.data_type = CubeDataType::Int16;
  h.byte_order = ByteOrder::Little;

  h.interleave = Interleave::BSQ;
  const HsiCube bsq = load_cube(h, encode_int16le(Interleave::BSQ));
  h.interleave = Interleave::BIL;
  const HsiCube bil = load_cube(h, encode_int16le(Interleave::BIL));
  h.interleave = Interleave::BIP;
  const HsiCube bip = load_cube(h, encode_int16le(Interleave::BIP));
  CHECK(bsq.data == bil.data);
  CHECK(bil.data == bip.data);
  CHECK(bsq.data == logical);
}

TEST_CASE("header offset is honored") {
  EnviHeader h;
  h.samples = 1;
  h.lines = 1;
  h.bands = 2;
  h.interleave = Interleave::BIP;
  h.data_type = CubeDataType::Int16;
  h.byte_order = ByteOrder::Little;
  h.header_offset = 3;
  const std::vector<std::byte> raw = {std::byte{9},  std::byte{9}, std::byte{9},
                                      std::byte{7},  std::byte{0}, std::byte{251},
                                      std::byte{255}};
  const HsiCube cube = load_cube(h, raw);
  CHECK(cube.at(0, 0, 0) == 7.0);
  CHECK(cube.at(0, 0, 1) == -5.0);
}

