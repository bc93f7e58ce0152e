// Regenerates every committed fixture under tests/fixtures/. Run from the
// repository root after changing the generator or the reference sampler:
//
//   build/tests/vbunmix_make_fixtures tests/fixtures
//
// and commit the result. The unit tests fail if the committed files drift
// from what this program produces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "vbunmix/model.hpp"
#include "vbunmix/oracle/checks.hpp"
#include "vbunmix/rng.hpp"
#include "vbunmix/synthetic.hpp"

namespace fs = std::filesystem;
using namespace vbunmix;

namespace {

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    std::cerr << "write failed: " << path << "\n";
    std::exit(1);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    std::cerr << "write failed: " << path << "\n";
    std::exit(1);
  }
}

std::string header_text(std::size_t samples, std::size_t lines, std::size_t bands,
                        const char* interleave, int data_type, int byte_order) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "ENVI\nsamples = %zu\nlines = %zu\nbands = %zu\ninterleave = %s\n"
                "data type = %d\nbyte order = %d\nheader offset = 0\n",
                samples, lines, bands, interleave, data_type, byte_order);
  return buf;
}

// 2x2x2 cube with values 1..8 laid out as value = 4*line + 2*sample + band + 1
std::vector<double> tiny_cube_values() {
  std::vector<double> v(8);
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t b = 0; b < 2; ++b) v[(l * 2 + s) * 2 + b] = double(4 * l + 2 * s + b + 1);
    }
  }
  return v;
}

std::vector<unsigned char> encode_int16le(const std::vector<double>& vals) {
  std::vector<unsigned char> out;
  for (double v : vals) {
    const auto i = static_cast<std::int16_t>(v);
    out.push_back(static_cast<unsigned char>(i & 0xff));
    out.push_back(static_cast<unsigned char>((i >> 8) & 0xff));
  }
  return out;
}

std::vector<unsigned char> encode_float32be(const std::vector<double>& vals) {
  std::vector<unsigned char> out;
  for (double v : vals) {
    const float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    out.push_back(static_cast<unsigned char>((u >> 24) & 0xff));
    out.push_back(static_cast<unsigned char>((u >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((u >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>(u & 0xff));
  }
  return out;
}

// reorders pixel-major (line, sample, band) values into the raw layout
std::vector<double> to_interleave(const std::vector<double>& v, std::size_t L, std::size_t S,
                                  std::size_t B, const std::string& il) {
  std::vector<double> out(v.size());
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t b = 0; b < B; ++b) {
        std::size_t dst;
        if (il == "bsq") {
          dst = (b * L + l) * S + s;
        } else if (il == "bil") {
          dst = (l * B + b) * S + s;
        } else {
          dst = (l * S + s) * B + b;
        }
        out[dst] = v[(l * S + s) * B + b];
      }
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "tests/fixtures";
  fs::create_directories(dir);
  std::string manifest = "# fixture provenance: seeds and FNV-1a-64 content hashes\n";
  char line[256];

  // tiny golden cubes, one per interleave, plus a big-endian float variant
  const auto vals = tiny_cube_values();
  for (const std::string il : {"bsq", "bil", "bip"}) {
    const auto raw = encode_int16le(to_interleave(vals, 2, 2, 2, il));
    write_bytes(dir / ("cube2x2x2_" + il + ".raw"), raw);
    write_text(dir / ("cube2x2x2_" + il + ".hdr"), header_text(2, 2, 2, il.c_str(), 2, 0));
    std::snprintf(line, sizeof line, "cube2x2x2_%s.raw fnv1a64 %016llx\n", il.c_str(),
                  static_cast<unsigned long long>(fnv1a64({raw.data(), raw.size()})));
    manifest += line;
  }
  {
    const auto raw = encode_float32be(to_interleave(vals, 2, 2, 2, "bil"));
    write_bytes(dir / "cube2x2x2_f32be.raw", raw);
    write_text(dir / "cube2x2x2_f32be.hdr", header_text(2, 2, 2, "bil", 4, 1));
    std::snprintf(line, sizeof line, "cube2x2x2_f32be.raw fnv1a64 %016llx\n",
                  static_cast<unsigned long long>(fnv1a64({raw.data(), raw.size()})));
    manifest += line;
  }

  // reference instance for the sampler comparison
  {
    const SyntheticInstance inst = oracle::reference_fixture();
    const std::uint64_t hash = save_instance(inst, dir / "m20n5_instance.txt");
    std::snprintf(line, sizeof line, "m20n5_instance.txt seed %llu fnv1a64 %016llx\n",
                  static_cast<unsigned long long>(inst.seed),
                  static_cast<unsigned long long>(hash));
    manifest += line;

    const GibbsEstimate g = gibbs_sample(inst.y, inst.phi, Hyperparameters{}, 50000, 5000, 1234);
    std::string text = "vbunmix-gibbs-reference 1\nsamples 50000\nburn_in 5000\nseed 1234\n";
    text += "w_mean";
    for (double v : g.w_mean) {
      std::snprintf(line, sizeof line, " %.17g", v);
      text += line;
    }
    text += "\nw_stderr";
    for (double v : g.w_stderr) {
      std::snprintf(line, sizeof line, " %.17g", v);
      text += line;
    }
    std::snprintf(line, sizeof line, "\nbeta_mean %.17g\nbeta_stderr %.17g\n", g.beta_mean,
                  g.beta_stderr);
    text += line;
    write_text(dir / "m20n5_gibbs_reference.txt", text);
    std::snprintf(line, sizeof line, "m20n5_gibbs_reference.txt fnv1a64 %016llx\n",
                  static_cast<unsigned long long>(
                      fnv1a64({reinterpret_cast<const unsigned char*>(text.data()),
                               text.size()})));
    manifest += line;
  }

  // the large synthetic benchmark instance (trial 1 of the recovery suite)
  {
    const SyntheticInstance inst = generate_instance(188, 14, 3, 30.0, 0.9, 1);
    const std::uint64_t hash = save_instance(inst, dir / "m188n14_instance.txt");
    std::snprintf(line, sizeof line, "m188n14_instance.txt seed 1 fnv1a64 %016llx\n",
                  static_cast<unsigned long long>(hash));
    manifest += line;
  }

  // small demo scene for CLI end-to-end tests: 6x8 pixels, 40 bands, 6
  // endmembers, radiances quantized to int16 at a gain of 2000
  {
    const std::size_t L = 6, S = 8, M = 40, N = 6;
    const SyntheticInstance proto = generate_instance(M, N, 2, 35.0, 0.6, 424242);
    Rng rng(11);
    std::vector<double> cube(L * S * M);
    for (std::size_t p = 0; p < L * S; ++p) {
      // each pixel mixes 2 random endmembers plus mild noise
      std::vector<double> w(N, 0.0);
      w[rng.raw() % N] = rng.uniform(0.2, 0.9);
      w[rng.raw() % N] = rng.uniform(0.1, 0.6);
      for (std::size_t k = 0; k < M; ++k) {
        double v = 0.0;
        for (std::size_t i = 0; i < N; ++i) v += proto.phi.at(k, i) * w[i];
        v += 0.002 * rng.normal();
        cube[p * M + k] = std::round(std::max(0.0, v) * 2000.0);
      }
    }
    write_bytes(dir / "demo.raw", encode_int16le(to_interleave(cube, L, S, M, "bip")));
    write_text(dir / "demo.hdr", header_text(S, L, M, "bip", 2, 0));
    std::string csv;
    for (std::size_t k = 0; k < M; ++k) {
      for (std::size_t i = 0; i < N; ++i) {
        std::snprintf(line, sizeof line, "%s%.17g", i ? "," : "", proto.phi.at(k, i));
        csv += line;
      }
      csv += "\n";
    }
    write_text(dir / "demo_endmembers.csv", csv);
    manifest += "demo.raw seed 424242/11 gain 2000\n";
  }

  write_text(dir / "manifest.txt", manifest);
  std::cout << "fixtures written to " << dir << "\n";
  return 0;
}
