#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vbunmix/errors.hpp"
#include "vbunmix/hsi_io.hpp"
#include "vbunmix/model.hpp"
#include "vbunmix/oracle/checks.hpp"
#include "vbunmix/synthetic.hpp"
#include "vbunmix/vb_engine.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct HyperFlags {
  double rho = 1e-6;
  double delta = 1e-6;
  double kappa = 1e-6;
  double nu = 1e-6;

  vbunmix::Hyperparameters to_hyper() const { return {rho, delta, kappa, nu}; }

  void attach(CLI::App* cmd) {
    cmd->add_option("--rho", rho, "Noise precision prior shape")->capture_default_str();
    cmd->add_option("--delta", delta, "Noise precision prior rate")->capture_default_str();
    cmd->add_option("--kappa", kappa, "Scale hyperprior shape")->capture_default_str();
    cmd->add_option("--nu", nu, "Scale hyperprior rate")->capture_default_str();
  }
};

vbunmix::OutputFormats parse_formats(const std::string& text) {
  vbunmix::OutputFormats f{false, false};
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    if (item == "csv") {
      f.csv = true;
    } else if (item == "pgm") {
      f.pgm = true;
    } else if (!item.empty()) {
      throw vbunmix::ParseError("unknown output format '" + item + "' (choose from csv, pgm)");
    }
    pos = comma + 1;
    if (pos > text.size()) break;
  }
  if (!f.csv && !f.pgm) throw vbunmix::ParseError("no output format selected");
  return f;
}

double rmse(std::span<const double> a, std::span<const double> b) {
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(se / static_cast<double>(a.size()));
}

struct UnmixArgs {
  std::string header_path;
  std::string cube_path;
  std::string endmembers_path;
  std::string out_dir;
  std::string exclude = "none";
  std::string formats = "csv,pgm";
  double scale = 1.0;
  double tol = 1e-6;
  std::size_t max_sweeps = 500;
  std::size_t min_sweeps = 5;
  unsigned threads = 1;
  bool renormalize_asc = false;
  HyperFlags hyper;
};

int cmd_unmix(const UnmixArgs& a) {
  using namespace vbunmix;
  const auto t0 = Clock::now();

  const EnviHeader header = parse_envi_header(read_text_file(a.header_path));
  HsiCube cube = load_cube(header, read_binary_file(a.cube_path));
  EndmemberMatrix endmembers = load_endmembers_csv(read_text_file(a.endmembers_path));
  const std::size_t bands_original = cube.bands;

  const BandExclusion exclusion = BandExclusion::parse(a.exclude);
  if (!exclusion.excluded.empty()) {
    cube = apply_band_exclusion(cube, exclusion);
    if (endmembers.bands() == bands_original) {
      endmembers = apply_band_exclusion(endmembers, exclusion);
    }
  }
  if (endmembers.bands() != cube.bands) {
    throw ShapeError("endmember matrix has " + std::to_string(endmembers.bands()) +
                     " rows, cube has " + std::to_string(cube.bands) + " retained bands");
  }
  if (a.scale != 1.0) {
    for (double& v : cube.data) v *= a.scale;
  }

  EngineOptions opts{a.tol, a.max_sweeps, a.min_sweeps};
  BatchResult batch = unmix_image(cube.pixel_block(), endmembers, a.hyper.to_hyper(), opts,
                                  a.threads);

  if (a.renormalize_asc) {
    // post-hoc sum-to-one rescaling; a display convention, not part of the model
    for (std::size_t p = 0; p < batch.pixels; ++p) {
      double* row = batch.abundances.data() + p * batch.endmembers;
      if (row[0] < 0.0) continue;
      double sum = 0.0;
      for (std::size_t e = 0; e < batch.endmembers; ++e) sum += row[e];
      if (sum > 0.0) {
        for (std::size_t e = 0; e < batch.endmembers; ++e) row[e] /= sum;
      }
    }
  }

  const AbundanceMap map = to_abundance_map(batch, cube.lines, cube.samples);
  write_abundance_outputs(map, a.out_dir, parse_formats(a.formats));

  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();

  std::size_t converged = 0;
  double sweep_sum = 0.0;
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& r : batch.reports) {
    converged += r.converged;
    sweep_sum += static_cast<double>(r.iterations);
    ++histogram[r.iterations];
  }

  {
    std::ofstream mf(fs::path(a.out_dir) / "manifest.txt", std::ios::binary);
    if (!mf) throw IoError("cannot write manifest in " + a.out_dir);
    mf << "manifest = vbunmix-unmix\n";
    mf << "header = " << a.header_path << "\n";
    mf << "cube = " << a.cube_path << "\n";
    mf << "endmembers = " << a.endmembers_path << "\n";
    mf << "exclude = " << a.exclude << "\n";
    mf << "scale = " << a.scale << "\n";
    mf << "lines = " << cube.lines << "\n";
    mf << "samples = " << cube.samples << "\n";
    mf << "bands_original = " << bands_original << "\n";
    mf << "bands_retained = " << cube.bands << "\n";
    mf << "endmember_count = " << endmembers.endmember_count() << "\n";
    mf << "tolerance = " << a.tol << "\n";
    mf << "max_sweeps = " << a.max_sweeps << "\n";
    mf << "min_sweeps = " << a.min_sweeps << "\n";
    mf << "threads = " << a.threads << "\n";
    mf << "renormalize_asc = " << (a.renormalize_asc ? 1 : 0) << "\n";
    mf << "pixels = " << batch.pixels << "\n";
    mf << "converged_pixels = " << converged << "\n";
    mf << "failed_pixels = " << batch.failures.size() << "\n";
    mf << "mean_sweeps = " << (batch.pixels ? sweep_sum / static_cast<double>(batch.pixels) : 0.0)
       << "\n";
    mf << "wall_time_s = " << wall << "\n";
    mf << "\n[sweep_histogram]\nsweeps,count\n";
    for (const auto& [sweeps, count] : histogram) mf << sweeps << "," << count << "\n";
    mf << "\n[failed_pixels]\npixel,line,sample,sweep,reason\n";
    for (const auto& f : batch.failures) {
      mf << f.pixel << "," << f.pixel / cube.samples << "," << f.pixel % cube.samples << ","
         << f.sweep << "," << f.reason << "\n";
    }
  }

  std::cout << "unmixed " << batch.pixels << " pixels (" << cube.lines << "x" << cube.samples
            << ", " << cube.bands << " bands, " << endmembers.endmember_count()
            << " endmembers) in " << wall << " s; " << converged << " converged, "
            << batch.failures.size() << " failed\n";
  std::cout << "outputs in " << a.out_dir << "\n";
  return batch.failures.empty() ? 0 : 2;
}

struct SynthArgs {
  std::size_t bands = 188;
  std::size_t endmembers = 14;
  std::size_t active = 3;
  double snr_db = 30.0;
  double correlation = 0.9;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  std::size_t max_sweeps = 500;
  std::string out = "-";
  HyperFlags hyper;
};

int cmd_synth(const SynthArgs& a) {
  using namespace vbunmix;
  const auto t0 = Clock::now();

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (a.out != "-") {
    file.open(a.out, std::ios::binary);
    if (!file) throw IoError("cannot open " + a.out);
    out = &file;
  }

  *out << "seed,rmse_vb,rmse_nnls,precision,recall,f1,beta_est,beta_true,sweeps,converged\n";
  char line[256];
  double f1_sum = 0.0, rmse_vb_sum = 0.0, rmse_nnls_sum = 0.0;
  std::size_t beta_ok = 0;
  const Hyperparameters hyper = a.hyper.to_hyper();
  const EngineOptions opts{a.tol, a.max_sweeps, 5};

  for (std::size_t t = 0; t < a.trials; ++t) {
    const std::uint64_t seed = a.seed + t;
    const SyntheticInstance inst =
        generate_instance(a.bands, a.endmembers, a.active, a.snr_db, a.correlation, seed);
    const UnmixResult vb = run(inst.y, inst.phi, hyper, opts);
    const std::vector<double> nn = nnls_baseline(inst.y, inst.phi);

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < a.endmembers; ++i) {
      const bool est = vb.abundances[i] >= 0.01;
      const bool truth = inst.w_true[i] > 0.0;
      tp += est && truth;
      fp += est && !truth;
      fn += !est && truth;
    }
    const double precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                                       : 1.0;
    const double recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                                    : 1.0;
    const double f1 = (precision + recall > 0.0)
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    const double rv = rmse(vb.abundances, inst.w_true);
    const double rn = rmse(nn, inst.w_true);
    f1_sum += f1;
    rmse_vb_sum += rv;
    rmse_nnls_sum += rn;
    if (std::isfinite(inst.noise_precision_true) &&
        std::abs(vb.noise_precision / inst.noise_precision_true - 1.0) <= 0.2) {
      ++beta_ok;
    }

    std::snprintf(line, sizeof line, "%llu,%.8e,%.8e,%.4f,%.4f,%.4f,%.8e,%.8e,%zu,%d\n",
                  static_cast<unsigned long long>(seed), rv, rn, precision, recall, f1,
                  vb.noise_precision, inst.noise_precision_true, vb.report.iterations,
                  vb.report.converged ? 1 : 0);
    *out << line;
  }

  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
  const double n = static_cast<double>(a.trials);
  std::cerr << "trials " << a.trials << ": mean F1 " << f1_sum / n << ", mean RMSE vb "
            << rmse_vb_sum / n << " vs nnls " << rmse_nnls_sum / n << ", beta within 20% in "
            << beta_ok << "/" << a.trials << ", wall " << wall << " s\n";
  return 0;
}

struct CheckArgs {
  std::size_t points = 50;
  std::size_t instances = 200;
  std::size_t sweeps = 3;
  std::size_t samples = 20000;
  std::size_t burn_in = 2000;
  std::uint64_t seed = 1;
  bool inject_fault = false;
};

int cmd_check(const CheckArgs& a) {
  using namespace vbunmix::oracle;
  std::vector<CheckResult> results;

  auto append = [&results](std::vector<CheckResult> r) {
    results.insert(results.end(), r.begin(), r.end());
  };
  append(special_function_fidelity_checks());
  append(marginal_derivation_checks(a.points, a.seed));
  append(engine_reference_checks(a.instances, a.sweeps, a.seed));
  append(gibbs_agreement_checks(a.samples, a.burn_in, a.seed));
  append(invariant_stress_checks(30, a.seed));
  if (a.inject_fault) {
    results.push_back({"fault injection (harness self-test)", false, 1.0, 0.0, ""});
  }

  const int failures = report(results, std::cout);
  std::cout << (failures == 0 ? "all checks passed\n"
                              : std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

struct InfoArgs {
  std::string header_path;
  std::string cube_path;
  std::string endmembers_path;
  std::string exclude = "none";
};

int cmd_info(const InfoArgs& a) {
  using namespace vbunmix;
  if (a.header_path.empty() && a.endmembers_path.empty()) {
    throw ParseError("info: pass --header and/or --endmembers");
  }

  std::size_t retained_bands = 0;
  if (!a.header_path.empty()) {
    const EnviHeader h = parse_envi_header(read_text_file(a.header_path));
    const BandExclusion excl = BandExclusion::parse(a.exclude);
    retained_bands = excl.retained(h.bands);
    std::cout << "header: " << a.header_path << "\n";
    std::cout << "  samples = " << h.samples << ", lines = " << h.lines << ", bands = " << h.bands
              << "\n";
    std::cout << "  interleave = " << to_string(h.interleave) << ", data type = "
              << (h.data_type == CubeDataType::Int16 ? "int16" : "float32") << ", byte order = "
              << (h.byte_order == ByteOrder::Little ? "little" : "big") << ", offset = "
              << h.header_offset << "\n";
    std::cout << "  retained bands under exclusion '" << a.exclude << "': " << retained_bands
              << "\n";
    if (!a.cube_path.empty()) {
      const HsiCube cube = load_cube(h, read_binary_file(a.cube_path));
      double lo = cube.data.empty() ? 0.0 : cube.data.front();
      double hi = lo;
      for (double v : cube.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      std::cout << "  cube: " << a.cube_path << " decodes cleanly, value range [" << lo << ", "
                << hi << "]\n";
    }
  }
  if (!a.endmembers_path.empty()) {
    EndmemberMatrix em = load_endmembers_csv(read_text_file(a.endmembers_path));
    std::cout << "endmembers: " << a.endmembers_path << "\n";
    std::cout << "  M = " << em.bands() << ", N = " << em.endmember_count() << "\n";
    if (retained_bands != 0 && em.bands() != retained_bands) {
      const BandExclusion excl = BandExclusion::parse(a.exclude);
      if (em.bands() > retained_bands) {
        em = apply_band_exclusion(em, excl);
        std::cout << "  after exclusion: M = " << em.bands() << "\n";
      }
    }
    std::cout << "  condition estimate = " << condition_estimate(em) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational Bayes sparse spectral unmixing"};
  app.require_subcommand(1);

  UnmixArgs ua;
  CLI::App* unmix = app.add_subcommand("unmix", "Unmix a hyperspectral cube into abundance maps");
  unmix->add_option("--header", ua.header_path, "ENVI header file")->required();
  unmix->add_option("--cube", ua.cube_path, "Raw binary cube")->required();
  unmix->add_option("--endmembers", ua.endmembers_path, "Endmember matrix CSV (M rows x N cols)")
      ->required();
  unmix->add_option("--out", ua.out_dir, "Output directory")->required();
  unmix->add_option("--exclude", ua.exclude,
                    "Band exclusion: preset name (none, cuprite-1997) or ranges like "
                    "'1-2,104-113'")
      ->capture_default_str();
  unmix->add_option("--formats", ua.formats, "Comma list of outputs: csv,pgm")
      ->capture_default_str();
  unmix->add_option("--scale", ua.scale, "Multiply radiances by this factor before unmixing")
      ->capture_default_str();
  unmix->add_option("--tol", ua.tol, "Convergence tolerance on max abundance change per sweep")
      ->capture_default_str();
  unmix->add_option("--max-sweeps", ua.max_sweeps, "Sweep cap per pixel")->capture_default_str();
  unmix->add_option("--min-sweeps", ua.min_sweeps, "Minimum sweeps per pixel")
      ->capture_default_str();
  unmix->add_option("--threads", ua.threads, "Worker threads (output is identical for any value)")
      ->capture_default_str();
  unmix->add_flag("--renormalize-asc", ua.renormalize_asc,
                  "Post-hoc sum-to-one rescaling of each abundance row (display convention, "
                  "outside the model)");
  ua.hyper.attach(unmix);

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "Benchmark on synthetic instances against NNLS");
  synth->add_option("--bands", sa.bands, "Bands M")->capture_default_str();
  synth->add_option("--endmembers", sa.endmembers, "Endmembers N")->capture_default_str();
  synth->add_option("--active", sa.active, "Active endmembers K")->capture_default_str();
  synth->add_option("--snr", sa.snr_db, "SNR in dB (inf for noiseless)")->capture_default_str();
  synth->add_option("--correlation", sa.correlation, "Column correlation in [0, 1)")
      ->capture_default_str();
  synth->add_option("--trials", sa.trials, "Number of seeds")->capture_default_str();
  synth->add_option("--seed", sa.seed, "Base seed")->capture_default_str();
  synth->add_option("--tol", sa.tol, "Engine tolerance")->capture_default_str();
  synth->add_option("--max-sweeps", sa.max_sweeps, "Engine sweep cap")->capture_default_str();
  synth->add_option("--out", sa.out, "CSV report path, or - for stdout")->capture_default_str();
  sa.hyper.attach(synth);

  CheckArgs ca;
  CLI::App* check = app.add_subcommand("check", "Run the quadrature and sampler oracle suites");
  check->add_option("--points", ca.points, "Marginal-density check points")->capture_default_str();
  check->add_option("--instances", ca.instances, "Engine-vs-reference instances")
      ->capture_default_str();
  check->add_option("--sweeps", ca.sweeps, "Sweeps compared per instance")->capture_default_str();
  check->add_option("--samples", ca.samples, "Gibbs samples")->capture_default_str();
  check->add_option("--burn-in", ca.burn_in, "Gibbs burn-in")->capture_default_str();
  check->add_option("--seed", ca.seed, "Seed")->capture_default_str();
  check->add_flag("--inject-fault", ca.inject_fault, "Force one failing check (self-test)")
      ->group("");  // hidden

  InfoArgs ia;
  CLI::App* info = app.add_subcommand("info", "Describe a dataset without unmixing it");
  info->add_option("--header", ia.header_path, "ENVI header file");
  info->add_option("--cube", ia.cube_path, "Raw binary cube (validated against the header)");
  info->add_option("--endmembers", ia.endmembers_path, "Endmember matrix CSV");
  info->add_option("--exclude", ia.exclude, "Band exclusion preset or ranges")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (unmix->parsed()) return cmd_unmix(ua);
    if (synth->parsed()) return cmd_synth(sa);
    if (check->parsed()) return cmd_check(ca);
    if (info->parsed()) return cmd_info(ia);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
