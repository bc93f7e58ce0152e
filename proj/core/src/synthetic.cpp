#include "vbunmix/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "vbunmix/errors.hpp"
#include "vbunmix/rng.hpp"

namespace vbunmix {

namespace {

// Adds random Gaussian bumps over the normalized band axis.
void add_bumps(std::vector<double>& s, Rng& rng, std::size_t n_bumps, double width_lo,
               double width_hi, double amp_lo, double amp_hi) {
  const std::size_t bands = s.size();
  for (std::size_t j = 0; j < n_bumps; ++j) {
    const double amp = rng.uniform(amp_lo, amp_hi);
    const double center = rng.uniform(0.0, 1.0);
    const double width = rng.uniform(width_lo, width_hi);
    for (std::size_t k = 0; k < bands; ++k) {
      const double x = (bands == 1) ? 0.0 : static_cast<double>(k) / static_cast<double>(bands - 1);
      const double d = (x - center) / width;
      s[k] += amp * std::exp(-0.5 * d * d);
    }
  }
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SyntheticInstance generate_instance(std::size_t bands, std::size_t endmembers,
                                    std::size_t sparsity, double snr_db, double correlation,
                                    std::uint64_t seed) {
  if (sparsity < 1 || sparsity > endmembers || endmembers > bands) {
    throw std::domain_error("generate_instance: require 1 <= K <= N <= M");
  }
  if (!(correlation >= 0.0) || !(correlation < 1.0)) {
    throw std::domain_error("generate_instance: correlation must lie in [0, 1)");
  }
  const bool noiseless = std::isinf(snr_db) && snr_db > 0.0;
  if (!noiseless && !std::isfinite(snr_db)) {
    throw std::domain_error("generate_instance: snr_db must be finite or +inf");
  }

  Rng rng(seed);
  // Each signature is a smooth continuum (shared base blended in by the
  // correlation parameter) plus narrow distinctive features, like mineral
  // spectra: broadly similar curves that differ in localized bands.
  std::vector<double> base(bands, 0.0);
  add_bumps(base, rng, 3, 0.10, 0.35, 0.2, 0.9);

  std::vector<double> columns(bands * endmembers);
  for (std::size_t i = 0; i < endmembers; ++i) {
    std::vector<double> smooth(bands, 0.0);
    add_bumps(smooth, rng, 3, 0.10, 0.35, 0.2, 0.9);
    std::vector<double> features(bands, 0.0);
    add_bumps(features, rng, 6, 0.008, 0.040, 0.25, 0.75);
    for (std::size_t k = 0; k < bands; ++k) {
      columns[i * bands + k] =
          0.30 + correlation * base[k] + (1.0 - correlation) * smooth[k] + features[k];
    }
  }
  EndmemberMatrix phi(bands, endmembers, std::move(columns));

  // active set: uniform draw without replacement
  std::vector<std::size_t> order(endmembers);
  for (std::size_t i = 0; i < endmembers; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < endmembers; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.raw() % (endmembers - i));
    std::swap(order[i], order[j]);
  }
  std::vector<double> w_true(endmembers, 0.0);
  for (std::size_t j = 0; j < sparsity; ++j) w_true[order[j]] = rng.uniform(0.1, 1.0);

  std::vector<double> clean(bands, 0.0);
  for (std::size_t i = 0; i < endmembers; ++i) {
    if (w_true[i] == 0.0) continue;
    const auto col = phi.column(i);
    for (std::size_t k = 0; k < bands; ++k) clean[k] += col[k] * w_true[i];
  }

  double signal_power = 0.0;
  for (double v : clean) signal_power += v * v;
  signal_power /= static_cast<double>(bands);

  SyntheticInstance inst{std::move(phi), std::move(w_true), 0.0, PixelSpectrum{}, seed,
                         snr_db,         correlation,       sparsity};
  if (noiseless) {
    inst.noise_precision_true = std::numeric_limits<double>::infinity();
    inst.y.values = std::move(clean);
  } else {
    const double noise_var = signal_power / std::pow(10.0, snr_db / 10.0);
    inst.noise_precision_true = 1.0 / noise_var;
    const double noise_sd = std::sqrt(noise_var);
    inst.y.values.resize(bands);
    for (std::size_t k = 0; k < bands; ++k) {
      inst.y.values[k] = clean[k] + noise_sd * rng.normal();
    }
  }
  return inst;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t save_instance(const SyntheticInstance& inst, const std::filesystem::path& file) {
  std::ostringstream out;
  out << "vbunmix-instance 1\n";
  out << "seed " << inst.seed << "\n";
  out << "bands " << inst.phi.bands() << "\n";
  out << "endmembers " << inst.phi.endmember_count() << "\n";
  out << "sparsity " << inst.sparsity << "\n";
  out << "snr_db " << (std::isinf(inst.snr_db) ? "inf" : format_full(inst.snr_db)) << "\n";
  out << "correlation " << format_full(inst.correlation) << "\n";
  out << "noise_precision_true "
      << (std::isinf(inst.noise_precision_true) ? "inf"
                                                : format_full(inst.noise_precision_true))
      << "\n";
  out << "w_true";
  for (double v : inst.w_true) out << " " << format_full(v);
  out << "\ny";
  for (double v : inst.y.values) out << " " << format_full(v);
  out << "\nphi\n";  // one row per band
  for (std::size_t k = 0; k < inst.phi.bands(); ++k) {
    for (std::size_t i = 0; i < inst.phi.endmember_count(); ++i) {
      out << (i ? " " : "") << format_full(inst.phi.at(k, i));
    }
    out << "\n";
  }
  const std::string text = out.str();
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("save_instance: cannot open " + file.string());
  f << text;
  if (!f) throw IoError("save_instance: write failed for " + file.string());
  return fnv1a64({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

SyntheticInstance load_instance(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw IoError("load_instance: cannot open " + file.string());
  std::stringstream buf;
  buf << f.rdbuf();

  std::string tag;
  int version = 0;
  buf >> tag >> version;
  if (tag != "vbunmix-instance" || version != 1) {
    throw ParseError("load_instance: not a vbunmix instance file: " + file.string());
  }

  std::uint64_t seed = 0;
  std::size_t bands = 0, endmembers = 0, sparsity = 0;
  std::string snr_s, prec_s;
  double correlation = 0.0;
  std::string key;
  buf >> key >> seed >> key >> bands >> key >> endmembers >> key >> sparsity;
  buf >> key >> snr_s >> key >> correlation >> key >> prec_s;
  if (!buf || bands == 0 || endmembers == 0) {
    throw ParseError("load_instance: malformed header in " + file.string());
  }
  const auto parse_real = [](const std::string& s) {
    return s == "inf" ? std::numeric_limits<double>::infinity() : std::stod(s);
  };

  std::vector<double> w_true(endmembers);
  buf >> key;
  for (auto& v : w_true) buf >> v;
  std::vector<double> y(bands);
  buf >> key;
  for (auto& v : y) buf >> v;
  std::vector<double> columns(bands * endmembers);
  buf >> key;
  for (std::size_t k = 0; k < bands; ++k) {
    for (std::size_t i = 0; i < endmembers; ++i) buf >> columns[i * bands + k];
  }
  if (!buf) throw ParseError("load_instance: truncated data in " + file.string());

  SyntheticInstance inst{EndmemberMatrix(bands, endmembers, std::move(columns)),
                         std::move(w_true),
                         parse_real(prec_s),
                         PixelSpectrum{std::move(y)},
                         seed,
                         parse_real(snr_s),
                         correlation,
                         sparsity};
  return inst;
}

GibbsEstimate gibbs_sample(const PixelSpectrum& y, const EndmemberMatrix& phi,
                           const Hyperparameters& hyper, std::size_t n_samples,
                           std::size_t burn_in, std::uint64_t seed) {
  hyper.validate();
  const std::size_t m = phi.bands();
  const std::size_t n = phi.endmember_count();
  if (m > 50 || n > 8) {
    throw std::invalid_argument("gibbs_sample: reference sampler is capped at M <= 50, N <= 8");
  }
  if (y.size() != m) throw ShapeError("gibbs_sample: spectrum/matrix dimension mismatch");
  if (n_samples < 100) throw std::domain_error("gibbs_sample: need at least 100 samples");

  Rng rng(seed);
  std::vector<double> w(n, 0.0);
  std::vector<double> alpha(n, 1.0);
  std::vector<double> b(n, 1.0);
  double beta = static_cast<double>(m) / (std::inner_product(y.values.begin(), y.values.end(),
                                                             y.values.begin(), 0.0) +
                                          1e-12);
  std::vector<double> residual = y.values;

  // batch means for the MC standard error
  const std::size_t n_batches = 50;
  const std::size_t batch_len = n_samples / n_batches;
  std::vector<double> w_sum(n, 0.0), w_sq_sum(n, 0.0);
  std::vector<double> batch_acc(n, 0.0);
  std::vector<std::vector<double>> batch_means(n);
  double beta_sum = 0.0, beta_batch_acc = 0.0;
  std::vector<double> beta_batch_means;

  const std::size_t total = burn_in + n_samples;
  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto col = phi.column(i);
      const double col_sq = phi.column_sq_norm(i);
      const double denom = alpha[i] + col_sq;
      double proj = col_sq * w[i];
      for (std::size_t k = 0; k < m; ++k) proj += col[k] * residual[k];
      const double mu = proj / denom;
      const double sigma = std::sqrt(1.0 / (beta * denom));
      const double w_new = rng.truncated_normal(mu, sigma);
      const double shift = w[i] - w_new;
      if (shift != 0.0) {
        for (std::size_t k = 0; k < m; ++k) residual[k] += col[k] * shift;
      }
      w[i] = w_new;

      const double w_sq = std::max(w[i] * w[i], 1e-300);
      alpha[i] = rng.inverse_gaussian(std::sqrt(b[i] / (beta * w_sq)), b[i]);
      b[i] = rng.gamma(hyper.kappa + 1.0, hyper.nu + 0.5 / alpha[i]);
    }
    double fit = 0.0;
    for (double r : residual) fit += r * r;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad += alpha[i] * w[i] * w[i];
    beta = rng.gamma(hyper.rho + 0.5 * static_cast<double>(m + n),
                     hyper.delta + 0.5 * fit + 0.5 * quad);

    if (it >= burn_in) {
      const std::size_t t = it - burn_in;
      for (std::size_t i = 0; i < n; ++i) {
        w_sum[i] += w[i];
        w_sq_sum[i] += w[i] * w[i];
        batch_acc[i] += w[i];
      }
      beta_sum += beta;
      beta_batch_acc += beta;
      if (batch_len > 0 && (t + 1) % batch_len == 0) {
        for (std::size_t i = 0; i < n; ++i) {
          batch_means[i].push_back(batch_acc[i] / static_cast<double>(batch_len));
          batch_acc[i] = 0.0;
        }
        beta_batch_means.push_back(beta_batch_acc / static_cast<double>(batch_len));
        beta_batch_acc = 0.0;
      }
    }
  }

  const auto batch_stderr = [](const std::vector<double>& means) {
    if (means.size() < 2) return std::numeric_limits<double>::infinity();
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= static_cast<double>(means.size());
    double var = 0.0;
    for (double v : means) var += (v - mean) * (v - mean);
    var /= static_cast<double>(means.size() - 1);
    return std::sqrt(var / static_cast<double>(means.size()));
  };

  GibbsEstimate est;
  est.samples = n_samples;
  est.w_mean.resize(n);
  est.w_stderr.resize(n);
  est.w_variance.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n_samples);
  for (std::size_t i = 0; i < n; ++i) {
    est.w_mean[i] = w_sum[i] * inv_n;
    est.w_variance[i] = std::max(0.0, w_sq_sum[i] * inv_n - est.w_mean[i] * est.w_mean[i]);
    est.w_stderr[i] = batch_stderr(batch_means[i]);
  }
  est.beta_mean = beta_sum * inv_n;
  est.beta_stderr = batch_stderr(beta_batch_means);
  return est;
}

}  // namespace vbunmix
