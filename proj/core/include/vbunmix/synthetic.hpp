#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vbunmix/model.hpp"

namespace vbunmix {

// A sparse unmixing problem with known ground truth. Regenerating from the
// stored seed and parameters reproduces y bit for bit.
struct SyntheticInstance {
  EndmemberMatrix phi;
  std::vector<double> w_true;         // exactly K nonzeros
  double noise_precision_true = 0.0;  // +inf for the noiseless case
  PixelSpectrum y;
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  double correlation = 0.0;
  std::size_t sparsity = 0;           // K
};

// Smooth positive pseudo-spectra (sums of Gaussian bumps over the band axis,
// mixed with a shared base spectrum by `correlation`), a uniformly chosen
// K-sparse abundance vector with active values U(0.1, 1), and i.i.d. Gaussian
// noise at the precision implied by snr_db relative to |Phi w|^2 / M.
//
// Pass snr_db = +inf for a noiseless instance. Requires 1 <= K <= N <= M and
// correlation in [0, 1).
SyntheticInstance generate_instance(std::size_t bands, std::size_t endmembers,
                                    std::size_t sparsity, double snr_db, double correlation,
                                    std::uint64_t seed);

// Plain-text round trip for committed fixtures. save returns the FNV-1a
// checksum of the written bytes; the same hash is exposed for manifests.
std::uint64_t save_instance(const SyntheticInstance& inst, const std::filesystem::path& file);
SyntheticInstance load_instance(const std::filesystem::path& file);
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

struct GibbsEstimate {
  std::vector<double> w_mean;
  std::vector<double> w_stderr;   // batch-means Monte Carlo standard error
  std::vector<double> w_variance;
  double beta_mean = 0.0;
  double beta_stderr = 0.0;
  std::size_t samples = 0;
};

// Gibbs sampler on the same hierarchical model, used purely as a reference
// for the variational answers. Full conditionals: truncated normal for each
// w_i, inverse Gaussian for each alpha_i, Gamma for each b_i and for beta.
//
// Small instances only (M <= 50, N <= 8); anything larger throws
// std::invalid_argument, this is not a production path.
GibbsEstimate gibbs_sample(const PixelSpectrum& y, const EndmemberMatrix& phi,
                           const Hyperparameters& hyper, std::size_t n_samples,
                           std::size_t burn_in, std::uint64_t seed);

// Lawson-Hanson active set with Householder QR subproblems. Returns the
// nonnegative least-squares solution with scaled KKT residual <= 1e-8, or
// throws NnlsError if the iteration cap is hit first.
std::vector<double> nnls_baseline(const PixelSpectrum& y, const EndmemberMatrix& phi);

// Unconstrained least squares over the same columns (QR), exposed for
// baseline comparisons.
std::vector<double> unconstrained_least_squares(const PixelSpectrum& y,
                                                const EndmemberMatrix& phi);

}  // namespace vbunmix
