#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vbunmix/model.hpp"

namespace vbunmix {

struct EngineOptions {
  double tolerance = 1e-6;     // on max |change in <w_i>| per sweep
  std::size_t max_sweeps = 500;
  std::size_t min_sweeps = 5;

  void validate() const;  // tolerance > 0, max_sweeps >= min_sweeps >= 1
};

// Individual coordinate-ascent updates. Each reads the freshest values in
// the state (Gauss-Seidel); `sweep` strings them together in the fixed
// order: noise once, then per endmember abundance -> precision -> scale.
//
// All of them keep the state's positivity and moment identities intact.
void update_noise_factor(PosteriorState& state, const PixelSpectrum& y,
                         const EndmemberMatrix& phi, const Hyperparameters& hyper);
void update_abundance_factor(std::size_t i, PosteriorState& state, const PixelSpectrum& y,
                             const EndmemberMatrix& phi);
void update_precision_factor(std::size_t i, PosteriorState& state);
void update_scale_factor(std::size_t i, PosteriorState& state, const Hyperparameters& hyper);

void sweep(PosteriorState& state, const PixelSpectrum& y, const EndmemberMatrix& phi,
           const Hyperparameters& hyper);

struct UnmixResult {
  std::vector<double> abundances;  // final <w>, strictly positive
  double noise_precision = 0.0;    // final <beta>
  ConvergenceReport report;
};

// Sweeps from init_state until max |change in <w_i>| <= tolerance (after at
// least min_sweeps) or max_sweeps is reached.
//
// Throws NumericalError if a non-finite value appears mid-run.
UnmixResult run(const PixelSpectrum& y, const EndmemberMatrix& phi, const Hyperparameters& hyper,
                const EngineOptions& opts = {});

// Non-owning view of a stack of pixels, one contiguous spectrum each.
struct PixelBlock {
  const double* data = nullptr;
  std::size_t pixels = 0;
  std::size_t bands = 0;

  std::span<const double> pixel(std::size_t p) const noexcept {
    return {data + p * bands, bands};
  }
};

struct PixelFailure {
  std::size_t pixel = 0;
  std::size_t sweep = 0;
  std::string reason;
};

struct BatchResult {
  std::size_t pixels = 0;
  std::size_t endmembers = 0;
  std::vector<double> abundances;       // pixels x N, row-major; failed rows are all -1
  std::vector<double> noise_precision;  // per pixel; -1 on failure
  std::vector<ConvergenceReport> reports;
  std::vector<PixelFailure> failures;   // sorted by pixel index

  std::span<const double> row(std::size_t p) const noexcept {
    return {abundances.data() + p * endmembers, endmembers};
  }
};

// Runs `run` on every pixel. Pixels are independent, so the result is
// identical for any thread count; failed pixels are recorded and filled with
// the -1 sentinel row instead of aborting the batch.
BatchResult unmix_image(const PixelBlock& block, const EndmemberMatrix& phi,
                        const Hyperparameters& hyper, const EngineOptions& opts = {},
                        unsigned threads = 1);

}  // namespace vbunmix
