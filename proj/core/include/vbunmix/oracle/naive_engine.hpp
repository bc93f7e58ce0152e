#pragma once

#include "vbunmix/model.hpp"

namespace vbunmix::oracle {

// Deliberately naive re-implementation of the coordinate-ascent sweep used
// as a reference: it rebuilds the column-deleted design for every abundance
// update, recomputes column norms and residual norms from scratch, and keeps
// no incremental bookkeeping. Shares only the scalar moment kernels with the
// production engine.
struct NaiveState {
  std::vector<double> mean_w;
  std::vector<double> mu;
  std::vector<double> sigma_sq;
  std::vector<double> sigma_tr_sq;
  std::vector<double> mean_w_sq;
  std::vector<double> mean_alpha;
  std::vector<double> mean_inv_alpha;
  std::vector<double> mean_b;
  double mean_beta = 0.0;
};

NaiveState naive_init(const PixelSpectrum& y, const EndmemberMatrix& phi,
                      const Hyperparameters& hyper);

void naive_sweep(NaiveState& state, const PixelSpectrum& y, const EndmemberMatrix& phi,
                 const Hyperparameters& hyper);

}  // namespace vbunmix::oracle
