#pragma once

#include <vector>

#include "mcad/netgen.hpp"
#include "mcad/phy.hpp"
#include "mcad/traffic.hpp"

namespace mcad {

// Problem bundle small enough for exhaustive enumeration. Frames follow the
// same 1-based window convention the detector uses.
struct TinyInstance {
  const NetworkLayout* layout = nullptr;
  const PilotMatrix* pilots = nullptr;
  const FrameSignals* signals = nullptr;
  const MarkovActivityParams* activity = nullptr;
  int t0 = 1;
  int t_w = 1;
  double sigma_sq = -1.0;  // <0 takes the synthesized noise variance
};

// Exact per-(frame, user) activity marginals computed by weighing every one
// of the 2^(N*t_w) activity patterns with its Gaussian marginal likelihood
// (channels integrated out) times the chain prior, then summing. Output is
// row-major [k][n] with k the frame offset inside the window. Throws when
// the pattern count would exceed 2^24.
std::vector<double> exact_activity_posterior(const TinyInstance& inst);

// Exact smoothing of a single on/off chain by brute force over the 2^T
// length-T sequences. ratios[t] is the per-frame evidence ratio
// p(obs_t | active) / p(obs_t | idle); zero is allowed and kills the
// active branch for that frame. T is capped at 12.
std::vector<double> exact_chain_smoother(const std::vector<double>& ratios,
                                         const MarkovActivityParams& act);

// Reference estimate x = A^H y, valid only when the pilot columns are
// orthonormal. A Gram matrix further than tol from the identity is
// rejected, since the projection is no longer the least-squares solution.
std::vector<cplx> ls_channel_recovery(const PilotMatrix& pilots, const cplx* y,
                                      double tol = 1e-9);

}  // namespace mcad
