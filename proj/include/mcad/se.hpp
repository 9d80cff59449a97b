#pragma once

#include <string>
#include <vector>

#include "mcad/engine.hpp"

namespace mcad {

struct SeConfig {
  // Monte Carlo draws per (frame, virtual AP, iteration) used to evaluate the
  // posterior-variance expectation. Rounded up so every cooperation-set user
  // gets the same number of draws.
  int n_samples = 100000;
  int i_max = 10;
  uint64_t seed = 1;
  // Experimental: replace the scalar Gaussian output-variance average with the
  // value the coupled run actually measured (needed when that run used a
  // quantized output channel, whose variance has no scalar closed form here).
  bool use_measured_nu_z = false;
};

// Scalar variance state, one cell per (window frame, local virtual AP).
// Cells whose cooperation set is empty carry no signal energy; they are
// flagged undefined and hold NaN.
struct SeState {
  int w_len = 0;
  int n_vaps = 0;
  std::vector<double> nu_x;      // [k * n_vaps + vi]
  std::vector<char> defined;     // same layout

  double at(int k, int vi) const { return nu_x[(size_t)k * n_vaps + vi]; }
  bool is_defined(int k, int vi) const {
    return defined[(size_t)k * n_vaps + vi] != 0;
  }
};

// Prior-energy initialization: nu_x = (1/|set|) sum_n p1(n) rho0 g(n,u).
// p1 is the stationary (or configured) activity probability per user.
SeState se_init(const WindowProblem& prob);

// One scalar recursion step. For each cell: nu_p = (|set|/L) nu_x, the output
// stage collapses it to nu_z (scalar Gaussian average, or the measured value
// when cfg.use_measured_nu_z), nu_r = nu_p^2 / (nu_p - nu_z), and the new
// nu_x is the sampled mean posterior variance of the sparsity denoiser under
// r = x0 + CN(0, nu_r) with x0 drawn from the per-user activity prior and the
// activity probability taken from the coupled run's snapshot. A non-informative
// output stage (nu_z >= nu_p, or infinite effective noise) keeps each user at
// its prior variance phi * rho0 * g.
SeState se_step(const SeState& state, const WindowProblem& prob,
                const SeSnapshot& snap, const SeConfig& cfg);

// Predicted-vs-measured overlay from one coupled run: the algorithm runs once
// with a snapshot hook, and the scalar recursion consumes each iteration's
// activity probabilities and effective noise. Entry 0 of every trajectory is
// the zero-estimate reference (0 dB), matching DetectionResult::nmse_trajectory.
struct SeOverlay {
  SeState init;
  std::vector<SeState> states;          // states[i] = after iteration i+1
  std::vector<double> predicted_mse;    // plain mean of nu_x over cells
  std::vector<double> predicted_nmse_db;  // pooled, entry 0 = 0 dB
  std::vector<double> measured_nmse_db;   // from the coupled run, same length
  DetectionResult result;
};

SeOverlay se_track(const WindowProblem& prob, const SeConfig& cfg);

// CSV overlay table: iteration, predicted_mse_db, measured_nmse_db.
std::string se_csv(const SeOverlay& overlay);

}  // namespace mcad
