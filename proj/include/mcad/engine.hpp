// Joint activity detection and channel estimation over one sliding window:
// per-iteration activity refinement (forward/backward chain messages plus
// product combining across cooperating virtual APs), Onsager-corrected
// iterative channel estimation per (frame, virtual AP), effective-noise
// learning, and posterior fusion with an LLR threshold decision.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mcad/denoiser.hpp"
#include "mcad/netgen.hpp"
#include "mcad/phy.hpp"
#include "mcad/traffic.hpp"
#include "mcad/window.hpp"

namespace mcad {

// Measurement channel at one pilot symbol. The default Gaussian step lives
// in denoiser.hpp; the quantized-fronthaul posterior implements this too.
// vap identifies the observing virtual AP so a per-AP codebook can be used.
class OutputChannel {
 public:
  virtual ~OutputChannel() = default;
  virtual OutputStep step(cplx p_hat, double nu_p, cplx y,
                          double sigma_eff_sq, double nu_p_floor,
                          int vap) const = 0;
};

// kDcs keeps the fitted Markov chain; kCs collapses it to an i.i.d. prior
// with the same marginal, which drops all temporal coupling.
enum class PriorMode { kDcs, kCs };

struct InferenceConfig {
  double eps_conv = 1e-5;  // relative squared change tolerance
  int i_max = 50;
  double eps_p = 1e-12;  // probability clamp
  // Relaxation on the input-side update (estimate and its variance move
  // together, the correction term stays exact); 1 recovers the plain
  // recursion, which is also the fastest choice for dense iid pilots.
  double damping = 0.7;
  double iota = 0.0;     // LLR decision threshold
  PriorMode mode = PriorMode::kDcs;
  bool em_noise_learning = true;
  double sigma_eff_init = -1.0;  // <0: start from the synthesized noise power
  double nu_p_floor = 1e-18;
};

struct IterationTrace {
  int iteration = 0;       // 1-based
  double rel_change = 0.0;
  double nmse_lin = 0.0;   // pooled over coop pairs, whole window
  double sigma_eff_mean = 0.0;
  double mean_pi_left = 0.0;
};

std::string trace_csv_header();
std::string trace_csv_row(const IterationTrace& tr);

// Coupling snapshot for the state-evolution tracker: everything the scalar
// recursion needs from one algorithm iteration. phi(k, vi, j) is the
// refinement output for the j-th cooperation-set user of local vap vi at
// window frame k; sigma_eff is the effective noise the channel sweep of this
// iteration consumed (before any noise-learning update), nu_z the mean output
// variance that sweep produced.
struct SeSnapshot {
  int iteration = 0;  // 1-based
  int w_len = 0;
  int n_vaps = 0;
  std::vector<int> vap_ids;      // local -> global virtual AP
  std::vector<int> set_ofs;      // per-vap prefix; set_ofs[n_vaps] = slab size
  std::vector<double> phi_fwd;   // [k * slab + set_ofs[vi] + j]
  std::vector<double> sigma_eff;  // per local vap
  std::vector<double> nu_z_mean;  // [k * n_vaps + vi]
  std::vector<double> nu_x_mean;  // same layout; input variance of this sweep
  std::vector<double> nu_r_mean;  // same layout; mean pseudo-observation noise
  double phi(int k, int vi, int j) const {
    return phi_fwd[(size_t)k * set_ofs[n_vaps] + set_ofs[vi] + j];
  }
  double nu_z(int k, int vi) const {
    return nu_z_mean[(size_t)k * n_vaps + vi];
  }
  double nu_x(int k, int vi) const {
    return nu_x_mean[(size_t)k * n_vaps + vi];
  }
  double nu_r(int k, int vi) const {
    return nu_r_mean[(size_t)k * n_vaps + vi];
  }
};

// Onsager-corrected plug-in estimate for one (frame, virtual AP) block:
// nu_p[l] = sum_s |a_{l,s}|^2 nu_x[s],
// p_hat[l] = sum_s a_{l,s} x_hat[s] - nu_p[l] s_prev[l],
// columns restricted to the given user set.
void gamp_linear_step(const PilotMatrix& pilots, const int* users, int n_set,
                      const cplx* x_hat, const double* nu_x,
                      const cplx* s_prev, cplx* p_hat, double* nu_p);

struct WindowProblem {
  const NetworkLayout* layout = nullptr;
  const PilotMatrix* pilots = nullptr;
  const FrameSignals* signals = nullptr;
  const MarkovActivityParams* activity = nullptr;
  WindowSpec window;
  InferenceConfig config;
  const OutputChannel* channel = nullptr;  // null: Gaussian measurement
  int single_ap = -1;  // >=0: run only that AP's antennas over its coop users
  std::function<void(const IterationTrace&)> trace_hook;  // optional
  std::function<void(const SeSnapshot&)> se_hook;         // optional
};

struct DetectionResult {
  WindowSpec window;
  int n_users = 0;
  int n_target = 0;          // decided frames, window.t1 .. target_end
  std::vector<int> vap_ids;  // global virtual AP indices covered

  // Row-major [target frame][user]. In single-AP mode users outside the
  // cooperation set carry NaN posteriors/LLRs and decision 0.
  std::vector<double> posterior;
  std::vector<double> llr;
  std::vector<std::uint8_t> decision;

  // [target frame][local vap][user], zero outside the cooperation set.
  std::vector<cplx> x_hat;

  std::vector<double> sigma_eff;  // final, per local vap
  int iterations = 0;
  bool converged = false;
  // [0] = 1 at the zero initialization, one entry per iteration after;
  // NaN throughout when the window holds no true signal energy.
  std::vector<double> nmse_trajectory;
  std::vector<IterationTrace> trace;

  const double* posterior_row(int f) const {
    return posterior.data() + (size_t)f * n_users;
  }
  const double* llr_row(int f) const { return llr.data() + (size_t)f * n_users; }
  const std::uint8_t* decision_row(int f) const {
    return decision.data() + (size_t)f * n_users;
  }
  const cplx* x_hat_at(int f, int vi) const {
    return x_hat.data() + ((size_t)f * vap_ids.size() + vi) * n_users;
  }
};

DetectionResult run_window(const WindowProblem& prob);

}  // namespace mcad
