#pragma once

#include <vector>

#include "mcad/engine.hpp"
#include "mcad/quantizer.hpp"

namespace mcad {

// Observations after the finite fronthaul: y replaced by codewords, plus the
// per-virtual-AP codebooks that produced them (the CU needs them to invert
// codewords back into bins).
struct QuantizedSignals {
  FrameSignals signals;
  std::vector<UniformQuantizer> codecs;
};

// Quantize every received pilot sample with a per-AP uniform codebook. The
// range follows the analytic mean received power at that AP (all antennas
// of an AP share one codebook), bits_per_real = b^r_y per real component.
QuantizedSignals qf_quantize_signals(const NetworkLayout& layout,
                                     const FrameSignals& fs, double p_a,
                                     int bits_per_real, double clip = 3.0);

// Measurement channel for codeword observations: recovers the bin of each
// real component and returns its exact interval posterior. The component
// variances come back individually capped at the prior, so nu_z <= nu_p
// holds by construction; clamp and midpoint-fallback events are counted for
// audit.
class QfOutputChannel : public OutputChannel {
 public:
  explicit QfOutputChannel(std::vector<UniformQuantizer> codecs);
  OutputStep step(cplx p_hat, double nu_p, cplx y, double sigma_eff_sq,
                  double nu_p_floor, int vap) const override;
  long long clamp_events() const { return clamps_; }
  long long fallback_events() const { return fallbacks_; }

 private:
  std::vector<UniformQuantizer> codecs_;
  mutable long long clamps_ = 0;
  mutable long long fallbacks_ = 0;
};

// Complete quantize-and-forward run: quantize the observations, swap in the
// codeword channel, pin the effective noise to the thermal floor (the EM
// update is unreliable at coarse resolutions), run the detector. keep_em
// restores the caller's noise-learning setting for experiments.
DetectionResult qf_detect(const WindowProblem& prob, int bits_per_real,
                          double clip = 3.0, bool keep_em = false);

// The LLR codebook for detect-and-forward: symmetric over [-20, 20], where
// the activity posterior is already numerically 0 or 1.
UniformQuantizer build_llr_quantizer(int bits);

// What one AP sends to the CU in DF mode: its cooperation set and the LLRs
// of the decided frames, row-major [target frame][set index].
struct DfLocalReport {
  int ap = -1;
  std::vector<int> users;
  std::vector<double> llr;
};

// Local detection at one AP from its own measurements only.
DfLocalReport df_local_detect(const WindowProblem& prob, int ap);

// Fused DF decisions: per (frame, user), the sum of quantized LLRs over the
// APs serving that user, thresholded at iota. Users no AP serves keep a NaN
// sum and an idle decision.
struct DfDecision {
  int n_users = 0;
  int n_target = 0;
  std::vector<double> llr_sum;           // [f][n]
  std::vector<std::uint8_t> decision;    // [f][n]
  const double* llr_row(int f) const { return llr_sum.data() + (size_t)f * n_users; }
  const std::uint8_t* decision_row(int f) const {
    return decision.data() + (size_t)f * n_users;
  }
};

DfDecision df_aggregate(const std::vector<DfLocalReport>& reports,
                        const NetworkLayout& layout, int n_target,
                        const UniformQuantizer& codec, double iota);

// Complete detect-and-forward run over every AP; iota comes from the
// problem's config.
DfDecision df_detect(const WindowProblem& prob, int bits_llr);

}  // namespace mcad
