// Activity-belief algebra: the two-state Markov chain, the per-frame
// forward/backward sweeps, cross-AP evidence combination, and the final
// posterior fusion. Everything operates on clamped probabilities; odds
// products run in the log domain.
#pragma once

#include <cstdint>

namespace mcad {

// Transition convention: alpha = P(active | previously idle),
// beta = P(active | previously active). Steady state p = alpha/(1+alpha-beta).
struct ChainParams {
  double alpha = 0.0;
  double beta = 0.0;
  double p1 = 0.0;  // activity probability at the first window frame
};

// alpha that makes p_a stationary for a given beta; throws std::invalid_argument
// when no valid alpha exists (requires p_a <= 1/(2-beta)).
double steady_alpha(double p_a, double beta);
double steady_prob(double alpha, double beta);

double clamp_prob(double p, double eps_p);
double logit(double p);
double sigmoid(double x);

// Normalized product of two Bernoulli beliefs: ab / ((1-a)(1-b) + ab).
// A 1/2 on either side passes the other through bit-exactly.
double combine_two(double a, double b);

// One chain transition applied to a belief about the previous frame, and the
// reverse-direction counterpart. alpha == beta collapses both to constants
// bit-exactly, which is what makes the stationary special case an exact
// reduction rather than an approximate one.
double chain_fwd(double v, const ChainParams& cp);
double chain_bwd(double q, const ChainParams& cp);

// Sweeps over one user's window, length t_w, evidence pi_left[t].
// forward: psi_right[t0] = p1, then alternating transition / evidence
// combine; the stored varphi_left at the last frame is the bare evidence
// (the absent successor contributes nothing), which no later step consumes.
// backward: seeded with the uninformative 1/2 at the last frame.
void forward_sweep(const double* pi_left, int t_w, const ChainParams& cp,
                   double eps_p, double* psi_right, double* varphi_left);
void backward_sweep(const double* pi_left, int t_w, const ChainParams& cp,
                    double eps_p, double* psi_left, double* varphi_right);

// Extrinsic per-frame activity prior from the chain only.
void temporal_prior(const double* psi_right, const double* varphi_right,
                    int t_w, double eps_p, double* pi_right);

// Product-combine the per-AP evidence for one (frame, user).
double combine_ap_evidence(const double* phi_left, int n_aps, double eps_p);

// Refined per-AP prior: chain prior plus every other AP's evidence.
void per_ap_prior(double pi_right, const double* phi_left, int n_aps,
                  double eps_p, double* phi_right);

// Final fusion of evidence, forward and backward chain messages.
double fuse_llr(double pi_left, double psi_right, double varphi_right);
double fuse_posterior(double pi_left, double psi_right, double varphi_right);

}  // namespace mcad
