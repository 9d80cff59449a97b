#include "mcad/messages.hpp"

#include <cmath>
#include <stdexcept>

namespace mcad {

double steady_alpha(double p_a, double beta) {
  if (!(p_a > 0.0 && p_a < 1.0))
    throw std::invalid_argument("steady_alpha: p_a must be in (0,1)");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("steady_alpha: beta must be in [0,1]");
  if (beta == p_a) return p_a;  // stationary chain, keep it bit-exact
  double alpha = p_a * (1.0 - beta) / (1.0 - p_a);
  if (alpha > 1.0)
    throw std::invalid_argument(
        "steady_alpha: infeasible pair, needs p_a <= 1/(2-beta)");
  return alpha;
}

double steady_prob(double alpha, double beta) {
  return alpha / (1.0 + alpha - beta);
}

double clamp_prob(double p, double eps_p) {
  if (p < eps_p) return eps_p;
  if (p > 1.0 - eps_p) return 1.0 - eps_p;
  return p;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double combine_two(double a, double b) {
  if (b == 0.5) return a;
  if (a == 0.5) return b;
  double num = a * b;
  return num / ((1.0 - a) * (1.0 - b) + num);
}

double chain_fwd(double v, const ChainParams& cp) {
  if (cp.alpha == cp.beta) return cp.alpha;
  return cp.alpha * (1.0 - v) + cp.beta * v;
}

double chain_bwd(double q, const ChainParams& cp) {
  if (cp.alpha == cp.beta || q == 0.5) return 0.5;
  double num = (1.0 - cp.beta) * (1.0 - q) + cp.beta * q;
  double den = (2.0 - cp.alpha - cp.beta) * (1.0 - q) + (cp.alpha + cp.beta) * q;
  return num / den;
}

void forward_sweep(const double* pi_left, int t_w, const ChainParams& cp,
                   double eps_p, double* psi_right, double* varphi_left) {
  psi_right[0] = clamp_prob(cp.p1, eps_p);
  varphi_left[0] = clamp_prob(combine_two(pi_left[0], psi_right[0]), eps_p);
  for (int t = 1; t < t_w; ++t) {
    psi_right[t] = clamp_prob(chain_fwd(varphi_left[t - 1], cp), eps_p);
    varphi_left[t] = clamp_prob(combine_two(pi_left[t], psi_right[t]), eps_p);
  }
  // last frame has no successor factor, so its outgoing forward message is
  // the bare evidence; nothing downstream reads this slot
  varphi_left[t_w - 1] = pi_left[t_w - 1];
}

void backward_sweep(const double* pi_left, int t_w, const ChainParams& cp,
                    double eps_p, double* psi_left, double* varphi_right) {
  varphi_right[t_w - 1] = 0.5;
  psi_left[t_w - 1] = clamp_prob(pi_left[t_w - 1], eps_p);
  for (int t = t_w - 2; t >= 0; --t) {
    varphi_right[t] = clamp_prob(chain_bwd(psi_left[t + 1], cp), eps_p);
    psi_left[t] = clamp_prob(combine_two(pi_left[t], varphi_right[t]), eps_p);
  }
}

void temporal_prior(const double* psi_right, const double* varphi_right,
                    int t_w, double eps_p, double* pi_right) {
  for (int t = 0; t < t_w; ++t)
    pi_right[t] = clamp_prob(combine_two(psi_right[t], varphi_right[t]), eps_p);
}

double combine_ap_evidence(const double* phi_left, int n_aps, double eps_p) {
  if (n_aps == 1) return clamp_prob(phi_left[0], eps_p);
  double s = 0.0;
  for (int u = 0; u < n_aps; ++u) s += logit(clamp_prob(phi_left[u], eps_p));
  return clamp_prob(sigmoid(s), eps_p);
}

void per_ap_prior(double pi_right, const double* phi_left, int n_aps,
                  double eps_p, double* phi_right) {
  if (n_aps == 1) {
    phi_right[0] = clamp_prob(pi_right, eps_p);
    return;
  }
  double s = 0.0;
  for (int u = 0; u < n_aps; ++u) s += logit(clamp_prob(phi_left[u], eps_p));
  double lp = logit(clamp_prob(pi_right, eps_p));
  for (int u = 0; u < n_aps; ++u) {
    double ex = lp + s - logit(clamp_prob(phi_left[u], eps_p));
    phi_right[u] = clamp_prob(sigmoid(ex), eps_p);
  }
}

double fuse_llr(double pi_left, double psi_right, double varphi_right) {
  return logit(pi_left) + logit(psi_right) + logit(varphi_right);
}

double fuse_posterior(double pi_left, double psi_right, double varphi_right) {
  return sigmoid(fuse_llr(pi_left, psi_right, varphi_right));
}

}  // namespace mcad
