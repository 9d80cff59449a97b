// Scalar GAMP kernels: the Bernoulli-Gaussian input denoiser and the
// Gaussian output (residual) step. The quantized output step lives with the
// fronthaul code.
#pragma once

#include "mcad/rng.hpp"

namespace mcad {

struct BgResult {
  cplx x_hat{0.0, 0.0};
  double nu_x = 0.0;
  double pi = 0.0;             // posterior activity weight
  double phi_left_next = 0.0;  // evidence message at prior 1/2
};

// Posterior mean/variance of x under prior (1-phi) delta_0 + phi CN(0, g_eff)
// with pseudo observation r_hat = x + CN(0, nu_r). phi_right exactly 0 or 1
// short-circuits to the corresponding pure model; interior values are clamped
// to [eps_p, 1-eps_p] and the odds run in the log domain.
BgResult bg_denoiser(cplx r_hat, double nu_r, double g_eff, double phi_right,
                     double eps_p = 1e-12);

struct OutputStep {
  cplx z_hat{0.0, 0.0};
  double nu_z = 0.0;
  cplx s_hat{0.0, 0.0};
  double nu_s = 0.0;
};

// Gaussian measurement channel: posterior of z ~ CN(p_hat, nu_p) given
// y = z + CN(0, sigma_eff_sq), then the scaled-residual transform with the
// guarded division floor.
OutputStep gaussian_output_step(cplx p_hat, double nu_p, cplx y,
                                double sigma_eff_sq,
                                double nu_p_floor = 1e-18);

}  // namespace mcad
