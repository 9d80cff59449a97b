#include "mcad/denoiser.hpp"

#include <cmath>

#include "mcad/messages.hpp"

namespace mcad {

BgResult bg_denoiser(cplx r_hat, double nu_r, double g_eff, double phi_right,
                     double eps_p) {
  const double nu = nu_r, g = g_eff;
  const double r2 = std::norm(r_hat);
  // (1/nu - 1/(nu+g))|r|^2 without the cancelling subtraction
  const double xi = g / (nu * (nu + g)) * r2;
  const double lgr = std::log(nu / (nu + g));
  const double gamma_sc = g / (g + nu);
  const cplx gamma = gamma_sc * r_hat;
  const double nu_gamma = nu * gamma_sc;

  BgResult out;
  out.phi_left_next = sigmoid(xi + lgr);
  double pi;
  if (phi_right <= 0.0)
    pi = 0.0;
  else if (phi_right >= 1.0)
    pi = 1.0;
  else
    pi = sigmoid(logit(clamp_prob(phi_right, eps_p)) + lgr + xi);
  out.pi = pi;
  out.x_hat = pi * gamma;
  out.nu_x = pi * ((1.0 - pi) * std::norm(gamma) + nu_gamma);
  return out;
}

OutputStep gaussian_output_step(cplx p_hat, double nu_p, cplx y,
                                double sigma_eff_sq, double nu_p_floor) {
  OutputStep out;
  const double den = nu_p + sigma_eff_sq;
  out.z_hat = (nu_p * y + sigma_eff_sq * p_hat) / den;
  out.nu_z = nu_p * sigma_eff_sq / den;
  const double npf = std::max(nu_p, nu_p_floor);
  out.s_hat = (out.z_hat - p_hat) / npf;
  out.nu_s = (1.0 - out.nu_z / npf) / npf;
  return out;
}

}  // namespace mcad
