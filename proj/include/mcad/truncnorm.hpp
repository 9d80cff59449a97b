// Gaussian special functions and interval-posterior moments.
//
// interval_posterior() is the scalar core of the quantized-output channel:
// given a Gaussian prior z ~ N(p, nu) and the observation that z + w fell in
// the half-open interval (a, b] with w ~ N(0, s), it returns the posterior
// mean and variance of z. The joint (z, z+w) is Gaussian, so the answer is
// exact truncated-normal algebra; the work is in keeping it stable when the
// interval sits tens of standard deviations into a tail.
#pragma once

namespace mcad {

double norm_pdf(double x);
double norm_cdf(double x);

// exp(x^2) * erfc(x), finite for arbitrarily large positive x.
double erfcx(double x);

struct Moments1D {
  double mean = 0.0;
  double var = 0.0;
  bool degenerate = false;    // fallback path was taken
  bool var_clamped = false;   // raw truncated variance left [0,1] and was clamped
};

// Posterior of z ~ N(p, nu) given (z + w) in (a, b], w ~ N(0, s).
// a may be -inf, b may be +inf. Guarantees 0 <= var <= nu.
Moments1D interval_posterior(double p, double nu, double a, double b, double s);

// Transcription of the sign/min/max formulation (cross-check path only;
// accurate on moderate bins, not tail-safe). `level` is the reproduction
// value of the bin, used only for its sign; bins never straddle zero.
Moments1D interval_posterior_signform(double p, double nu, double a, double b,
                                      double s, double level);

}  // namespace mcad
