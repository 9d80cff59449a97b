#include "mcad/truncnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcad {

namespace {
const double kInvSqrt2Pi = 0.3989422804014326779399461;
const double kInvSqrt2 = 0.7071067811865475244008444;
const double kSqrtPi = 1.7724538509055160272981675;
const double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(-t) = 2 exp(t^2) - erfcx(t); overflows past t ~ 26.6, which the
    // interval code never reaches (it reflects intervals instead).
    double t = -x;
    return 2.0 * std::exp(t * t) - erfcx(t);
  }
  if (x <= 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series: erfcx(x) ~ 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!!/(2x^2)^k.
  // At x = 25 the k = 8 term is already below 1e-18.
  double ix2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * ix2;
    sum += term;
    if (std::fabs(term) < 1e-18) break;
  }
  return sum / (x * kSqrtPi);
}

namespace {

// Standardized truncated-normal statistics of N(0,1) on (ka, kb]:
//   mu_t = (pdf(ka) - pdf(kb)) / m
//   r2   = (ka pdf(ka) - kb pdf(kb)) / m          (terms at +-inf vanish)
//   var_t = 1 + r2 - mu_t^2
// with m = Phi(kb) - Phi(ka). Tail-safe via erfcx ratios.
struct StdTrunc {
  double mu_t;
  double r2;
  bool ok;
};

// pdf(k)/Phi(k) for k << 0, i.e. the lower-tail hazard, stable for any depth.
double lower_hazard(double k) {
  // Phi(k) = 0.5 erfc(-k/sqrt2) = pdf(k) * erfcx(-k/sqrt2) * sqrt(pi/2)... in
  // ratio form: pdf/Phi = 2/(sqrt(2 pi)) / erfcx(-k/sqrt2) * e^{...} cancels:
  //   Phi(k) = 0.5 e^{-k^2/2} erfcx(-k/sqrt2)  =>  pdf/Phi = 2 kInvSqrt2Pi...
  return 2.0 * kInvSqrt2Pi / erfcx(-k * kInvSqrt2);
}

StdTrunc std_trunc(double ka, double kb) {
  StdTrunc out{0.0, 0.0, true};
  bool fa = std::isfinite(ka);
  bool fb = std::isfinite(kb);
  if (!fa && !fb) return out;  // whole line: prior untouched
  if (!fa) {
    // (-inf, kb]
    if (kb > -8.0) {
      double m = norm_cdf(kb);
      out.mu_t = -norm_pdf(kb) / m;
      out.r2 = -kb * norm_pdf(kb) / m;
    } else {
      double h = lower_hazard(kb);
      out.mu_t = -h;
      out.r2 = -kb * h;
    }
    return out;
  }
  if (!fb) {
    // (ka, inf)
    if (ka < 8.0) {
      double m = norm_cdf(-ka);
      out.mu_t = norm_pdf(ka) / m;
      out.r2 = ka * norm_pdf(ka) / m;
    } else {
      double h = lower_hazard(-ka);  // pdf(ka)/Phi(-ka)
      out.mu_t = h;
      out.r2 = ka * h;
    }
    return out;
  }
  // Finite interval. Reflect so that its center is non-negative; mu_t is odd
  // and r2 even under (ka,kb) -> (-kb,-ka).
  bool reflected = false;
  if (ka + kb < 0.0) {
    double t = ka;
    ka = -kb;
    kb = -t;
    reflected = true;
  }
  double dk = kb - ka;
  if (dk < 1e-4) {
    // Narrow bin: second-order expansion around the midpoint; also the
    // numerically safe regime when both edges are deep in one tail.
    double km = 0.5 * (ka + kb);
    out.mu_t = km * (1.0 - dk * dk / 12.0);
    // var_t of a narrow slice is dk^2/12; encode it through r2 so the common
    // var_t = 1 + r2 - mu_t^2 reconstruction below stays uniform.
    out.r2 = out.mu_t * out.mu_t + dk * dk / 12.0 - 1.0;
    if (reflected) out.mu_t = -out.mu_t;
    return out;
  }
  if (ka >= 4.0) {
    // Both edges in the upper tail: scale out exp(-ka^2/2).
    double ea = erfcx(ka * kInvSqrt2);
    double eb = erfcx(kb * kInvSqrt2);
    double d = std::exp(-0.5 * (kb - ka) * (kb + ka));  // e^{(ka^2-kb^2)/2}
    double den = ea - d * eb;
    if (!(den > 0.0)) {
      out.ok = false;
      return out;
    }
    out.mu_t = 2.0 * kInvSqrt2Pi * (1.0 - d) / den;
    out.r2 = 2.0 * kInvSqrt2Pi * (ka - kb * d) / den;
  } else {
    // Moderate interval: direct erfc difference is well conditioned here.
    double m = 0.5 * (std::erfc(ka * kInvSqrt2) - std::erfc(kb * kInvSqrt2));
    if (!(m > 0.0)) {
      out.ok = false;
      return out;
    }
    out.mu_t = (norm_pdf(ka) - norm_pdf(kb)) / m;
    out.r2 = (ka * norm_pdf(ka) - kb * norm_pdf(kb)) / m;
  }
  if (reflected) out.mu_t = -out.mu_t;
  return out;
}

// Gaussian-measurement fallback: combine prior N(p, nu) with a pseudo
// observation N(obs, obs_var).
Moments1D gauss_combine(double p, double nu, double obs, double obs_var) {
  Moments1D m;
  m.degenerate = true;
  double den = nu + obs_var;
  if (!(den > 0.0)) {
    m.mean = p;
    m.var = 0.0;
    return m;
  }
  m.mean = (nu * obs + obs_var * p) / den;
  m.var = nu * obs_var / den;
  return m;
}

}  // namespace

Moments1D interval_posterior(double p, double nu, double a, double b,
                             double s) {
  Moments1D out;
  if (!(nu > 0.0)) {  // prior is a point mass
    out.mean = p;
    out.var = 0.0;
    return out;
  }
  double tau = nu + s;
  if (!(tau > 0.0)) {
    out.mean = p;
    out.var = 0.0;
    return out;
  }
  double rt = std::sqrt(tau);
  double ka = std::isfinite(a) ? (a - p) / rt : -kInf;
  double kb = std::isfinite(b) ? (b - p) / rt : kInf;
  StdTrunc st = std_trunc(ka, kb);
  if (!st.ok || !std::isfinite(st.mu_t) || !std::isfinite(st.r2)) {
    // Bin mass underflowed: treat the bin as a midpoint pseudo-observation
    // whose variance is the noise plus the uniform-in-bin width^2/12 term.
    if (std::isfinite(a) && std::isfinite(b)) {
      double w = b - a;
      return gauss_combine(p, nu, 0.5 * (a + b), s + w * w / 12.0);
    }
    double edge = std::isfinite(a) ? a : b;
    return gauss_combine(p, nu, edge, s);
  }
  double var_t = 1.0 + st.r2 - st.mu_t * st.mu_t;
  if (var_t < 0.0 || var_t > 1.0) {
    out.var_clamped = (var_t < -1e-8 || var_t > 1.0 + 1e-8);
    var_t = std::clamp(var_t, 0.0, 1.0);
  }
  out.mean = p + (nu / rt) * st.mu_t;
  out.var = nu * s / tau + (nu * nu / tau) * var_t;
  return out;
}

Moments1D interval_posterior_signform(double p, double nu, double a, double b,
                                      double s, double level) {
  Moments1D out;
  if (!(nu > 0.0)) {
    out.mean = p;
    out.var = 0.0;
    return out;
  }
  double tau = nu + s;
  double rt = std::sqrt(tau);
  double sgn = (level > 0.0) ? 1.0 : -1.0;
  double lo_abs = std::min(std::fabs(a), std::fabs(b));
  double hi_abs = std::max(std::fabs(a), std::fabs(b));
  double k1 = (sgn * p - lo_abs) / rt;
  double k2 = std::isfinite(hi_abs) ? (sgn * p - hi_abs) / rt : -kInf;
  double m = norm_cdf(k1) - (std::isfinite(k2) ? norm_cdf(k2) : 0.0);
  if (!(m > 0.0)) {
    out.degenerate = true;
    out.mean = p;
    out.var = nu;
    return out;
  }
  double pk2 = std::isfinite(k2) ? norm_pdf(k2) : 0.0;
  double kpk2 = std::isfinite(k2) ? k2 * norm_pdf(k2) : 0.0;
  double mu = (norm_pdf(k1) - pk2) / m;
  double r2 = (k1 * norm_pdf(k1) - kpk2) / m;
  out.mean = p + sgn * (nu / rt) * mu;
  out.var = nu - (nu * nu / tau) * (r2 + mu * mu);
  return out;
}

}  // namespace mcad
