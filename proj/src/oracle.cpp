#include "mcad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace mcad {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log prior of one user's on/off sequence, bit k = state in frame k.
// Stationary start, then the two-state transition kernel.
std::vector<double> sequence_log_prior(const MarkovActivityParams& act,
                                       int t_w) {
  auto lg = [](double p) { return p > 0.0 ? std::log(p) : kNegInf; };
  const double l1 = lg(act.p_a), l0 = lg(1.0 - act.p_a);
  const double la1 = lg(act.alpha), la0 = lg(1.0 - act.alpha);
  const double lb1 = lg(act.beta), lb0 = lg(1.0 - act.beta);
  std::vector<double> out((size_t)1 << t_w);
  for (std::uint32_t s = 0; s < out.size(); ++s) {
    double acc = (s & 1u) ? l1 : l0;
    for (int k = 1; k < t_w; ++k) {
      bool prev = (s >> (k - 1)) & 1u;
      bool cur = (s >> k) & 1u;
      acc += prev ? (cur ? lb1 : lb0) : (cur ? la1 : la0);
    }
    out[s] = acc;
  }
  return out;
}

// Marginal log-likelihood of one observed pilot column under the active-set
// mask: y ~ CN(0, sum_{n in mask} c_n a_n a_n^H + sigma^2 I), evaluated
// through an in-place Cholesky factor of the covariance.
double masked_loglik(const PilotMatrix& pm, const double* c,
                     const std::uint32_t mask, const cplx* y,
                     double sigma_sq, std::vector<cplx>& cov,
                     std::vector<cplx>& u) {
  const int lp = pm.pilot_length;
  std::fill(cov.begin(), cov.end(), cplx{0.0, 0.0});
  for (int l = 0; l < lp; ++l) cov[(size_t)l * lp + l] = sigma_sq;
  for (int n = 0; n < pm.n_users; ++n) {
    if (!((mask >> n) & 1u)) continue;
    const cplx* an = pm.col(n);
    const double cn = c[n];
    for (int i = 0; i < lp; ++i)
      for (int j = 0; j <= i; ++j)
        cov[(size_t)i * lp + j] += cn * an[i] * std::conj(an[j]);
  }
  // lower-triangular Cholesky; the covariance is Hermitian PD for
  // sigma_sq > 0
  double logdet = 0.0;
  for (int i = 0; i < lp; ++i) {
    for (int j = 0; j <= i; ++j) {
      cplx s = cov[(size_t)i * lp + j];
      for (int k = 0; k < j; ++k)
        s -= cov[(size_t)i * lp + k] * std::conj(cov[(size_t)j * lp + k]);
      if (j < i) {
        cov[(size_t)i * lp + j] = s / cov[(size_t)j * lp + j].real();
      } else {
        double d = s.real();
        if (!(d > 0.0))
          throw std::runtime_error(
              "exact_activity_posterior: covariance not positive definite");
        cov[(size_t)i * lp + i] = std::sqrt(d);
        logdet += std::log(d);
      }
    }
  }
  // forward solve L u = y, quadratic form is |u|^2
  double quad = 0.0;
  for (int i = 0; i < lp; ++i) {
    cplx s = y[i];
    for (int k = 0; k < i; ++k) s -= cov[(size_t)i * lp + k] * u[k];
    u[i] = s / cov[(size_t)i * lp + i].real();
    quad += std::norm(u[i]);
  }
  return -lp * std::log(M_PI) - logdet - quad;
}

struct BlockSums {
  double max_lw = kNegInf;
  double z = 0.0;
  std::vector<double> num;  // scaled by exp(-max_lw), one per (k, n) bit
};

// One contiguous pattern range of the enumeration. Everything is summed in
// a shifting exp(max) scale so the dynamic range never leaves the doubles.
BlockSums enumerate_block(std::uint64_t lo, std::uint64_t hi, int n, int t_w,
                          const std::vector<std::vector<double>>& frame_tbl,
                          const std::vector<double>& seq_prior) {
  const int bits = n * t_w;
  const std::uint32_t fmask = ((std::uint32_t)1 << n) - 1;
  BlockSums bs;
  bs.num.assign(bits, 0.0);
  for (std::uint64_t p = lo; p < hi; ++p) {
    double lw = 0.0;
    for (int k = 0; k < t_w && lw != kNegInf; ++k)
      lw += frame_tbl[k][(p >> (k * n)) & fmask];
    for (int un = 0; un < n && lw != kNegInf; ++un) {
      std::uint32_t seq = 0;
      for (int k = 0; k < t_w; ++k)
        seq |= (std::uint32_t)((p >> (k * n + un)) & 1u) << k;
      lw += seq_prior[seq];
    }
    if (lw == kNegInf) continue;
    if (lw > bs.max_lw) {
      const double scale = std::exp(bs.max_lw - lw);
      bs.z *= scale;
      for (double& v : bs.num) v *= scale;
      bs.max_lw = lw;
    }
    const double w = std::exp(lw - bs.max_lw);
    bs.z += w;
    for (int b = 0; b < bits; ++b)
      if ((p >> b) & 1u) bs.num[b] += w;
  }
  return bs;
}

}  // namespace

std::vector<double> exact_activity_posterior(const TinyInstance& inst) {
  if (!inst.layout || !inst.pilots || !inst.signals || !inst.activity)
    throw std::invalid_argument("exact_activity_posterior: null field");
  const NetworkLayout& lay = *inst.layout;
  const PilotMatrix& pm = *inst.pilots;
  const FrameSignals& sig = *inst.signals;
  const int n = lay.n_users();
  const int t_w = inst.t_w;
  if (pm.n_users != n || sig.n_users != n)
    throw std::invalid_argument("exact_activity_posterior: size mismatch");
  if (inst.t0 < 1 || t_w < 1 || inst.t0 + t_w - 1 > sig.n_frames)
    throw std::invalid_argument("exact_activity_posterior: bad window");
  const int bits = n * t_w;
  if (bits > 24)
    throw std::invalid_argument(
        "exact_activity_posterior: pattern space above 2^24");
  const double sigma_sq =
      inst.sigma_sq >= 0.0 ? inst.sigma_sq : sig.noise_var;
  if (!(sigma_sq > 0.0))
    throw std::invalid_argument(
        "exact_activity_posterior: needs a positive noise variance");
  validate_activity_params(*inst.activity, n);

  const int lp = pm.pilot_length;
  const int m_ant = sig.n_vaps / lay.n_aps();

  // per-frame tables over the 2^N within-frame masks, likelihood summed
  // over every virtual AP (frames and antennas fade independently)
  std::vector<std::vector<double>> frame_tbl(t_w);
  std::vector<cplx> cov((size_t)lp * lp), u(lp);
  std::vector<double> c(n);
  for (int k = 0; k < t_w; ++k) {
    frame_tbl[k].assign((size_t)1 << n, 0.0);
    for (int v = 0; v < sig.n_vaps; ++v) {
      const int ap = v / m_ant;
      for (int nn = 0; nn < n; ++nn) c[nn] = sig.tx_power * lay.g(nn, ap);
      const cplx* y = sig.y_col(inst.t0 - 1 + k, v);
      for (std::uint32_t mask = 0; mask < ((std::uint32_t)1 << n); ++mask)
        frame_tbl[k][mask] +=
            masked_loglik(pm, c.data(), mask, y, sigma_sq, cov, u);
    }
  }
  const std::vector<double> seq_prior = sequence_log_prior(*inst.activity, t_w);

  const std::uint64_t total = (std::uint64_t)1 << bits;
  unsigned hw = std::thread::hardware_concurrency();
  const unsigned n_blocks =
      total >= (1u << 16) ? std::max(1u, std::min(hw, 8u)) : 1u;
  std::vector<BlockSums> parts(n_blocks);
  if (n_blocks == 1) {
    parts[0] = enumerate_block(0, total, n, t_w, frame_tbl, seq_prior);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t step = (total + n_blocks - 1) / n_blocks;
    for (unsigned b = 0; b < n_blocks; ++b)
      pool.emplace_back([&, b] {
        const std::uint64_t lo = b * step;
        parts[b] = enumerate_block(lo, std::min(total, lo + step), n, t_w,
                                   frame_tbl, seq_prior);
      });
    for (auto& th : pool) th.join();
  }
  // deterministic merge in block order
  double gmax = kNegInf;
  for (const BlockSums& bs : parts) gmax = std::max(gmax, bs.max_lw);
  if (gmax == kNegInf)
    throw std::runtime_error(
        "exact_activity_posterior: all patterns carry zero prior");
  double z = 0.0;
  std::vector<double> num(bits, 0.0);
  for (const BlockSums& bs : parts) {
    if (bs.max_lw == kNegInf) continue;
    const double scale = std::exp(bs.max_lw - gmax);
    z += bs.z * scale;
    for (int b = 0; b < bits; ++b) num[b] += bs.num[b] * scale;
  }
  std::vector<double> post(bits);
  for (int b = 0; b < bits; ++b) post[b] = num[b] / z;
  return post;
}

std::vector<double> exact_chain_smoother(const std::vector<double>& ratios,
                                         const MarkovActivityParams& act) {
  const int t_w = (int)ratios.size();
  if (t_w < 1 || t_w > 12)
    throw std::invalid_argument("exact_chain_smoother: need 1..12 frames");
  for (double r : ratios)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument(
          "exact_chain_smoother: ratios must be finite and >= 0");
  validate_activity_params(act, 1);

  const std::vector<double> seq_prior = sequence_log_prior(act, t_w);
  std::vector<double> lr(t_w);
  for (int k = 0; k < t_w; ++k)
    lr[k] = ratios[k] > 0.0 ? std::log(ratios[k]) : kNegInf;

  double max_lw = kNegInf, z = 0.0;
  std::vector<double> num(t_w, 0.0);
  for (std::uint32_t s = 0; s < ((std::uint32_t)1 << t_w); ++s) {
    double lw = seq_prior[s];
    for (int k = 0; k < t_w && lw != kNegInf; ++k)
      if ((s >> k) & 1u) lw += lr[k];
    if (lw == kNegInf) continue;
    if (lw > max_lw) {
      const double scale = std::exp(max_lw - lw);
      z *= scale;
      for (double& v : num) v *= scale;
      max_lw = lw;
    }
    const double w = std::exp(lw - max_lw);
    z += w;
    for (int k = 0; k < t_w; ++k)
      if ((s >> k) & 1u) num[k] += w;
  }
  if (!(z > 0.0))
    throw std::runtime_error("exact_chain_smoother: zero total mass");
  for (int k = 0; k < t_w; ++k) num[k] /= z;
  return num;
}

std::vector<cplx> ls_channel_recovery(const PilotMatrix& pilots, const cplx* y,
                                      double tol) {
  if (!y) throw std::invalid_argument("ls_channel_recovery: null observation");
  const int lp = pilots.pilot_length, n = pilots.n_users;
  if (lp < n)
    throw std::invalid_argument(
        "ls_channel_recovery: needs at least as many pilot symbols as users");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      cplx g = 0.0;
      const cplx* ai = pilots.col(i);
      const cplx* aj = pilots.col(j);
      for (int l = 0; l < lp; ++l) g += std::conj(ai[l]) * aj[l];
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(g - cplx{want, 0.0}) > tol)
        throw std::invalid_argument(
            "ls_channel_recovery: pilot columns are not orthonormal");
    }
  std::vector<cplx> x(n);
  for (int nn = 0; nn < n; ++nn) {
    cplx acc = 0.0;
    const cplx* an = pilots.col(nn);
    for (int l = 0; l < lp; ++l) acc += std::conj(an[l]) * y[l];
    x[nn] = acc;
  }
  return x;
}

}  // namespace mcad
