#include "mcad/fronthaul.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcad/truncnorm.hpp"

namespace mcad {

QuantizedSignals qf_quantize_signals(const NetworkLayout& layout,
                                     const FrameSignals& fs, double p_a,
                                     int bits_per_real, double clip) {
  if (fs.n_vaps % layout.n_aps() != 0)
    throw std::invalid_argument("qf_quantize_signals: vap/AP mismatch");
  if (!(p_a > 0.0) || p_a >= 1.0)
    throw std::invalid_argument("qf_quantize_signals: p_a outside (0,1)");
  const int m_ant = fs.n_vaps / layout.n_aps();
  QuantizedSignals out;
  out.signals = fs;
  out.codecs.reserve(fs.n_vaps);
  for (int v = 0; v < fs.n_vaps; ++v) {
    const int u = v / m_ant;
    double pw = fs.noise_var;
    for (int n = 0; n < layout.n_users(); ++n)
      pw += p_a * fs.tx_power * layout.g(n, u) / fs.pilot_length;
    // per real component: half the complex mean power
    out.codecs.push_back(
        build_quantizer(bits_per_real, std::sqrt(pw / 2.0), clip));
  }
  for (int t = 0; t < fs.n_frames; ++t)
    for (int v = 0; v < fs.n_vaps; ++v) {
      cplx* y = out.signals.y_col(t, v);
      const UniformQuantizer& q = out.codecs[v];
      for (int l = 0; l < fs.pilot_length; ++l) y[l] = q.quantize(y[l]);
    }
  return out;
}

QfOutputChannel::QfOutputChannel(std::vector<UniformQuantizer> codecs)
    : codecs_(std::move(codecs)) {
  if (codecs_.empty())
    throw std::invalid_argument("QfOutputChannel: no codebooks");
}

OutputStep QfOutputChannel::step(cplx p_hat, double nu_p, cplx y,
                                 double sigma_eff_sq, double nu_p_floor,
                                 int vap) const {
  const UniformQuantizer& q = codecs_.at(vap);
  const double nu_h = nu_p / 2.0, s_h = sigma_eff_sq / 2.0;
  auto part = [&](double p, double w) {
    auto [a, b] = q.bin_bounds(q.bin_of(w));
    Moments1D m = interval_posterior(p, nu_h, a, b, s_h);
    if (m.var_clamped) ++clamps_;
    if (m.degenerate) ++fallbacks_;
    return m;
  };
  Moments1D re = part(p_hat.real(), y.real());
  Moments1D im = part(p_hat.imag(), y.imag());
  OutputStep out;
  out.z_hat = {re.mean, im.mean};
  out.nu_z = re.var + im.var;
  const double npf = std::max(nu_p, nu_p_floor);
  out.s_hat = (out.z_hat - p_hat) / npf;
  out.nu_s = (1.0 - out.nu_z / npf) / npf;
  return out;
}

DetectionResult qf_detect(const WindowProblem& prob, int bits_per_real,
                          double clip, bool keep_em) {
  if (bits_per_real < 1)
    throw std::invalid_argument("qf_detect: needs at least one bit");
  if (!prob.layout || !prob.signals || !prob.activity)
    throw std::invalid_argument("qf_detect: null field");
  QuantizedSignals qs = qf_quantize_signals(*prob.layout, *prob.signals,
                                            prob.activity->p_a, bits_per_real,
                                            clip);
  QfOutputChannel chan(qs.codecs);
  WindowProblem local = prob;
  local.signals = &qs.signals;
  local.channel = &chan;
  if (!keep_em) {
    local.config.em_noise_learning = false;
    local.config.sigma_eff_init = prob.signals->noise_var;
  }
  return run_window(local);
}

UniformQuantizer build_llr_quantizer(int bits) {
  // range fixed at +-20 regardless of resolution
  return build_quantizer(bits, 20.0 / 3.0, 3.0);
}

DfLocalReport df_local_detect(const WindowProblem& prob, int ap) {
  if (!prob.layout) throw std::invalid_argument("df_local_detect: null layout");
  if (ap < 0 || ap >= prob.layout->n_aps())
    throw std::invalid_argument("df_local_detect: bad AP index");
  WindowProblem local = prob;
  local.single_ap = ap;
  DetectionResult res = run_window(local);
  DfLocalReport rep;
  rep.ap = ap;
  rep.users = prob.layout->coop_ap_to_users[ap];
  rep.llr.resize((size_t)res.n_target * rep.users.size());
  for (int f = 0; f < res.n_target; ++f) {
    const double* row = res.llr_row(f);
    for (size_t i = 0; i < rep.users.size(); ++i)
      rep.llr[(size_t)f * rep.users.size() + i] = row[rep.users[i]];
  }
  return rep;
}

DfDecision df_aggregate(const std::vector<DfLocalReport>& reports,
                        const NetworkLayout& layout, int n_target,
                        const UniformQuantizer& codec, double iota) {
  const int n = layout.n_users();
  DfDecision out;
  out.n_users = n;
  out.n_target = n_target;
  out.llr_sum.assign((size_t)n_target * n,
                     std::numeric_limits<double>::quiet_NaN());
  out.decision.assign((size_t)n_target * n, 0);
  std::vector<char> covered(n, 0);
  for (const DfLocalReport& rep : reports) {
    if ((int)rep.llr.size() != n_target * (int)rep.users.size())
      throw std::invalid_argument("df_aggregate: malformed report");
    for (size_t i = 0; i < rep.users.size(); ++i) {
      if (rep.users[i] < 0 || rep.users[i] >= n)
        throw std::invalid_argument("df_aggregate: user id out of range");
      covered[rep.users[i]] = 1;
    }
  }
  for (int f = 0; f < n_target; ++f) {
    double* row = out.llr_sum.data() + (size_t)f * n;
    for (int nn = 0; nn < n; ++nn)
      if (covered[nn]) row[nn] = 0.0;
    for (const DfLocalReport& rep : reports)
      for (size_t i = 0; i < rep.users.size(); ++i)
        row[rep.users[i]] +=
            codec.quantize(rep.llr[(size_t)f * rep.users.size() + i]);
    std::uint8_t* dec = out.decision.data() + (size_t)f * n;
    for (int nn = 0; nn < n; ++nn)
      dec[nn] = covered[nn] && row[nn] >= iota ? 1 : 0;
  }
  return out;
}

DfDecision df_detect(const WindowProblem& prob, int bits_llr) {
  if (bits_llr < 1)
    throw std::invalid_argument("df_detect: needs at least one bit");
  if (!prob.layout) throw std::invalid_argument("df_detect: null layout");
  std::vector<DfLocalReport> reports;
  reports.reserve(prob.layout->n_aps());
  for (int u = 0; u < prob.layout->n_aps(); ++u)
    reports.push_back(df_local_detect(prob, u));
  return df_aggregate(reports, *prob.layout, prob.window.delta_w,
                      build_llr_quantizer(bits_llr), prob.config.iota);
}

}  // namespace mcad
