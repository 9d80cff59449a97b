#include "mcad/se.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "mcad/denoiser.hpp"
#include "mcad/rng.hpp"

namespace mcad {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct CellMap {
  int m_ant = 0;
  int w_len = 0;
  std::vector<int> vap_ids;

  int ap_of(int vi) const { return vap_ids[vi] / m_ant; }
};

CellMap map_of(const WindowProblem& prob) {
  if (!prob.layout || !prob.signals || !prob.activity)
    throw std::invalid_argument("se: missing input");
  const NetworkLayout& lay = *prob.layout;
  const FrameSignals& sig = *prob.signals;
  if (lay.n_aps() < 1 || sig.n_vaps % lay.n_aps() != 0)
    throw std::invalid_argument("se: vap count not a multiple of APs");
  if (prob.single_ap >= lay.n_aps())
    throw std::invalid_argument("se: single_ap out of range");
  CellMap cm;
  cm.m_ant = sig.n_vaps / lay.n_aps();
  cm.w_len = prob.window.t_w;
  if (prob.single_ap >= 0) {
    for (int m = 0; m < cm.m_ant; ++m)
      cm.vap_ids.push_back(prob.single_ap * cm.m_ant + m);
  } else {
    for (int v = 0; v < sig.n_vaps; ++v) cm.vap_ids.push_back(v);
  }
  return cm;
}

}  // namespace

SeState se_init(const WindowProblem& prob) {
  const CellMap cm = map_of(prob);
  const NetworkLayout& lay = *prob.layout;
  const MarkovActivityParams& act = *prob.activity;
  const double rho0 = prob.signals->tx_power;
  const int n_vaps = (int)cm.vap_ids.size();

  SeState st;
  st.w_len = cm.w_len;
  st.n_vaps = n_vaps;
  st.nu_x.assign((size_t)cm.w_len * n_vaps, kNan);
  st.defined.assign((size_t)cm.w_len * n_vaps, 0);
  for (int vi = 0; vi < n_vaps; ++vi) {
    const int u = cm.ap_of(vi);
    const auto& users = lay.coop_ap_to_users[u];
    if (users.empty()) continue;  // no signal energy to track, stays flagged
    double acc = 0.0;
    for (int n : users) acc += act.p1_of(n) * rho0 * lay.g(n, u);
    const double v0 = acc / (double)users.size();
    for (int k = 0; k < cm.w_len; ++k) {
      st.nu_x[(size_t)k * n_vaps + vi] = v0;
      st.defined[(size_t)k * n_vaps + vi] = 1;
    }
  }
  return st;
}

SeState se_step(const SeState& state, const WindowProblem& prob,
                const SeSnapshot& snap, const SeConfig& cfg) {
  const CellMap cm = map_of(prob);
  const NetworkLayout& lay = *prob.layout;
  const MarkovActivityParams& act = *prob.activity;
  const double rho0 = prob.signals->tx_power;
  const double lp = (double)prob.signals->pilot_length;
  const double eps_p = prob.config.eps_p;
  const int n_vaps = (int)cm.vap_ids.size();

  if (state.w_len != cm.w_len || state.n_vaps != n_vaps ||
      snap.w_len != cm.w_len || snap.n_vaps != n_vaps ||
      (int)snap.sigma_eff.size() != n_vaps)
    throw std::invalid_argument("se_step: shape mismatch");

  SeState next = state;
  for (int k = 0; k < cm.w_len; ++k) {
    for (int vi = 0; vi < n_vaps; ++vi) {
      if (!state.is_defined(k, vi)) continue;
      const int u = cm.ap_of(vi);
      const auto& users = lay.coop_ap_to_users[u];
      const int n_set = (int)users.size();

      const double nu_p = ((double)n_set / lp) * state.at(k, vi);
      const double sigma = snap.sigma_eff[vi];
      double nu_z;
      if (cfg.use_measured_nu_z) {
        nu_z = snap.nu_z(k, vi);
      } else if (std::isfinite(sigma)) {
        nu_z = nu_p * sigma / (nu_p + sigma);
      } else {
        nu_z = nu_p;
      }
      const double diff = nu_p - nu_z;
      const double nu_r = nu_p * nu_p / diff;

      double acc = 0.0;
      if (!(diff > 0.0) || !std::isfinite(nu_r) || nu_r <= 0.0) {
        // non-informative output stage: the denoiser sees nothing, each user
        // sits at the prior variance under its current activity belief
        for (int j = 0; j < n_set; ++j)
          acc += snap.phi(k, vi, j) * rho0 * lay.g(users[j], u);
      } else {
        const int draws = (cfg.n_samples + n_set - 1) / n_set;
        for (int j = 0; j < n_set; ++j) {
          const int n = users[j];
          const double gain = rho0 * lay.g(n, u);
          const double p1 = act.p1_of(n);
          const double phi = snap.phi(k, vi, j);
          Rng rng = Rng::keyed(cfg.seed, "se", (uint64_t)snap.iteration,
                               (uint64_t)((size_t)k * n_vaps + vi),
                               (uint64_t)n);
          double vsum = 0.0;
          for (int d = 0; d < draws; ++d) {
            cplx x0{0.0, 0.0};
            if (rng.uniform() < p1) x0 = rng.cgaussian(gain);
            const cplx r_hat = x0 + rng.cgaussian(nu_r);
            vsum += bg_denoiser(r_hat, nu_r, gain, phi, eps_p).nu_x;
          }
          acc += vsum / (double)draws;
        }
      }
      next.nu_x[(size_t)k * n_vaps + vi] = acc / (double)n_set;
    }
  }
  return next;
}

SeOverlay se_track(const WindowProblem& prob, const SeConfig& cfg) {
  if (cfg.i_max < 1 || cfg.n_samples < 1)
    throw std::invalid_argument("se_track: bad config");

  WindowProblem coupled = prob;
  coupled.config.i_max = cfg.i_max;
  coupled.config.eps_conv = 0.0;  // fixed iteration count, no early stop
  std::vector<SeSnapshot> snaps;
  snaps.reserve((size_t)cfg.i_max);
  coupled.se_hook = [&snaps](const SeSnapshot& s) { snaps.push_back(s); };

  SeOverlay ov;
  ov.result = run_window(coupled);
  ov.init = se_init(prob);

  const CellMap cm = map_of(prob);
  const NetworkLayout& lay = *prob.layout;
  const int n_vaps = (int)cm.vap_ids.size();

  // pooled normalization weights: expected signal energy per cell scales with
  // the cooperation-set size, matching the pooled NMSE of the coupled run
  auto pooled = [&](const SeState& st) {
    double acc = 0.0;
    for (int k = 0; k < cm.w_len; ++k)
      for (int vi = 0; vi < n_vaps; ++vi) {
        if (!st.is_defined(k, vi)) continue;
        const double w = (double)lay.coop_ap_to_users[cm.ap_of(vi)].size();
        acc += w * st.at(k, vi);
      }
    return acc;
  };
  auto plain_mean = [&](const SeState& st) {
    double acc = 0.0;
    int cnt = 0;
    for (int k = 0; k < cm.w_len; ++k)
      for (int vi = 0; vi < n_vaps; ++vi) {
        if (!st.is_defined(k, vi)) continue;
        acc += st.at(k, vi);
        ++cnt;
      }
    return cnt > 0 ? acc / cnt : kNan;
  };

  const double e0 = pooled(ov.init);
  ov.predicted_mse.push_back(plain_mean(ov.init));
  ov.predicted_nmse_db.push_back(0.0);  // prior energy is the 0 dB reference

  const SeState* prev = &ov.init;
  for (const SeSnapshot& snap : snaps) {
    ov.states.push_back(se_step(*prev, prob, snap, cfg));
    prev = &ov.states.back();
    ov.predicted_mse.push_back(plain_mean(*prev));
    ov.predicted_nmse_db.push_back(e0 > 0.0
                                       ? 10.0 * std::log10(pooled(*prev) / e0)
                                       : kNan);
  }
  for (double m : ov.result.nmse_trajectory)
    ov.measured_nmse_db.push_back(10.0 * std::log10(m));
  return ov;
}

std::string se_csv(const SeOverlay& overlay) {
  std::string out = "iteration,predicted_nmse_db,measured_nmse_db\n";
  const size_t rows = overlay.predicted_nmse_db.size();
  for (size_t e = 0; e < rows; ++e) {
    const double meas = e < overlay.measured_nmse_db.size()
                            ? overlay.measured_nmse_db[e]
                            : kNan;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%.9e,%.9e\n", (int)(e + 1),
                  overlay.predicted_nmse_db[e], meas);
    out += buf;
  }
  return out;
}

}  // namespace mcad
