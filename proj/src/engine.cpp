#include "mcad/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "mcad/messages.hpp"

namespace mcad {

std::string trace_csv_header() {
  return "iteration,rel_change,nmse_lin,sigma_eff_mean,mean_pi_left";
}

std::string trace_csv_row(const IterationTrace& tr) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%d,%.9e,%.9e,%.9e,%.9e", tr.iteration,
                tr.rel_change, tr.nmse_lin, tr.sigma_eff_mean,
                tr.mean_pi_left);
  return buf;
}

void gamp_linear_step(const PilotMatrix& pilots, const int* users, int n_set,
                      const cplx* x_hat, const double* nu_x,
                      const cplx* s_prev, cplx* p_hat, double* nu_p) {
  const int lp = pilots.pilot_length;
  std::fill(nu_p, nu_p + lp, 0.0);
  std::fill(p_hat, p_hat + lp, cplx{0.0, 0.0});
  for (int s = 0; s < n_set; ++s) {
    const cplx* col = pilots.col(users[s]);
    const cplx xs = x_hat[s];
    const double vs = nu_x[s];
    for (int l = 0; l < lp; ++l) {
      nu_p[l] += std::norm(col[l]) * vs;
      p_hat[l] += col[l] * xs;
    }
  }
  for (int l = 0; l < lp; ++l) p_hat[l] -= nu_p[l] * s_prev[l];
}

namespace {

void validate_problem(const WindowProblem& prob) {
  if (!prob.layout || !prob.pilots || !prob.signals || !prob.activity)
    throw std::invalid_argument("run_window: missing input");
  const NetworkLayout& lay = *prob.layout;
  const FrameSignals& sig = *prob.signals;
  if (prob.pilots->n_users != lay.n_users() || sig.n_users != lay.n_users())
    throw std::invalid_argument("run_window: user count mismatch");
  if (sig.pilot_length != prob.pilots->pilot_length)
    throw std::invalid_argument("run_window: pilot length mismatch");
  if (lay.n_aps() < 1 || sig.n_vaps % lay.n_aps() != 0)
    throw std::invalid_argument("run_window: vap count not a multiple of APs");
  const WindowSpec& w = prob.window;
  if (w.t0 < 1 || w.t_w < 1 || w.window_end() > sig.n_frames ||
      w.t1 < w.t0 || w.delta_w < 1 || w.target_end() > w.window_end())
    throw std::invalid_argument("run_window: window out of range");
  if (prob.single_ap >= lay.n_aps())
    throw std::invalid_argument("run_window: single_ap out of range");
  const InferenceConfig& c = prob.config;
  if (!(c.damping > 0.0 && c.damping <= 1.0) || c.i_max < 1 ||
      !(c.eps_p > 0.0 && c.eps_p < 0.5))
    throw std::invalid_argument("run_window: bad config");
  validate_activity_params(*prob.activity, lay.n_users());
}

}  // namespace

DetectionResult run_window(const WindowProblem& prob) {
  validate_problem(prob);
  const NetworkLayout& lay = *prob.layout;
  const PilotMatrix& pil = *prob.pilots;
  const FrameSignals& sig = *prob.signals;
  const MarkovActivityParams& act = *prob.activity;
  const InferenceConfig& cfg = prob.config;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  const int n_users = lay.n_users();
  const int m_ant = sig.n_vaps / lay.n_aps();
  const int lp = sig.pilot_length;
  const int w_len = prob.window.t_w;
  const double theta = cfg.damping;
  const double eps_p = cfg.eps_p;
  const double rho0 = sig.tx_power;

  std::vector<int> vap_ids;
  if (prob.single_ap >= 0) {
    for (int m = 0; m < m_ant; ++m)
      vap_ids.push_back(prob.single_ap * m_ant + m);
  } else {
    for (int v = 0; v < sig.n_vaps; ++v) vap_ids.push_back(v);
  }
  const int n_vaps = (int)vap_ids.size();

  // slot layout: per-frame state is one contiguous run per vap
  std::vector<int> slot_ofs(n_vaps + 1, 0);
  for (int vi = 0; vi < n_vaps; ++vi) {
    int u = vap_ids[vi] / m_ant;
    slot_ofs[vi + 1] = slot_ofs[vi] + (int)lay.coop_ap_to_users[u].size();
  }
  const int n_slots = slot_ofs[n_vaps];

  std::vector<int> act_users;
  if (prob.single_ap >= 0) {
    act_users = lay.coop_ap_to_users[prob.single_ap];
  } else {
    act_users.resize(n_users);
    for (int n = 0; n < n_users; ++n) act_users[n] = n;
  }

  // user -> (vap, slot) adjacency; gather and scatter reuse this order
  std::vector<int> adj_cnt(n_users, 0);
  for (int vi = 0; vi < n_vaps; ++vi) {
    int u = vap_ids[vi] / m_ant;
    for (int n : lay.coop_ap_to_users[u]) ++adj_cnt[n];
  }
  std::vector<size_t> adj_ofs(n_users + 1, 0);
  for (int n = 0; n < n_users; ++n) adj_ofs[n + 1] = adj_ofs[n] + adj_cnt[n];
  std::vector<int> adj_pos(adj_ofs[n_users]);
  {
    std::vector<size_t> cursor(adj_ofs.begin(), adj_ofs.end() - 1);
    for (int vi = 0; vi < n_vaps; ++vi) {
      int u = vap_ids[vi] / m_ant;
      const auto& users = lay.coop_ap_to_users[u];
      for (int s = 0; s < (int)users.size(); ++s)
        adj_pos[cursor[users[s]]++] = slot_ofs[vi] + s;
    }
  }
  size_t max_deg = 0;
  for (int n = 0; n < n_users; ++n)
    max_deg = std::max(max_deg, adj_ofs[n + 1] - adj_ofs[n]);

  // per-(frame, vap, slot) channel-side state
  std::vector<cplx> x_hat((size_t)w_len * n_slots, cplx{0.0, 0.0});
  std::vector<double> nu_x((size_t)w_len * n_slots, 0.0);
  std::vector<double> phi_left((size_t)w_len * n_slots, 0.5);
  std::vector<double> phi_right((size_t)w_len * n_slots, 0.5);
  std::vector<cplx> s_hat((size_t)w_len * n_vaps * lp, cplx{0.0, 0.0});
  std::vector<double> sigma_eff(
      n_vaps, cfg.sigma_eff_init < 0.0 ? sig.noise_var : cfg.sigma_eff_init);

  for (int k = 0; k < w_len; ++k)
    for (int vi = 0; vi < n_vaps; ++vi) {
      int u = vap_ids[vi] / m_ant;
      const auto& users = lay.coop_ap_to_users[u];
      size_t base = (size_t)k * n_slots + slot_ofs[vi];
      for (int s = 0; s < (int)users.size(); ++s)
        nu_x[base + s] = act.p1_of(users[s]) * rho0 * lay.g(users[s], u);
    }

  // per-(user, frame) activity-side messages
  auto aidx = [&](int n, int k) { return (size_t)n * w_len + k; };
  std::vector<double> pi_l((size_t)n_users * w_len, 0.5);
  std::vector<double> psi_r((size_t)n_users * w_len, 0.5);
  std::vector<double> vph_l((size_t)n_users * w_len, 0.5);
  std::vector<double> psi_l((size_t)n_users * w_len, 0.5);
  std::vector<double> vph_r((size_t)n_users * w_len, 0.5);
  std::vector<double> pi_r((size_t)n_users * w_len, 0.5);

  auto chain_of = [&](int n) {
    ChainParams cp;
    if (cfg.mode == PriorMode::kCs) {
      double p = act.p1_of(n);
      cp.alpha = p;
      cp.beta = p;
      cp.p1 = p;
    } else {
      cp.alpha = act.a_of(n);
      cp.beta = act.b_of(n);
      cp.p1 = act.p1_of(n);
    }
    return cp;
  };

  std::vector<double> gbuf(max_deg * (size_t)w_len);
  std::vector<double> sbuf(max_deg);
  auto refine = [&]() {
    for (int n : act_users) {
      const size_t a0 = adj_ofs[n];
      const int deg = (int)(adj_ofs[n + 1] - a0);
      double* pl = &pi_l[aidx(n, 0)];
      for (int k = 0; k < w_len; ++k) {
        if (deg == 0) {
          pl[k] = 0.5;
          continue;
        }
        double* gk = &gbuf[(size_t)k * deg];
        for (int j = 0; j < deg; ++j)
          gk[j] = phi_left[(size_t)k * n_slots + adj_pos[a0 + j]];
        pl[k] = combine_ap_evidence(gk, deg, eps_p);
      }
      ChainParams cp = chain_of(n);
      forward_sweep(pl, w_len, cp, eps_p, &psi_r[aidx(n, 0)],
                    &vph_l[aidx(n, 0)]);
      backward_sweep(pl, w_len, cp, eps_p, &psi_l[aidx(n, 0)],
                     &vph_r[aidx(n, 0)]);
      temporal_prior(&psi_r[aidx(n, 0)], &vph_r[aidx(n, 0)], w_len, eps_p,
                     &pi_r[aidx(n, 0)]);
      if (deg == 0) continue;
      for (int k = 0; k < w_len; ++k) {
        per_ap_prior(pi_r[aidx(n, k)], &gbuf[(size_t)k * deg], deg, eps_p,
                     sbuf.data());
        for (int j = 0; j < deg; ++j)
          phi_right[(size_t)k * n_slots + adj_pos[a0 + j]] = sbuf[j];
      }
    }
  };

  // pooled true-signal energy over the cooperation pairs of the window
  double den_true = 0.0;
  for (int k = 0; k < w_len; ++k)
    for (int vi = 0; vi < n_vaps; ++vi) {
      int u = vap_ids[vi] / m_ant;
      const cplx* xt = sig.x_col(prob.window.t0 - 1 + k, vap_ids[vi]);
      for (int n : lay.coop_ap_to_users[u]) den_true += std::norm(xt[n]);
    }
  const bool has_energy = den_true > 0.0;

  DetectionResult res;
  res.window = prob.window;
  res.n_users = n_users;
  res.n_target = prob.window.delta_w;
  res.vap_ids = vap_ids;
  res.nmse_trajectory.push_back(has_energy ? 1.0 : nan);

  std::vector<double> nu_p(lp), nu_s(lp);
  std::vector<cplx> p_hat(lp);
  std::vector<double> em_acc(n_vaps, 0.0);

  SeSnapshot snap;
  if (prob.se_hook) {
    snap.w_len = w_len;
    snap.n_vaps = n_vaps;
    snap.vap_ids = vap_ids;
    snap.set_ofs = slot_ofs;
    snap.nu_z_mean.assign((size_t)w_len * n_vaps, 0.0);
    snap.nu_x_mean.assign((size_t)w_len * n_vaps, 0.0);
    snap.nu_r_mean.assign((size_t)w_len * n_vaps, 0.0);
  }

  bool converged = false;
  int iters = 0;
  for (int i = 1; i <= cfg.i_max; ++i) {
    refine();

    double num_ch = 0.0, den_ch = 0.0, nmse_num = 0.0;
    std::fill(em_acc.begin(), em_acc.end(), 0.0);
    for (int k = 0; k < w_len; ++k) {
      const int st = prob.window.t0 - 1 + k;
      for (int vi = 0; vi < n_vaps; ++vi) {
        const int v = vap_ids[vi];
        const int u = v / m_ant;
        const auto& users = lay.coop_ap_to_users[u];
        const int n_set = (int)users.size();
        const size_t base = (size_t)k * n_slots + slot_ofs[vi];
        cplx* sh = &s_hat[((size_t)k * n_vaps + vi) * lp];
        const cplx* y = sig.y_col(st, v);

        if (prob.se_hook && n_set > 0) {
          double vx = 0.0;
          for (int s = 0; s < n_set; ++s) vx += nu_x[base + s];
          snap.nu_x_mean[(size_t)k * n_vaps + vi] = vx / n_set;
        }

        gamp_linear_step(pil, users.data(), n_set, &x_hat[base], &nu_x[base],
                         sh, p_hat.data(), nu_p.data());

        double em = 0.0, nz = 0.0;
        for (int l = 0; l < lp; ++l) {
          OutputStep os =
              prob.channel
                  ? prob.channel->step(p_hat[l], nu_p[l], y[l], sigma_eff[vi],
                                       cfg.nu_p_floor, v)
                  : gaussian_output_step(p_hat[l], nu_p[l], y[l],
                                         sigma_eff[vi], cfg.nu_p_floor);
          em += std::norm(y[l] - os.z_hat) + os.nu_z;
          nz += os.nu_z;
          sh[l] = os.s_hat;
          nu_s[l] = os.nu_s;
        }
        em_acc[vi] += em;
        if (prob.se_hook)
          snap.nu_z_mean[(size_t)k * n_vaps + vi] = nz / lp;

        const cplx* xt = sig.x_col(st, v);
        double nr_acc = 0.0;
        for (int s = 0; s < n_set; ++s) {
          const int n = users[s];
          const cplx* col = pil.col(n);
          cplx racc{0.0, 0.0};
          double nracc = 0.0;
          for (int l = 0; l < lp; ++l) {
            racc += std::conj(col[l]) * sh[l];
            nracc += std::norm(col[l]) * nu_s[l];
          }
          const double nu_r = 1.0 / std::max(nracc, 1e-300);
          nr_acc += nu_r;
          const cplx r_hat = x_hat[base + s] + nu_r * racc;
          BgResult bg = bg_denoiser(r_hat, nu_r, rho0 * lay.g(n, u),
                                    phi_right[base + s], eps_p);
          const cplx x_old = x_hat[base + s];
          const cplx x_new = theta * bg.x_hat + (1.0 - theta) * x_old;
          num_ch += std::norm(x_new - x_old);
          den_ch += std::norm(x_old);
          x_hat[base + s] = x_new;
          nu_x[base + s] = theta * bg.nu_x + (1.0 - theta) * nu_x[base + s];
          phi_left[base + s] = clamp_prob(bg.phi_left_next, eps_p);
          nmse_num += std::norm(x_new - xt[n]);
        }
        if (prob.se_hook && n_set > 0)
          snap.nu_r_mean[(size_t)k * n_vaps + vi] = nr_acc / n_set;
      }
    }
    if (prob.se_hook) {
      snap.iteration = i;
      snap.phi_fwd = phi_right;
      snap.sigma_eff = sigma_eff;
      prob.se_hook(snap);
    }

    if (cfg.em_noise_learning)
      for (int vi = 0; vi < n_vaps; ++vi)
        sigma_eff[vi] = em_acc[vi] / ((double)lp * w_len);

    iters = i;
    const double nmse = has_energy ? nmse_num / den_true : nan;
    res.nmse_trajectory.push_back(nmse);
    const double rel =
        den_ch > 0.0 ? num_ch / den_ch
                     : (num_ch > 0.0 ? std::numeric_limits<double>::infinity()
                                     : 0.0);
    IterationTrace tr;
    tr.iteration = i;
    tr.rel_change = rel;
    tr.nmse_lin = nmse;
    double se = 0.0;
    for (double s : sigma_eff) se += s;
    tr.sigma_eff_mean = n_vaps > 0 ? se / n_vaps : 0.0;
    double mpl = 0.0;
    for (int n : act_users)
      for (int k = 0; k < w_len; ++k) mpl += pi_l[aidx(n, k)];
    tr.mean_pi_left =
        act_users.empty() ? 0.5 : mpl / ((double)act_users.size() * w_len);
    res.trace.push_back(tr);
    if (prob.trace_hook) prob.trace_hook(tr);
    if (rel < cfg.eps_conv) {
      converged = true;
      break;
    }
  }
  refine();  // fusion consumes messages consistent with the final evidence

  res.iterations = iters;
  res.converged = converged;
  res.sigma_eff = sigma_eff;

  const int delta = prob.window.delta_w;
  res.posterior.assign((size_t)delta * n_users, nan);
  res.llr.assign((size_t)delta * n_users, nan);
  res.decision.assign((size_t)delta * n_users, 0);
  for (int n : act_users)
    for (int f = 0; f < delta; ++f) {
      const int k = prob.window.t1 - prob.window.t0 + f;
      const double llr =
          fuse_llr(pi_l[aidx(n, k)], psi_r[aidx(n, k)], vph_r[aidx(n, k)]);
      res.llr[(size_t)f * n_users + n] = llr;
      res.posterior[(size_t)f * n_users + n] = sigmoid(llr);
      res.decision[(size_t)f * n_users + n] = llr >= cfg.iota ? 1 : 0;
    }

  res.x_hat.assign((size_t)delta * n_vaps * n_users, cplx{0.0, 0.0});
  for (int f = 0; f < delta; ++f) {
    const int k = prob.window.t1 - prob.window.t0 + f;
    for (int vi = 0; vi < n_vaps; ++vi) {
      const int u = vap_ids[vi] / m_ant;
      const auto& users = lay.coop_ap_to_users[u];
      const size_t base = (size_t)k * n_slots + slot_ofs[vi];
      cplx* out = res.x_hat.data() + ((size_t)f * n_vaps + vi) * n_users;
      for (int s = 0; s < (int)users.size(); ++s)
        out[users[s]] = x_hat[base + s];
    }
  }
  return res;
}

}  // namespace mcad
