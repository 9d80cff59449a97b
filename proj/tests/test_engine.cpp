#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "mcad/engine.hpp"
#include "mcad/messages.hpp"
#include "mcad/netgen.hpp"
#include "mcad/phy.hpp"
#include "mcad/rng.hpp"
#include "mcad/traffic.hpp"
#include "mcad/units.hpp"
#include "mcad/window.hpp"

using mcad::cplx;

namespace {

// One AP at the origin, all users on a ring so every link has the same
// attenuation. Removes the near-far spread for controlled SNR experiments.
mcad::NetworkLayout ring_layout(int n_users, double radius_km,
                                double d_max_km) {
  mcad::NetworkLayout lay;
  lay.ap_positions = {{0.0, 0.0}};
  lay.half_spacing_km = 1.0;
  lay.d_max_km = d_max_km;
  double pl = mcad::path_loss_db(radius_km);
  for (int n = 0; n < n_users; ++n) {
    double ang = 2.0 * M_PI * n / n_users;
    lay.user_positions.push_back({radius_km * std::cos(ang),
                                  radius_km * std::sin(ang)});
    lay.path_loss_db.push_back(pl);
    lay.g_lin.push_back(mcad::db_to_lin(pl));
  }
  mcad::derive_coop_sets(lay);
  return lay;
}

struct Desk {
  mcad::NetworkLayout layout;
  mcad::MarkovActivityParams act;
  mcad::ActivityTrace trace;
  mcad::PilotMatrix pilots;
  mcad::SystemParams sys;
  mcad::FrameSignals signals;
};

Desk make_desk(int tiers, int users_per_cell, int pilot_len, int n_frames,
               double p_a, double beta, double d_max_r0, double noise_override,
               std::uint64_t seed, bool orthonormal = false) {
  Desk d;
  double r0 = 0.5;
  d.layout = mcad::build_hex_network(tiers, users_per_cell, r0, d_max_r0 * r0,
                                     seed);
  d.act = mcad::make_activity_params(p_a, beta);
  d.trace = mcad::sample_trace(d.act, d.layout.n_users(), n_frames, seed + 1);
  d.pilots = orthonormal
                 ? mcad::gen_orthonormal_pilots(pilot_len, d.layout.n_users(),
                                                seed + 2)
                 : mcad::gen_pilots(pilot_len, d.layout.n_users(), seed + 2);
  d.sys.noise_var_override_lin = noise_override;
  d.signals = mcad::synthesize_frames(d.layout, d.trace, d.pilots, d.sys,
                                      seed + 3);
  return d;
}

}  // namespace

TEST_CASE("plug-in estimate: zero state and identity sensing") {
  mcad::PilotMatrix pm;
  pm.pilot_length = 2;
  pm.n_users = 2;
  pm.a = {cplx{1, 0}, cplx{0, 1}, cplx{0.5, -0.5}, cplx{2, 0}};
  int users[2] = {0, 1};
  cplx x[2] = {cplx{0, 0}, cplx{0, 0}};
  double vx[2] = {0.3, 0.7};
  cplx sprev[2] = {cplx{0, 0}, cplx{0, 0}};
  cplx ph[2];
  double np[2];
  mcad::gamp_linear_step(pm, users, 2, x, vx, sprev, ph, np);
  CHECK(ph[0] == cplx{0, 0});
  CHECK(ph[1] == cplx{0, 0});
  CHECK(np[0] == doctest::Approx(1.0 * 0.3 + 0.5 * 0.7).epsilon(1e-15));
  CHECK(np[1] == doctest::Approx(1.0 * 0.3 + 4.0 * 0.7).epsilon(1e-15));

  // L=1, one user, a=1: p_hat = x, nu_p = nu_x
  mcad::PilotMatrix one;
  one.pilot_length = 1;
  one.n_users = 1;
  one.a = {cplx{1, 0}};
  cplx xc[1] = {cplx{0.2, -0.4}};
  double vc[1] = {0.9};
  cplx s0[1] = {cplx{0, 0}};
  cplx ph1[1];
  double np1[1];
  mcad::gamp_linear_step(one, users, 1, xc, vc, s0, ph1, np1);
  CHECK(ph1[0] == xc[0]);
  CHECK(np1[0] == 0.9);
}

TEST_CASE("plug-in estimate matches a direct evaluation") {
  const int lp = 4, nu = 3;
  mcad::Rng rng = mcad::Rng::keyed(5, "test.fixture", 20);
  mcad::PilotMatrix pm;
  pm.pilot_length = lp;
  pm.n_users = nu;
  for (int i = 0; i < lp * nu; ++i) pm.a.push_back(rng.cgaussian(1.0));
  int users[3] = {0, 1, 2};
  cplx x[3];
  double vx[3];
  cplx sprev[4];
  for (int s = 0; s < nu; ++s) {
    x[s] = rng.cgaussian(1.0);
    vx[s] = rng.uniform() + 0.1;
  }
  for (int l = 0; l < lp; ++l) sprev[l] = rng.cgaussian(1.0);
  cplx ph[4];
  double np[4];
  mcad::gamp_linear_step(pm, users, nu, x, vx, sprev, ph, np);
  for (int l = 0; l < lp; ++l) {
    cplx acc{0, 0};
    double vacc = 0;
    for (int s = 0; s < nu; ++s) {
      acc += pm.at(l, s) * x[s];
      vacc += std::norm(pm.at(l, s)) * vx[s];
    }
    acc -= vacc * sprev[l];
    CHECK(std::abs(ph[l] - acc) <= 1e-12 * (1.0 + std::abs(acc)));
    CHECK(np[l] == doctest::Approx(vacc).epsilon(1e-12));
  }
}

TEST_CASE("zero received signal drives everything inactive") {
  Desk d = make_desk(1, 40, 16, 3, 0.2, 0.6, 3.0, 0.0, 404);
  // silence the network: no activity, no noise
  std::fill(d.signals.y.begin(), d.signals.y.end(), cplx{0, 0});
  std::fill(d.signals.x_true.begin(), d.signals.x_true.end(), cplx{0, 0});

  mcad::WindowProblem prob;
  prob.layout = &d.layout;
  prob.pilots = &d.pilots;
  prob.signals = &d.signals;
  prob.activity = &d.act;
  prob.window = {1, 3, 1, 3};
  mcad::DetectionResult res = mcad::run_window(prob);

  REQUIRE(res.n_target == 3);
  for (int f = 0; f < 3; ++f)
    for (int n = 0; n < res.n_users; ++n) {
      CHECK(res.posterior_row(f)[n] < d.act.p_a);
      CHECK(res.decision_row(f)[n] == 0);
    }
  for (double v : res.nmse_trajectory) CHECK(std::isnan(v));
  for (size_t i = 0; i < res.x_hat.size(); ++i)
    CHECK(res.x_hat[i] == cplx{0, 0});
}

TEST_CASE("collapsed prior equals the degenerate chain bit for bit") {
  // alpha = beta = p_a makes the chain memoryless, so the temporal machinery
  // must reproduce the i.i.d. prior exactly
  Desk d = make_desk(2, 12, 20, 4, 0.2, 0.2, 2.4, -1.0, 905);
  REQUIRE(d.act.alpha == doctest::Approx(d.act.p_a).epsilon(1e-15));

  mcad::WindowProblem prob;
  prob.layout = &d.layout;
  prob.pilots = &d.pilots;
  prob.signals = &d.signals;
  prob.activity = &d.act;
  prob.window = {1, 3, 1, 3};
  prob.config.i_max = 12;

  prob.config.mode = mcad::PriorMode::kDcs;
  mcad::DetectionResult dcs = mcad::run_window(prob);
  prob.config.mode = mcad::PriorMode::kCs;
  mcad::DetectionResult cs = mcad::run_window(prob);

  REQUIRE(dcs.llr.size() == cs.llr.size());
  CHECK(std::memcmp(dcs.llr.data(), cs.llr.data(),
                    dcs.llr.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(dcs.posterior.data(), cs.posterior.data(),
                    dcs.posterior.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(dcs.x_hat.data(), cs.x_hat.data(),
                    dcs.x_hat.size() * sizeof(cplx)) == 0);
  CHECK(dcs.decision == cs.decision);
  CHECK(dcs.iterations == cs.iterations);
}

TEST_CASE("noiseless orthonormal pilots recover the exact support") {
  Desk d = make_desk(1, 48, 64, 3, 0.15, 0.7, 3.0, 0.0, 606, true);
  mcad::WindowProblem prob;
  prob.layout = &d.layout;
  prob.pilots = &d.pilots;
  prob.signals = &d.signals;
  prob.activity = &d.act;
  prob.window = {1, 3, 1, 3};
  prob.config.damping = 1.0;  // literal recursion for the exactness check
  mcad::DetectionResult res = mcad::run_window(prob);

  int mismatches = 0;
  for (int f = 0; f < 3; ++f)
    for (int n = 0; n < res.n_users; ++n)
      if (res.decision_row(f)[n] != (d.trace.at(n, f) ? 1 : 0)) ++mismatches;
  CHECK(mismatches == 0);
  // the noise learner sees a perfect fit; only rounding residue of the
  // exactly cancelled observation survives
  for (double s : res.sigma_eff) CHECK(s <= 1e-30);
  // near-exact channel recovery
  CHECK(res.nmse_trajectory.back() < 1e-6);
  CHECK(res.converged);
}

TEST_CASE("empty cooperation sets reduce the noise learner to mean power") {
  Desk d = make_desk(1, 30, 8, 2, 0.3, 0.5, 3.0, -1.0, 707);
  // strip the membership after synthesis: the physics keeps every user on
  // the air, the detector just has nobody to explain the signal with
  for (auto& s : d.layout.coop_ap_to_users) s.clear();
  for (auto& s : d.layout.coop_user_to_aps) s.clear();
  REQUIRE(d.layout.coop_ap_to_users[0].empty());
  mcad::WindowProblem prob;
  prob.layout = &d.layout;
  prob.pilots = &d.pilots;
  prob.signals = &d.signals;
  prob.activity = &d.act;
  prob.window = {1, 2, 1, 2};
  prob.config.i_max = 1;
  mcad::DetectionResult res = mcad::run_window(prob);

  // with no users in the set the fitted mean is zero, so the learned
  // variance is the raw mean received power over the window; the output
  // variance floor leaks a sliver of the observation into the fit, hence
  // the loose tolerance
  double acc = 0.0;
  int cnt = 0;
  for (int t = 0; t < 2; ++t)
    for (int l = 0; l < 8; ++l) {
      acc += std::norm(d.signals.y_col(t, 0)[l]);
      ++cnt;
    }
  REQUIRE(res.sigma_eff.size() == 1);
  CHECK(res.sigma_eff[0] == doctest::Approx(acc / cnt).epsilon(1e-3));
  // no evidence, so the posterior falls back to the stationary prior
  for (int n = 0; n < res.n_users; ++n)
    CHECK(res.posterior_row(0)[n] == doctest::Approx(d.act.p_a).epsilon(1e-9));
}

TEST_CASE("noise learner finds the out-of-set interference floor") {
  // interference-dominated: thermal noise pinned far below the out-of-set
  // power, detection restricted to the center AP
  const double p_a = 0.3;
  const int lp = 32;
  int factor2 = 0, within_half = 0, trials = 0;
  double ratio_acc = 0.0, worst_lo = 1e300, worst_hi = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Desk d = make_desk(2, 40, lp, 4, p_a, 0.7, 1.4, 1e-13,
                       1000 + 17 * trial);
    double target = mcad::effective_noise_power(d.layout, d.sys, 0, p_a, lp);
    double init = mcad::mean_rx_power(d.layout, d.sys, 0, p_a, lp);
    mcad::WindowProblem prob;
    prob.layout = &d.layout;
    prob.pilots = &d.pilots;
    prob.signals = &d.signals;
    prob.activity = &d.act;
    prob.window = {1, 4, 1, 4};
    prob.single_ap = 0;
    prob.config.sigma_eff_init = init;
    prob.config.i_max = 40;
    mcad::DetectionResult res = mcad::run_window(prob);
    double learned = res.sigma_eff[0];
    double ratio = learned / target;
    ratio_acc += ratio;
    worst_lo = std::min(worst_lo, ratio);
    worst_hi = std::max(worst_hi, ratio);
    if (ratio >= 0.5 && ratio <= 2.0) ++factor2;
    if (ratio >= 0.5 && ratio <= 1.5) ++within_half;
    // the raw mean power init sits far above the floor in every draw
    // (twenty times to four decades, set by the nearest user); the
    // learner must leave it decisively
    CHECK(learned <= 0.15 * init);
    ++trials;
  }
  // the learned variance absorbs the unexplained residual of the in-set
  // channels on top of the out-of-set power, so it lands somewhat above
  // the pure interference target on average and spreads per trial with
  // the random interferer activity (measured mean 1.29, factor two in
  // 90 of 100, range 0.44 to 5.72 on these seeds)
  double mean_ratio = ratio_acc / trials;
  CHECK(mean_ratio >= 0.7);
  CHECK(mean_ratio <= 1.8);
  CHECK(factor2 >= 82);
  CHECK(within_half >= 70);
  CHECK(worst_lo >= 0.25);
  CHECK(worst_hi <= 10.0);
}

TEST_CASE("convergence audit at half load settles without diverging") {
  // fifty expected active users against a hundred pilot symbols puts this
  // run right at the recovery edge, where single trajectories wobble while
  // the ensemble keeps descending; the bounds below are frozen from a
  // forty-trial calibration of this exact configuration (per-trial ten
  // percent monotonicity 37/40, finals 0.01 to 0.78, ensemble final 0.29)
  const int n_users = 1000, lp = 100, imax = 25;
  const double p_a = 0.05;
  mcad::NetworkLayout lay = ring_layout(n_users, 0.3, 1.0);
  double g = lay.g_lin[0];
  mcad::SystemParams sys;
  double sig_mean = n_users * p_a * sys.rho0_lin() * g / lp;
  sys.noise_var_override_lin = sig_mean / 100.0;  // 20 dB effective SNR

  mcad::MarkovActivityParams act = mcad::make_activity_params(p_a, p_a);
  std::vector<double> mean_traj(imax + 1, 0.0);
  int mono10 = 0, below_half = 0, total = 0, err_total = 0;
  for (int trial = 0; trial < 40; ++trial) {
    mcad::ActivityTrace tr =
        mcad::sample_trace(act, n_users, 1, 5000 + 3 * trial);
    mcad::PilotMatrix pm = mcad::gen_pilots(lp, n_users, 6000 + 3 * trial);
    mcad::FrameSignals fs =
        mcad::synthesize_frames(lay, tr, pm, sys, 7000 + 3 * trial);
    mcad::WindowProblem prob;
    prob.layout = &lay;
    prob.pilots = &pm;
    prob.signals = &fs;
    prob.activity = &act;
    prob.window = {1, 1, 1, 1};
    prob.config.i_max = imax;
    prob.config.damping = 1.0;
    mcad::DetectionResult res = mcad::run_window(prob);
    const std::vector<double>& tj = res.nmse_trajectory;
    // every run must improve on the zero initialization and stay improved
    CHECK(tj.back() <= 0.9);
    if (tj.back() < 0.5) ++below_half;
    bool monotone10 = true;
    for (size_t i = 4; i < tj.size(); ++i)
      if (tj[i] > tj[i - 1] * 1.10) monotone10 = false;
    if (monotone10) ++mono10;
    // early stops hold their converged level for the ensemble average
    for (int i = 0; i <= imax; ++i)
      mean_traj[i] += (size_t)i < tj.size() ? tj[i] : tj.back();
    for (int n = 0; n < n_users; ++n)
      if (res.decision_row(0)[n] != (tr.at(n, 0) ? 1 : 0)) ++err_total;
    ++total;
  }
  CHECK(mono10 >= 33);
  CHECK(below_half >= 28);
  // the trial-averaged trajectory descends like the ensemble prediction
  bool mean_monotone = true;
  for (int i = 0; i <= imax; ++i) {
    mean_traj[i] /= total;
    if (i >= 4 && mean_traj[i] > mean_traj[i - 1] * 1.01) mean_monotone = false;
  }
  CHECK(mean_monotone);
  CHECK(mean_traj[imax] <= 0.35);
  // activity detection stays reliable even where the channel error plateaus
  CHECK(err_total <= 40 * n_users * 0.05);
}

TEST_CASE("trace rows and hook") {
  Desk d = make_desk(1, 30, 16, 2, 0.2, 0.6, 3.0, -1.0, 808);
  mcad::WindowProblem prob;
  prob.layout = &d.layout;
  prob.pilots = &d.pilots;
  prob.signals = &d.signals;
  prob.activity = &d.act;
  prob.window = {1, 2, 1, 2};
  prob.config.i_max = 7;
  int hook_calls = 0;
  prob.trace_hook = [&](const mcad::IterationTrace& tr) {
    ++hook_calls;
    CHECK(tr.iteration == hook_calls);
  };
  mcad::DetectionResult res = mcad::run_window(prob);
  CHECK((int)res.trace.size() == res.iterations);
  CHECK(hook_calls == res.iterations);
  CHECK(res.nmse_trajectory.size() == (size_t)res.iterations + 1);
  CHECK(res.nmse_trajectory[0] == 1.0);
  for (const auto& tr : res.trace) {
    CHECK(tr.sigma_eff_mean > 0.0);
    CHECK(tr.mean_pi_left > 0.0);
    CHECK(tr.mean_pi_left < 1.0);
  }
  CHECK(mcad::trace_csv_header() ==
        "iteration,rel_change,nmse_lin,sigma_eff_mean,mean_pi_left");
  std::string row = mcad::trace_csv_row(res.trace[0]);
  CHECK(row.find("1,") == 0);

  // posterior outputs stay inside the clamped probability range
  for (int f = 0; f < res.n_target; ++f)
    for (int n = 0; n < res.n_users; ++n) {
      double p = res.posterior_row(f)[n];
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      CHECK(std::isfinite(res.llr_row(f)[n]));
    }
}

TEST_CASE("single-AP mode marks out-of-set users as undecided") {
  Desk d = make_desk(2, 10, 16, 2, 0.2, 0.6, 1.4, -1.0, 909);
  mcad::WindowProblem prob;
  prob.layout = &d.layout;
  prob.pilots = &d.pilots;
  prob.signals = &d.signals;
  prob.activity = &d.act;
  prob.window = {1, 2, 1, 2};
  prob.single_ap = 3;
  mcad::DetectionResult res = mcad::run_window(prob);
  REQUIRE(res.vap_ids == std::vector<int>{3});
  std::vector<bool> in_set(d.layout.n_users(), false);
  for (int n : d.layout.coop_ap_to_users[3]) in_set[n] = true;
  int covered = 0;
  for (int n = 0; n < res.n_users; ++n) {
    if (in_set[n]) {
      CHECK(std::isfinite(res.llr_row(0)[n]));
      ++covered;
    } else {
      CHECK(std::isnan(res.llr_row(0)[n]));
      CHECK(res.decision_row(0)[n] == 0);
    }
  }
  CHECK(covered == (int)d.layout.coop_ap_to_users[3].size());
}

TEST_CASE("input validation") {
  Desk d = make_desk(1, 10, 8, 2, 0.2, 0.6, 3.0, -1.0, 111);
  mcad::WindowProblem prob;
  prob.layout = &d.layout;
  prob.pilots = &d.pilots;
  prob.signals = &d.signals;
  prob.activity = &d.act;
  prob.window = {1, 2, 1, 2};
  CHECK_NOTHROW(mcad::run_window(prob));

  mcad::WindowProblem bad = prob;
  bad.signals = nullptr;
  CHECK_THROWS(mcad::run_window(bad));
  bad = prob;
  bad.window = {1, 3, 1, 3};  // longer than the synthesized trace
  CHECK_THROWS(mcad::run_window(bad));
  bad = prob;
  bad.window = {1, 2, 2, 2};  // target block runs past the window
  CHECK_THROWS(mcad::run_window(bad));
  bad = prob;
  bad.config.damping = 0.0;
  CHECK_THROWS(mcad::run_window(bad));
  bad = prob;
  bad.single_ap = 99;
  CHECK_THROWS(mcad::run_window(bad));
}
