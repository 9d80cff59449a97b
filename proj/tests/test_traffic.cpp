#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mcad/traffic.hpp"

using mcad::ActivityTrace;
using mcad::load_trace;
using mcad::make_activity_params;
using mcad::MarkovActivityParams;
using mcad::sample_trace;
using mcad::save_trace;
using mcad::solve_steady_state;

TEST_CASE("steady-state inversion") {
  CHECK(solve_steady_state(0.1, 0.9) == doctest::Approx(1.0 / 90.0).epsilon(1e-15));
  CHECK(solve_steady_state(0.1, 0.1) == 0.1);  // uncorrelated fixed point, exact
  CHECK(solve_steady_state(0.5, 0.5) == 0.5);
  // p_a reproduced from the solved alpha
  for (double p : {0.05, 0.1, 0.3})
    for (double b : {0.2, 0.5, 0.9, 0.99}) {
      double a = solve_steady_state(p, b);
      CHECK(p * (1.0 + a - b) == doctest::Approx(a).epsilon(1e-14));
    }
  CHECK_THROWS(solve_steady_state(0.95, 0.1));  // needs p_a <= 1/(2-beta)
}

TEST_CASE("absorbing active state yields all-ones rows") {
  MarkovActivityParams mp;
  mp.alpha = 0.0;
  mp.beta = 1.0;
  mp.p_a = 1.0;  // stationary for the absorbing chain, forces frame 1 active
  ActivityTrace tr = sample_trace(mp, 20, 40, 7);
  for (int n = 0; n < 20; ++n)
    for (int t = 0; t < 40; ++t) CHECK(tr.at(n, t));
}

TEST_CASE("deterministic flip chain alternates") {
  MarkovActivityParams mp;
  mp.alpha = 1.0;
  mp.beta = 0.0;
  mp.p_a = 0.5;
  ActivityTrace tr = sample_trace(mp, 50, 30, 11);
  for (int n = 0; n < 50; ++n)
    for (int t = 1; t < 30; ++t) CHECK(tr.at(n, t) == !tr.at(n, t - 1));
}

TEST_CASE("law of large numbers at the operating point") {
  const int n_users = 100000, n_frames = 50;
  MarkovActivityParams mp = make_activity_params(0.1, 0.9);
  ActivityTrace tr = sample_trace(mp, n_users, n_frames, 2024);

  // per-frame active fraction stays at p_a
  for (int t = 0; t < n_frames; ++t) {
    long c = 0;
    for (int n = 0; n < n_users; ++n) c += tr.at(n, t);
    CHECK(std::abs((double)c / n_users - 0.1) < 0.005);
  }

  // lag-1 conditional frequencies converge to (alpha, beta)
  long aa = 0, a_tot = 0, ia = 0, i_tot = 0;
  for (int n = 0; n < n_users; ++n)
    for (int t = 1; t < n_frames; ++t) {
      if (tr.at(n, t - 1)) {
        ++a_tot;
        aa += tr.at(n, t);
      } else {
        ++i_tot;
        ia += tr.at(n, t);
      }
    }
  CHECK(std::abs((double)aa / a_tot - 0.9) < 0.01);
  CHECK(std::abs((double)ia / i_tot - 1.0 / 90.0) < 0.002);
}

TEST_CASE("determinism and seed sensitivity") {
  MarkovActivityParams mp = make_activity_params(0.3, 0.6);
  ActivityTrace a = sample_trace(mp, 200, 25, 99);
  ActivityTrace b = sample_trace(mp, 200, 25, 99);
  ActivityTrace c = sample_trace(mp, 200, 25, 100);
  CHECK(a.lam == b.lam);
  CHECK(a.lam != c.lam);
  // user streams are independent of the total user count
  ActivityTrace d = sample_trace(mp, 300, 25, 99);
  for (int n = 0; n < 200; ++n)
    for (int t = 0; t < 25; ++t) CHECK(a.at(n, t) == d.at(n, t));
}

TEST_CASE("per-user overrides") {
  MarkovActivityParams mp = make_activity_params(0.2, 0.5);
  mp.alpha_n.assign(10, 0.0);
  mp.beta_n.assign(10, 1.0);
  mp.p_n.assign(10, 1.0);
  mp.p_n[3] = 0.0;  // user 3 pinned silent, everyone else pinned active
  mp.alpha_n[3] = 0.0;
  mp.beta_n[3] = 0.0;
  ActivityTrace tr = sample_trace(mp, 10, 12, 5);
  for (int n = 0; n < 10; ++n)
    for (int t = 0; t < 12; ++t) CHECK(tr.at(n, t) == (n != 3));

  mp.p_n.resize(7);
  CHECK_THROWS(sample_trace(mp, 10, 12, 5));
}

TEST_CASE("parameter validation") {
  MarkovActivityParams bad;
  bad.alpha = -0.1;
  bad.beta = 0.5;
  bad.p_a = 0.2;
  CHECK_THROWS(sample_trace(bad, 5, 5, 1));
  MarkovActivityParams drift = make_activity_params(0.1, 0.9);
  drift.p_a = 0.2;  // no longer stationary
  CHECK_THROWS(sample_trace(drift, 5, 5, 1));
  MarkovActivityParams ok = make_activity_params(0.1, 0.9);
  CHECK_NOTHROW(sample_trace(ok, 5, 1, 1));
  CHECK_THROWS(sample_trace(ok, 0, 5, 1));
  CHECK_THROWS(sample_trace(ok, 5, 0, 1));
}

TEST_CASE("csv round trip") {
  MarkovActivityParams mp = make_activity_params(0.4, 0.7);
  ActivityTrace tr = sample_trace(mp, 17, 9, 3);
  std::ostringstream os;
  save_trace(tr, os);
  std::istringstream is(os.str());
  ActivityTrace back = load_trace(is);
  CHECK(back.n_users == tr.n_users);
  CHECK(back.frame_count == tr.frame_count);
  CHECK(back.lam == tr.lam);

  std::istringstream bad("1,0,2\n");
  CHECK_THROWS(load_trace(bad));
  std::istringstream ragged("1,0\n1\n");
  CHECK_THROWS(load_trace(ragged));
  std::istringstream empty("");
  CHECK_THROWS(load_trace(empty));
}
