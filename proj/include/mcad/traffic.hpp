#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcad/messages.hpp"

namespace mcad {

// Two-state activity chain: alpha = Pr(active | was idle),
// beta = Pr(active | was active), p_a = stationary active probability.
// Optional per-user overrides; empty vectors mean "use the shared values".
struct MarkovActivityParams {
  double alpha = 0.0;
  double beta = 0.0;
  double p_a = 0.0;
  std::vector<double> alpha_n;
  std::vector<double> beta_n;
  std::vector<double> p_n;

  double a_of(int n) const { return alpha_n.empty() ? alpha : alpha_n[n]; }
  double b_of(int n) const { return beta_n.empty() ? beta : beta_n[n]; }
  double p1_of(int n) const { return p_n.empty() ? p_a : p_n[n]; }
};

struct ActivityTrace {
  int n_users = 0;
  int frame_count = 0;
  std::vector<std::uint8_t> lam;  // N x T row-major, entries 0/1

  bool at(int n, int t) const { return lam[(size_t)n * frame_count + t] != 0; }
};

// alpha solving p_a = alpha / (1 + alpha - beta); throws when the
// pair is infeasible (needs p_a <= 1/(2-beta)).
inline double solve_steady_state(double p_a, double beta) {
  return steady_alpha(p_a, beta);
}

// Builds shared-parameter chain settings from the (p_a, beta) pair.
MarkovActivityParams make_activity_params(double p_a, double beta);

// Checks ranges, the stationarity relation, and override lengths.
void validate_activity_params(const MarkovActivityParams& params, int n_users);

// Frame 1 ~ Bernoulli(p1), then the transition law; one stream per user.
ActivityTrace sample_trace(const MarkovActivityParams& params, int n_users,
                           int n_frames, std::uint64_t seed);

// Plain 0/1 CSV, rows = users, columns = frames.
void save_trace(const ActivityTrace& trace, std::ostream& os);
void save_trace(const ActivityTrace& trace, const std::string& path);
ActivityTrace load_trace(std::istream& is);
ActivityTrace load_trace(const std::string& path);

}  // namespace mcad
