#include "mcad/traffic.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "mcad/rng.hpp"

namespace mcad {

MarkovActivityParams make_activity_params(double p_a, double beta) {
  MarkovActivityParams mp;
  mp.p_a = p_a;
  mp.beta = beta;
  mp.alpha = steady_alpha(p_a, beta);
  return mp;
}

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string("activity params: ") + name +
                                " outside [0,1]");
}

}  // namespace

void validate_activity_params(const MarkovActivityParams& params, int n_users) {
  check_unit(params.alpha, "alpha");
  check_unit(params.beta, "beta");
  check_unit(params.p_a, "p_a");
  double lhs = params.p_a * (1.0 + params.alpha - params.beta);
  if (std::abs(lhs - params.alpha) > 1e-12)
    throw std::invalid_argument("activity params: p_a not stationary for (alpha, beta)");
  for (const auto* v : {&params.alpha_n, &params.beta_n, &params.p_n})
    if (!v->empty() && (int)v->size() != n_users)
      throw std::invalid_argument("activity params: override length mismatch");
  for (double a : params.alpha_n) check_unit(a, "alpha_n");
  for (double b : params.beta_n) check_unit(b, "beta_n");
  for (double p : params.p_n) check_unit(p, "p_n");
}

ActivityTrace sample_trace(const MarkovActivityParams& params, int n_users,
                           int n_frames, std::uint64_t seed) {
  if (n_users < 1 || n_frames < 1)
    throw std::invalid_argument("sample_trace: empty dimensions");
  validate_activity_params(params, n_users);
  ActivityTrace tr;
  tr.n_users = n_users;
  tr.frame_count = n_frames;
  tr.lam.resize((size_t)n_users * n_frames);
  for (int n = 0; n < n_users; ++n) {
    Rng rng = Rng::keyed(seed, streams::kTraffic, (std::uint64_t)n);
    const double a = params.a_of(n), b = params.b_of(n), p1 = params.p1_of(n);
    std::uint8_t prev = rng.uniform() < p1 ? 1 : 0;
    tr.lam[(size_t)n * n_frames] = prev;
    for (int t = 1; t < n_frames; ++t) {
      prev = rng.uniform() < (prev ? b : a) ? 1 : 0;
      tr.lam[(size_t)n * n_frames + t] = prev;
    }
  }
  return tr;
}

void save_trace(const ActivityTrace& trace, std::ostream& os) {
  for (int n = 0; n < trace.n_users; ++n) {
    for (int t = 0; t < trace.frame_count; ++t) {
      if (t) os << ",";
      os << (trace.at(n, t) ? '1' : '0');
    }
    os << "\n";
  }
}

void save_trace(const ActivityTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_trace: cannot open " + path);
  save_trace(trace, f);
}

ActivityTrace load_trace(std::istream& is) {
  ActivityTrace tr;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int t = 0;
    for (size_t i = 0; i < line.size(); i += 2, ++t) {
      char c = line[i];
      if (c != '0' && c != '1')
        throw std::runtime_error("load_trace: entries must be 0 or 1");
      if (i + 1 < line.size() && line[i + 1] != ',')
        throw std::runtime_error("load_trace: expected comma separator");
      tr.lam.push_back(c == '1' ? 1 : 0);
    }
    if (tr.n_users == 0)
      tr.frame_count = t;
    else if (t != tr.frame_count)
      throw std::runtime_error("load_trace: ragged rows");
    ++tr.n_users;
  }
  if (tr.n_users == 0) throw std::runtime_error("load_trace: empty input");
  return tr;
}

ActivityTrace load_trace(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_trace: cannot open " + path);
  return load_trace(f);
}

}  // namespace mcad
