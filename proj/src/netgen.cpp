#include "mcad/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mcad/rng.hpp"
#include "mcad/units.hpp"

namespace mcad {

namespace {

constexpr double kMinDistKm = 0.005;
constexpr double kSqrt3 = 1.7320508075688772;

double dist_km(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

double path_loss_db(double distance_km) {
  double d = std::max(distance_km, kMinDistKm);
  return -128.1 - 37.6 * std::log10(d);
}

std::vector<std::array<double, 2>> hex_lattice(int tiers, double half_spacing_km) {
  if (tiers < 1) throw std::invalid_argument("hex_lattice: tiers must be >= 1");
  if (!(half_spacing_km > 0.0))
    throw std::invalid_argument("hex_lattice: half_spacing_km must be > 0");
  const double circum = 2.0 * half_spacing_km / kSqrt3;
  struct Cand {
    int ring;
    double angle;
    int q, r;
    double x, y;
  };
  std::vector<Cand> cands;
  const int k = tiers - 1;
  for (int q = -k; q <= k; ++q)
    for (int r = -k; r <= k; ++r) {
      int ring = (std::abs(q) + std::abs(r) + std::abs(q + r)) / 2;
      if (ring > k) continue;
      double x = circum * 1.5 * q;
      double y = circum * kSqrt3 * (r + 0.5 * q);
      double ang = std::atan2(y, x);
      if (ang < 0.0) ang += 2.0 * M_PI;
      cands.push_back({ring, ring == 0 ? 0.0 : ang, q, r, x, y});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.ring != b.ring) return a.ring < b.ring;
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.q != b.q) return a.q < b.q;
    return a.r < b.r;
  });
  std::vector<std::array<double, 2>> out;
  out.reserve(cands.size());
  for (const Cand& c : cands) out.push_back({c.x, c.y});
  return out;
}

bool point_in_hex(double x, double y, double cx, double cy, double circumradius) {
  double dx = std::abs(x - cx);
  double dy = std::abs(y - cy);
  if (dy > 0.5 * kSqrt3 * circumradius) return false;
  return kSqrt3 * dx + dy <= kSqrt3 * circumradius;
}

void derive_coop_sets(NetworkLayout& layout) {
  const int n_users = layout.n_users();
  const int n_aps = layout.n_aps();
  layout.coop_user_to_aps.assign(n_users, {});
  layout.coop_ap_to_users.assign(n_aps, {});
  for (int n = 0; n < n_users; ++n)
    for (int u = 0; u < n_aps; ++u)
      if (dist_km(layout.user_positions[n], layout.ap_positions[u]) <=
          layout.d_max_km) {
        layout.coop_user_to_aps[n].push_back(u);
        layout.coop_ap_to_users[u].push_back(n);
      }
}

NetworkLayout build_hex_network(int tiers, int users_per_cell,
                                double half_spacing_km, double d_max_km,
                                std::uint64_t seed) {
  if (tiers < 1) throw std::invalid_argument("build_hex_network: tiers must be >= 1");
  if (users_per_cell < 1)
    throw std::invalid_argument("build_hex_network: users_per_cell must be >= 1");
  if (!(half_spacing_km > 0.0))
    throw std::invalid_argument("build_hex_network: half_spacing_km must be > 0");
  if (!(d_max_km > 0.0))
    throw std::invalid_argument("build_hex_network: d_max_km must be > 0");

  NetworkLayout la;
  la.half_spacing_km = half_spacing_km;
  la.d_max_km = d_max_km;
  la.ap_positions = hex_lattice(tiers, half_spacing_km);
  const int n_aps = la.n_aps();
  const double circum = 2.0 * half_spacing_km / kSqrt3;

  la.user_positions.reserve((size_t)n_aps * users_per_cell);
  for (int c = 0; c < n_aps; ++c) {
    const auto& ap = la.ap_positions[c];
    for (int j = 0; j < users_per_cell; ++j) {
      // per-user stream: the rejection loop's draw count can't shift
      // anyone else's position
      Rng rng = Rng::keyed(seed, streams::kNetUser, (std::uint64_t)c,
                           (std::uint64_t)j);
      double x, y;
      do {
        x = ap[0] + circum * (2.0 * rng.uniform() - 1.0);
        y = ap[1] + 0.5 * kSqrt3 * circum * (2.0 * rng.uniform() - 1.0);
      } while (!point_in_hex(x, y, ap[0], ap[1], circum));
      la.user_positions.push_back({x, y});
    }
  }

  const int n_users = la.n_users();
  la.path_loss_db.resize((size_t)n_users * n_aps);
  la.g_lin.resize((size_t)n_users * n_aps);
  for (int n = 0; n < n_users; ++n)
    for (int u = 0; u < n_aps; ++u) {
      double pl = path_loss_db(dist_km(la.user_positions[n], la.ap_positions[u]));
      la.path_loss_db[(size_t)n * n_aps + u] = pl;
      la.g_lin[(size_t)n * n_aps + u] = db_to_lin(pl);
    }

  derive_coop_sets(la);
  return la;
}

void save_layout(const NetworkLayout& layout, std::ostream& os) {
  os.precision(17);
  os << "mcad-network v1\n";
  os << "aps " << layout.n_aps() << "\n";
  os << "users " << layout.n_users() << "\n";
  os << "r0_km " << layout.half_spacing_km << "\n";
  os << "d_max_km " << layout.d_max_km << "\n";
  for (int u = 0; u < layout.n_aps(); ++u)
    os << "ap " << u << " " << layout.ap_positions[u][0] << " "
       << layout.ap_positions[u][1] << "\n";
  for (int n = 0; n < layout.n_users(); ++n)
    os << "user " << n << " " << layout.user_positions[n][0] << " "
       << layout.user_positions[n][1] << "\n";
  os << "pathloss_db " << layout.n_users() << " " << layout.n_aps() << "\n";
  for (int n = 0; n < layout.n_users(); ++n) {
    for (int u = 0; u < layout.n_aps(); ++u) {
      if (u) os << ",";
      os << layout.pl_db(n, u);
    }
    os << "\n";
  }
  os << "end\n";
}

void save_layout(const NetworkLayout& layout, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_layout: cannot open " + path);
  save_layout(layout, f);
  if (!f) throw std::runtime_error("save_layout: write failed for " + path);
}

NetworkLayout load_layout(std::istream& is) {
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(is, line))
      throw std::runtime_error(std::string("load_layout: truncated before ") + what);
    return line;
  };
  next_line("header");
  if (line != "mcad-network v1")
    throw std::runtime_error("load_layout: bad header '" + line + "'");

  NetworkLayout la;
  int n_aps = -1, n_users = -1;
  {
    std::istringstream ss(next_line("aps"));
    std::string key;
    ss >> key >> n_aps;
    if (key != "aps" || n_aps < 1) throw std::runtime_error("load_layout: bad aps line");
  }
  {
    std::istringstream ss(next_line("users"));
    std::string key;
    ss >> key >> n_users;
    if (key != "users" || n_users < 1)
      throw std::runtime_error("load_layout: bad users line");
  }
  {
    std::istringstream ss(next_line("r0_km"));
    std::string key;
    ss >> key >> la.half_spacing_km;
    if (key != "r0_km") throw std::runtime_error("load_layout: bad r0_km line");
  }
  {
    std::istringstream ss(next_line("d_max_km"));
    std::string key;
    ss >> key >> la.d_max_km;
    if (key != "d_max_km") throw std::runtime_error("load_layout: bad d_max_km line");
  }
  la.ap_positions.resize(n_aps);
  for (int u = 0; u < n_aps; ++u) {
    std::istringstream ss(next_line("ap record"));
    std::string key;
    int idx;
    ss >> key >> idx >> la.ap_positions[u][0] >> la.ap_positions[u][1];
    if (key != "ap" || idx != u || !ss)
      throw std::runtime_error("load_layout: bad ap record");
  }
  la.user_positions.resize(n_users);
  for (int n = 0; n < n_users; ++n) {
    std::istringstream ss(next_line("user record"));
    std::string key;
    int idx;
    ss >> key >> idx >> la.user_positions[n][0] >> la.user_positions[n][1];
    if (key != "user" || idx != n || !ss)
      throw std::runtime_error("load_layout: bad user record");
  }
  {
    std::istringstream ss(next_line("pathloss_db"));
    std::string key;
    int rows, cols;
    ss >> key >> rows >> cols;
    if (key != "pathloss_db" || rows != n_users || cols != n_aps)
      throw std::runtime_error("load_layout: bad pathloss_db dimensions");
  }
  la.path_loss_db.resize((size_t)n_users * n_aps);
  la.g_lin.resize((size_t)n_users * n_aps);
  for (int n = 0; n < n_users; ++n) {
    std::istringstream ss(next_line("pathloss row"));
    std::string cell;
    for (int u = 0; u < n_aps; ++u) {
      if (!std::getline(ss, cell, ','))
        throw std::runtime_error("load_layout: short pathloss row");
      double pl = std::stod(cell);
      la.path_loss_db[(size_t)n * n_aps + u] = pl;
      la.g_lin[(size_t)n * n_aps + u] = db_to_lin(pl);
    }
  }
  next_line("end");
  if (line != "end") throw std::runtime_error("load_layout: missing end marker");
  derive_coop_sets(la);
  return la;
}

NetworkLayout load_layout(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_layout: cannot open " + path);
  return load_layout(f);
}

}  // namespace mcad
