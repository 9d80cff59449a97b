#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mcad {

// Multi-cell geometry: AP lattice, dropped users, large-scale attenuation,
// and the distance-thresholded cooperation sets in both directions.
struct NetworkLayout {
  std::vector<std::array<double, 2>> ap_positions;    // km
  std::vector<std::array<double, 2>> user_positions;  // km
  std::vector<double> path_loss_db;  // N x U row-major, dB (negative)
  std::vector<double> g_lin;         // N x U row-major, linear scale
  std::vector<std::vector<int>> coop_user_to_aps;  // U_n per user
  std::vector<std::vector<int>> coop_ap_to_users;  // N_u per AP
  double d_max_km = 0.0;
  double half_spacing_km = 0.0;  // r0, half the inter-AP distance

  int n_aps() const { return (int)ap_positions.size(); }
  int n_users() const { return (int)user_positions.size(); }
  double pl_db(int n, int u) const { return path_loss_db[(size_t)n * n_aps() + u]; }
  double g(int n, int u) const { return g_lin[(size_t)n * n_aps() + u]; }
};

// -128.1 - 37.6 log10(d_km); distances below 5 m are clamped to 5 m so the
// gain stays bounded for users dropped arbitrarily close to an AP.
double path_loss_db(double distance_km);

// Centers of a tiered hexagonal lattice (flat-top cells, inter-center
// distance 2*half_spacing_km). Center cell first, then rings in angular
// order, so indices are stable.
std::vector<std::array<double, 2>> hex_lattice(int tiers, double half_spacing_km);

// Closed flat-top hexagon membership test; circumradius = 2*r0/sqrt(3).
bool point_in_hex(double x, double y, double cx, double cy, double circumradius);

// Fills coop_user_to_aps / coop_ap_to_users from positions and d_max_km.
void derive_coop_sets(NetworkLayout& layout);

// Builds the full layout: lattice APs, users_per_cell uniform drops per
// hexagon (user n lives in cell n / users_per_cell), path losses, coop sets.
NetworkLayout build_hex_network(int tiers, int users_per_cell,
                                double half_spacing_km, double d_max_km,
                                std::uint64_t seed);

// Self-describing text serialization; attenuation rows as dense CSV.
// g_lin and the cooperation sets are reconstructed on load.
void save_layout(const NetworkLayout& layout, std::ostream& os);
void save_layout(const NetworkLayout& layout, const std::string& path);
NetworkLayout load_layout(std::istream& is);
NetworkLayout load_layout(const std::string& path);

}  // namespace mcad
