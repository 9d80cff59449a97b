#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcad/netgen.hpp"
#include "mcad/rng.hpp"
#include "mcad/traffic.hpp"

namespace mcad {

// Pilot matrix, column-major: user n's length-L sequence is contiguous.
struct PilotMatrix {
  int pilot_length = 0;  // L
  int n_users = 0;       // N
  std::vector<cplx> a;   // L x N, a[(size_t)n * L + l]

  cplx at(int l, int n) const { return a[(size_t)n * pilot_length + l]; }
  const cplx* col(int n) const { return a.data() + (size_t)n * pilot_length; }
};

// Powers in dBm, converted to one linear scale (mW) everywhere downstream.
// noise_var_override_lin >= 0 replaces the PSD-derived noise power, which
// controlled experiments use to pin the noise exactly (including zero).
struct SystemParams {
  double rho0_dbm = 13.0;
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 1e7;
  int antennas_per_ap = 1;
  double noise_var_override_lin = -1.0;

  double rho0_lin() const;
  double noise_var_lin() const;
};

// Per-window ground truth and observations. Virtual AP v = u*M + m; each
// antenna is an independent channel draw sharing the AP's attenuation.
// Storage puts the (frame, virtual AP) slice contiguous: x_true has N
// entries per slice, z and y have L.
struct FrameSignals {
  int n_frames = 0;
  int n_users = 0;
  int n_vaps = 0;
  int pilot_length = 0;
  double noise_var = 0.0;
  double tx_power = 0.0;
  std::vector<cplx> x_true;  // [t][v][n]
  std::vector<cplx> z;       // [t][v][l], noiseless
  std::vector<cplx> y;       // [t][v][l]

  const cplx* x_col(int t, int v) const {
    return x_true.data() + ((size_t)t * n_vaps + v) * n_users;
  }
  const cplx* y_col(int t, int v) const {
    return y.data() + ((size_t)t * n_vaps + v) * pilot_length;
  }
  const cplx* z_col(int t, int v) const {
    return z.data() + ((size_t)t * n_vaps + v) * pilot_length;
  }
  cplx* y_col(int t, int v) {
    return y.data() + ((size_t)t * n_vaps + v) * pilot_length;
  }
};

// i.i.d. CN(0, 1/L) entries, one stream per user column.
PilotMatrix gen_pilots(int pilot_length, int n_users, std::uint64_t seed);

// Gram-Schmidt on a Gaussian draw: exactly orthonormal columns
// (requires n_users <= pilot_length). Used by noiseless exact-recovery
// checks and the least-squares reference.
PilotMatrix gen_orthonormal_pilots(int pilot_length, int n_users,
                                   std::uint64_t seed);

// Draws per-frame block-fading channels h ~ CN(0, g), forms
// x = sqrt(rho0) * activity * h, and y = A x + w. Every user contributes
// to every AP; cooperation sets restrict inference only.
FrameSignals synthesize_frames(const NetworkLayout& layout,
                               const ActivityTrace& trace,
                               const PilotMatrix& pilots,
                               const SystemParams& sys, std::uint64_t seed);

// Noise plus the Gaussian-approximated power of out-of-cooperation-set
// interference at AP u, per pilot symbol.
double effective_noise_power(const NetworkLayout& layout,
                             const SystemParams& sys, int u, double p_a,
                             int pilot_length);

// Same aggregation over all users: mean received power per pilot symbol,
// which fixes the quantizer input range at a fronthaul-limited AP.
double mean_rx_power(const NetworkLayout& layout, const SystemParams& sys,
                     int u, double p_a, int pilot_length);

// Binary replay dump of the observation tensor: text header, then raw
// little-endian float64 interleaved (re, im) in [t][v][l] order.
void save_signals(const FrameSignals& fs, const std::string& path,
                  std::uint64_t seed);
FrameSignals load_signals(const std::string& path);

}  // namespace mcad
