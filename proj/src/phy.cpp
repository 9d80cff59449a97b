#include "mcad/phy.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mcad/units.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary signal dumps assume a little-endian host");

namespace mcad {

double SystemParams::rho0_lin() const { return dbm_to_mw(rho0_dbm); }

double SystemParams::noise_var_lin() const {
  if (noise_var_override_lin >= 0.0) return noise_var_override_lin;
  return dbm_to_mw(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

PilotMatrix gen_pilots(int pilot_length, int n_users, std::uint64_t seed) {
  if (pilot_length < 1 || n_users < 1)
    throw std::invalid_argument("gen_pilots: empty dimensions");
  PilotMatrix pm;
  pm.pilot_length = pilot_length;
  pm.n_users = n_users;
  pm.a.resize((size_t)pilot_length * n_users);
  const double var = 1.0 / pilot_length;
  for (int n = 0; n < n_users; ++n) {
    Rng rng = Rng::keyed(seed, streams::kPilot, (std::uint64_t)n);
    cplx* col = pm.a.data() + (size_t)n * pilot_length;
    for (int l = 0; l < pilot_length; ++l) col[l] = rng.cgaussian(var);
  }
  return pm;
}

PilotMatrix gen_orthonormal_pilots(int pilot_length, int n_users,
                                   std::uint64_t seed) {
  if (n_users > pilot_length)
    throw std::invalid_argument(
        "gen_orthonormal_pilots: needs n_users <= pilot_length");
  PilotMatrix pm = gen_pilots(pilot_length, n_users, seed);
  const int L = pilot_length;
  // modified Gram-Schmidt, two passes for orthogonality at working precision
  for (int n = 0; n < n_users; ++n) {
    cplx* cn = pm.a.data() + (size_t)n * L;
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < n; ++k) {
        const cplx* ck = pm.a.data() + (size_t)k * L;
        cplx dot = 0.0;
        for (int l = 0; l < L; ++l) dot += std::conj(ck[l]) * cn[l];
        for (int l = 0; l < L; ++l) cn[l] -= dot * ck[l];
      }
    double nrm = 0.0;
    for (int l = 0; l < L; ++l) nrm += std::norm(cn[l]);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12)
      throw std::runtime_error("gen_orthonormal_pilots: rank deficiency");
    for (int l = 0; l < L; ++l) cn[l] /= nrm;
  }
  return pm;
}

FrameSignals synthesize_frames(const NetworkLayout& layout,
                               const ActivityTrace& trace,
                               const PilotMatrix& pilots,
                               const SystemParams& sys, std::uint64_t seed) {
  const int n_users = layout.n_users();
  if (trace.n_users != n_users || pilots.n_users != n_users)
    throw std::invalid_argument("synthesize_frames: user count mismatch");
  const int n_aps = layout.n_aps();
  const int m_ant = sys.antennas_per_ap;
  if (m_ant < 1) throw std::invalid_argument("synthesize_frames: antennas_per_ap < 1");
  const int n_vaps = n_aps * m_ant;
  const int tt = trace.frame_count;
  const int L = pilots.pilot_length;

  FrameSignals fs;
  fs.n_frames = tt;
  fs.n_users = n_users;
  fs.n_vaps = n_vaps;
  fs.pilot_length = L;
  fs.noise_var = sys.noise_var_lin();
  fs.tx_power = sys.rho0_lin();
  fs.x_true.assign((size_t)tt * n_vaps * n_users, cplx{0.0, 0.0});
  fs.z.assign((size_t)tt * n_vaps * L, cplx{0.0, 0.0});
  fs.y.resize((size_t)tt * n_vaps * L);

  const double amp = std::sqrt(fs.tx_power);
  for (int t = 0; t < tt; ++t)
    for (int u = 0; u < n_aps; ++u)
      for (int m = 0; m < m_ant; ++m) {
        const int v = u * m_ant + m;
        cplx* xcol = fs.x_true.data() + ((size_t)t * n_vaps + v) * n_users;
        cplx* zcol = fs.z.data() + ((size_t)t * n_vaps + v) * L;
        cplx* ycol = fs.y.data() + ((size_t)t * n_vaps + v) * L;
        Rng ch = Rng::keyed(seed, streams::kChannel, (std::uint64_t)t,
                            (std::uint64_t)u, (std::uint64_t)m);
        for (int n = 0; n < n_users; ++n) {
          cplx h = ch.cgaussian(layout.g(n, u));
          if (trace.at(n, t)) xcol[n] = amp * h;
        }
        for (int n = 0; n < n_users; ++n) {
          if (xcol[n] == cplx{0.0, 0.0}) continue;
          const cplx* an = pilots.col(n);
          const cplx xv = xcol[n];
          for (int l = 0; l < L; ++l) zcol[l] += an[l] * xv;
        }
        Rng nz = Rng::keyed(seed, streams::kNoise, (std::uint64_t)t,
                            (std::uint64_t)u, (std::uint64_t)m);
        for (int l = 0; l < L; ++l) ycol[l] = zcol[l] + nz.cgaussian(fs.noise_var);
      }
  return fs;
}

double effective_noise_power(const NetworkLayout& layout,
                             const SystemParams& sys, int u, double p_a,
                             int pilot_length) {
  if (u < 0 || u >= layout.n_aps())
    throw std::invalid_argument("effective_noise_power: bad AP index");
  std::vector<char> in_set(layout.n_users(), 0);
  for (int n : layout.coop_ap_to_users[u]) in_set[n] = 1;
  double acc = 0.0;
  const double rho0 = sys.rho0_lin();
  for (int n = 0; n < layout.n_users(); ++n)
    if (!in_set[n]) acc += p_a * rho0 * layout.g(n, u) / pilot_length;
  return sys.noise_var_lin() + acc;
}

double mean_rx_power(const NetworkLayout& layout, const SystemParams& sys,
                     int u, double p_a, int pilot_length) {
  if (u < 0 || u >= layout.n_aps())
    throw std::invalid_argument("mean_rx_power: bad AP index");
  double acc = 0.0;
  const double rho0 = sys.rho0_lin();
  for (int n = 0; n < layout.n_users(); ++n)
    acc += p_a * rho0 * layout.g(n, u) / pilot_length;
  return sys.noise_var_lin() + acc;
}

void save_signals(const FrameSignals& fs, const std::string& path,
                  std::uint64_t seed) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_signals: cannot open " + path);
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "mcad-signals v1\n";
  hdr << "frames " << fs.n_frames << " vaps " << fs.n_vaps << " pilot_len "
      << fs.pilot_length << "\n";
  hdr << "seed " << seed << "\n";
  hdr << "noise_var " << fs.noise_var << " tx_power " << fs.tx_power << "\n";
  hdr << "layout t,v,l interleaved re,im float64 little-endian\n";
  hdr << "end-header\n";
  f << hdr.str();
  f.write(reinterpret_cast<const char*>(fs.y.data()),
          (std::streamsize)(fs.y.size() * sizeof(cplx)));
  if (!f) throw std::runtime_error("save_signals: write failed for " + path);
}

FrameSignals load_signals(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_signals: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "mcad-signals v1")
    throw std::runtime_error("load_signals: bad header");
  FrameSignals fs;
  {
    std::getline(f, line);
    std::istringstream ss(line);
    std::string k1, k2, k3;
    ss >> k1 >> fs.n_frames >> k2 >> fs.n_vaps >> k3 >> fs.pilot_length;
    if (k1 != "frames" || k2 != "vaps" || k3 != "pilot_len" || !ss)
      throw std::runtime_error("load_signals: bad dims line");
  }
  std::getline(f, line);  // seed, informational
  {
    std::getline(f, line);
    std::istringstream ss(line);
    std::string k1, k2;
    ss >> k1 >> fs.noise_var >> k2 >> fs.tx_power;
    if (k1 != "noise_var" || k2 != "tx_power" || !ss)
      throw std::runtime_error("load_signals: bad powers line");
  }
  std::getline(f, line);  // layout description
  if (!std::getline(f, line) || line != "end-header")
    throw std::runtime_error("load_signals: missing end-header");
  fs.y.resize((size_t)fs.n_frames * fs.n_vaps * fs.pilot_length);
  f.read(reinterpret_cast<char*>(fs.y.data()),
         (std::streamsize)(fs.y.size() * sizeof(cplx)));
  if ((size_t)f.gcount() != fs.y.size() * sizeof(cplx))
    throw std::runtime_error("load_signals: truncated payload");
  return fs;
}

}  // namespace mcad
