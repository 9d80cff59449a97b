#include "mcad/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mcad {

int UniformQuantizer::bin_of(double v) const {
  // half-open bins (lo, hi]: a value on a threshold maps down
  return (int)(std::lower_bound(thresholds.begin(), thresholds.end(), v) -
               thresholds.begin());
}

std::pair<double, double> UniformQuantizer::bin_bounds(int k) const {
  const double inf = std::numeric_limits<double>::infinity();
  double lo = k == 0 ? -inf : thresholds[k - 1];
  double hi = k == n_bins() - 1 ? inf : thresholds[k];
  return {lo, hi};
}

UniformQuantizer build_quantizer(int bits, double input_std, double clip) {
  if (bits < 1) throw std::invalid_argument("build_quantizer: bits < 1");
  if (!(input_std > 0.0))
    throw std::invalid_argument("build_quantizer: input_std must be > 0");
  if (!(clip > 0.0)) throw std::invalid_argument("build_quantizer: clip must be > 0");
  if (bits > 24) throw std::invalid_argument("build_quantizer: bits > 24");
  UniformQuantizer q;
  q.bits = bits;
  q.input_std = input_std;
  q.clip = clip;
  const int b = 1 << bits;
  const double lo = -clip * input_std;
  q.step = 2.0 * clip * input_std / b;
  q.thresholds.resize(b - 1);
  for (int k = 1; k < b; ++k) q.thresholds[k - 1] = lo + k * q.step;
  q.levels.resize(b);
  for (int k = 0; k < b; ++k) q.levels[k] = lo + (k + 0.5) * q.step;
  return q;
}

void dump_codebook(const UniformQuantizer& q, std::ostream& os) {
  os << "bin,lower,upper,level\n";
  os.precision(17);
  for (int k = 0; k < q.n_bins(); ++k) {
    auto [lo, hi] = q.bin_bounds(k);
    os << k << "," << lo << "," << hi << "," << q.levels[k] << "\n";
  }
}

BudgetResolution budget_resolve(long long b_total, FronthaulMode mode,
                                int pilot_length, int antennas_per_ap,
                                int coop_users) {
  if (b_total < 0) throw std::invalid_argument("budget_resolve: negative budget");
  BudgetResolution r;
  r.mode = mode;
  if (mode == FronthaulMode::kQF) {
    long long denom = (long long)pilot_length * antennas_per_ap;
    if (denom < 1) throw std::invalid_argument("budget_resolve: empty QF denominator");
    r.bits_per_unit = (int)(b_total / denom);
    r.bits_per_real = r.bits_per_unit / 2;
    r.feasible = r.bits_per_real >= 1;
  } else {
    if (coop_users < 1) {
      // nothing to report over this fronthaul; trivially infeasible
      r.bits_per_unit = 0;
      r.bits_per_real = 0;
      r.feasible = false;
      return r;
    }
    r.bits_per_unit = (int)(b_total / coop_users);
    r.bits_per_real = r.bits_per_unit;
    r.feasible = r.bits_per_unit >= 1;
  }
  return r;
}

}  // namespace mcad
