#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "mcad/rng.hpp"

namespace mcad {

// Uniform scalar quantizer over [-clip*input_std, clip*input_std] with
// 2^bits half-open bins (lo, hi]; levels are bin midpoints, so the outer
// bins saturate at the nearest interior level. Complex samples quantize
// component-wise.
struct UniformQuantizer {
  int bits = 0;
  double input_std = 1.0;
  double clip = 3.0;
  double step = 0.0;
  std::vector<double> thresholds;  // interior only, size 2^bits - 1
  std::vector<double> levels;      // size 2^bits

  int n_bins() const { return (int)levels.size(); }
  int bin_of(double v) const;
  std::pair<double, double> bin_bounds(int k) const;  // +-inf at the ends
  double quantize(double v) const { return levels[bin_of(v)]; }
  cplx quantize(cplx y) const {
    return {quantize(y.real()), quantize(y.imag())};
  }
};

UniformQuantizer build_quantizer(int bits, double input_std, double clip = 3.0);

// Codebook audit dump: bin index, lower and upper edge, level.
void dump_codebook(const UniformQuantizer& q, std::ostream& os);

enum class FronthaulMode { kQF, kDF };

// Per-sample bit allocation under a per-AP per-frame budget of b_total bits:
// QF spreads over L*M complex samples (two real components each), DF over
// the AP's cooperation-set LLRs.
struct BudgetResolution {
  FronthaulMode mode = FronthaulMode::kQF;
  int bits_per_unit = 0;  // QF: b_Q per complex sample; DF: b_D per LLR
  int bits_per_real = 0;  // QF: floor(b_Q/2); DF: b_D
  bool feasible = false;
};

BudgetResolution budget_resolve(long long b_total, FronthaulMode mode,
                                int pilot_length, int antennas_per_ap,
                                int coop_users);

}  // namespace mcad
