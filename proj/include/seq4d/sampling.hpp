// Temporal pair sampling for training: non-adjacent frame selection draws the
// gap uniformly from {1..max_gap}, and temporal-order reversal emits the pair
// backwards with probability 1/2 (or duplicates both orders).
#pragma once

#include <cstdint>
#include <vector>

namespace seq4d::sampling {

struct SamplingConfig {
  int max_gap = 4;
  bool enable_nfs = true;   // non-adjacent frame selection
  bool enable_rto = true;   // reverse temporal order per draw
  bool rto_duplicate = false;  // emit both orders instead of flipping a coin
  std::uint64_t seed = 0;
};

struct FramePair {
  int first = 0;
  int second = 0;
  int gap = 0;  // |second - first|
};

// Draws n_pairs pairs: gap k uniform in {1..max_gap} (1 when NFS is off),
// then t uniform in {0..seq_len-1-k} so no clamping bias appears at sequence
// edges. Deterministic given cfg.seed. Throws when seq_len < 2 or max_gap is
// outside [1, seq_len-1].
std::vector<FramePair> sample_pairs(int seq_len, int n_pairs,
                                    const SamplingConfig& cfg);

}  // namespace seq4d::sampling
