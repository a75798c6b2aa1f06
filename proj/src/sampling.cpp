#include "seq4d/sampling.hpp"

#include <stdexcept>

#include "seq4d/rng.hpp"

namespace seq4d::sampling {

std::vector<FramePair> sample_pairs(int seq_len, int n_pairs,
                                    const SamplingConfig& cfg) {
  if (seq_len < 2) {
    throw std::invalid_argument("sampling needs a sequence of >= 2 frames");
  }
  if (cfg.max_gap < 1 || cfg.max_gap > seq_len - 1) {
    throw std::invalid_argument("sampling.max_gap must be in [1, seq_len-1]");
  }
  if (n_pairs < 0) {
    throw std::invalid_argument("n_pairs must be >= 0");
  }
  Rng rng(cfg.seed);
  std::vector<FramePair> pairs;
  pairs.reserve(static_cast<std::size_t>(n_pairs) *
                (cfg.rto_duplicate ? 2 : 1));
  for (int d = 0; d < n_pairs; ++d) {
    const int k =
        cfg.enable_nfs
            ? 1 + static_cast<int>(rng.next_index(
                      static_cast<std::size_t>(cfg.max_gap)))
            : 1;
    const int t = static_cast<int>(
        rng.next_index(static_cast<std::size_t>(seq_len - k)));
    if (cfg.enable_rto && cfg.rto_duplicate) {
      pairs.push_back(FramePair{t, t + k, k});
      pairs.push_back(FramePair{t + k, t, k});
    } else if (cfg.enable_rto && rng.next_bool()) {
      pairs.push_back(FramePair{t + k, t, k});
    } else {
      pairs.push_back(FramePair{t, t + k, k});
    }
  }
  return pairs;
}

}  // namespace seq4d::sampling
