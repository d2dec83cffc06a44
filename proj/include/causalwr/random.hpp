#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace causalwr {

// Main pseudo-random engine for sampling. Seeded from derive_seed so that
// every replicate, row or tree owns an independent, reproducible stream.
using Rng = std::mt19937_64;

// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Counter-based seed derivation: the same (master, a, b) always maps to the
// same child seed, independent of scheduling or worker count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Lightweight engine for hot loops (per-row tie breaking) where constructing
// a Mersenne twister for each row would dominate the cost.
class SplitMix {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return splitmix64(state_); }

  // Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

Rng make_rng(std::uint64_t seed);

}  // namespace causalwr
