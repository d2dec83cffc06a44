#include "causalwr/random.hpp"

namespace causalwr {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s = h ^ (a + 0x632BE59BD9B4E019ULL);
  h = splitmix64(s);
  s = h ^ (b + 0x85157AF5ULL);
  return splitmix64(s);
}

std::uint64_t SplitMix::below(std::uint64_t bound) noexcept {
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r;
  do {
    r = (*this)();
  } while (r >= limit);
  return r % bound;
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

}  // namespace causalwr
