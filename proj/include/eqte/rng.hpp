#ifndef EQTE_RNG_HPP
#define EQTE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace eqte::rng {

using Engine = std::mt19937_64;

// SplitMix64 finaliser; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the substream addressed by `path` under `master`. The result only
// depends on (master, path), never on which worker asks for it or when.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = mix64(master);
  for (std::uint64_t step : path) state = mix64(state ^ mix64(step + 0x632be59bd9b4e019ULL));
  return state;
}

inline Engine substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Engine(derive_seed(master, path));
}

// Stream tags used across the library.
inline constexpr std::uint64_t kDataStream = 1;
inline constexpr std::uint64_t kSubsampleStream = 2;

}  // namespace eqte::rng

#endif  // EQTE_RNG_HPP
