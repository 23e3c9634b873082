#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace drokit {

/// SplitMix64 step: state += 0x9e3779b97f4a7c15, then the finalizer
///   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
///   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
///   z ^ (z >> 31)
std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a hash, used to turn stream names into stream ids.
std::uint64_t fnv1a(std::string_view text);

/// xoshiro256** generator.
///
/// Seeding fills the four state words with consecutive SplitMix64 outputs of
/// the seed. Named streams are derived from a master seed as
/// `Rng(master ^ fnv1a(name))` so that adding a consumer never shifts the
/// draws another consumer sees. `split(id)` derives a child whose seed is the
/// SplitMix64 mix of the parent's state words and `id`, without advancing the
/// parent.
///
/// Derived quantities:
///   uniform()   = (next() >> 11) * 2^-53                   in [0, 1)
///   below(n)    = Lemire multiply-shift with rejection      in [0, n)
///   normal()    = Box-Muller cosine branch on (1 - u1, u2)
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng stream(std::uint64_t master_seed, std::string_view name);
  Rng split(std::uint64_t id) const;

  std::uint64_t next();
  double uniform();
  std::size_t below(std::size_t n);
  double normal();
  /// Draws index i with probability probs[i]; probs must sum to one.
  std::size_t categorical(std::span<const double> probs);

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace drokit
