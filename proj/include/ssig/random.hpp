#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ssig {

// Purposes for deriving independent stream ids from one run seed.
enum class StreamPurpose : std::uint64_t {
  init = 1,
  shuffle = 2,
  noise = 3,
  eval = 4,
  data = 5,
  split = 6,
};

// Stream id for `purpose`, optionally indexed (e.g. by epoch).
constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index = 0) noexcept {
  return (static_cast<std::uint64_t>(purpose) << 48) ^ index;
}

// xoshiro256** generator whose 256-bit state is filled by SplitMix64 from
// mix(seed) ^ mix(stream_id). The algorithm and every derived transform
// below are fixed, so a (seed, stream_id) pair yields the same sequence on
// every platform.
//
// A stream is single-consumer. Parallel users create their own stream ids.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t id() const noexcept { return id_; }

  std::uint64_t next_u64() noexcept;

  // Uniform in the open interval (0, 1); see uniform_from_bits.
  double next_uniform() noexcept;

  // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t bound) noexcept;

  // Standard normal via Box-Muller; each call consumes two uniforms.
  double next_normal() noexcept;

  void fill_uniform(std::span<double> out) noexcept;
  // Consumes uniforms in pairs, using both Box-Muller outputs.
  void fill_normal(std::span<double> out) noexcept;

  // A child stream keyed by (seed, id, child). Does not advance this stream.
  RandomStream split(std::uint64_t child) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t id_;
  std::array<std::uint64_t, 4> s_{};
};

// ((x >> 12) + 0.5) * 2^-52. The extremes 2^-53 and 1 - 2^-53 are exact, so
// the result is never 0 or 1.
constexpr double uniform_from_bits(std::uint64_t x) noexcept {
  return (static_cast<double>(x >> 12) + 0.5) * 0x1.0p-52;
}

// Box-Muller transform of two uniforms in (0, 1).
std::pair<double, double> box_muller(double u1, double u2) noexcept;

// n uniforms in (0, 1); throws ArgumentError when n == 0.
std::vector<double> sample_uniform(RandomStream& stream, std::size_t n);
// n standard normals; throws ArgumentError when n == 0.
std::vector<double> sample_standard_normal(RandomStream& stream, std::size_t n);

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(RandomStream& stream, std::size_t n);

}  // namespace ssig
