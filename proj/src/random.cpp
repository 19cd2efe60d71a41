#include "ssig/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ssig/error.hpp"

namespace ssig {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t x) noexcept { return splitmix64(x); }

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), id_(stream_id) {
  std::uint64_t sm = mix(seed) ^ mix(stream_id ^ 0xD1B54A32D192ED03ULL);
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RandomStream::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::next_uniform() noexcept {
  return uniform_from_bits(next_u64());
}

std::uint64_t RandomStream::next_below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= limit) return x % bound;
  }
}

double RandomStream::next_normal() noexcept {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return box_muller(u1, u2).first;
}

void RandomStream::fill_uniform(std::span<double> out) noexcept {
  for (double& x : out) x = next_uniform();
}

void RandomStream::fill_normal(std::span<double> out) noexcept {
  std::size_t i = 0;
  for (; i + 2 <= out.size(); i += 2) {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    auto [a, b] = box_muller(u1, u2);
    out[i] = a;
    out[i + 1] = b;
  }
  if (i < out.size()) out[i] = next_normal();
}

RandomStream RandomStream::split(std::uint64_t child) const noexcept {
  return RandomStream(seed_, mix(id_) ^ mix(child + 0x632BE59BD9B4E019ULL));
}

std::pair<double, double> box_muller(double u1, double u2) noexcept {
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

std::vector<double> sample_uniform(RandomStream& stream, std::size_t n) {
  if (n == 0) throw ArgumentError("sample_uniform: n must be at least 1");
  std::vector<double> out(n);
  stream.fill_uniform(out);
  return out;
}

std::vector<double> sample_standard_normal(RandomStream& stream, std::size_t n) {
  if (n == 0) throw ArgumentError("sample_standard_normal: n must be at least 1");
  std::vector<double> out(n);
  stream.fill_normal(out);
  return out;
}

std::vector<std::size_t> random_permutation(RandomStream& stream, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.next_below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace ssig
