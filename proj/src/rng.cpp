#include "gsql/rng.hpp"

namespace gsql {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53U;
constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

SampleStream::SampleStream(std::uint64_t seed, StreamId id) noexcept
    : seed_(seed),
      id_(id),
      tag_(splitmix64(splitmix64(splitmix64(id.mdp_id) ^ id.algorithm_id) ^ id.replicate_id)) {}

std::uint64_t SampleStream::next_bits() noexcept {
  const std::uint64_t block = counter_ >> 1;
  if (block != cached_block_) {
    const auto out = philox4x32_10(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(tag_), static_cast<std::uint32_t>(tag_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    cache_ = {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
              (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
    cached_block_ = block;
  }
  return cache_[counter_++ & 1U];
}

double SampleStream::next_uniform() noexcept {
  return static_cast<double>(next_bits() >> 11) * 0x1.0p-53;
}

}  // namespace gsql
