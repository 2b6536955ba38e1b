#pragma once

#include <array>
#include <cstdint>

namespace gsql {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of
/// (counter, key); used as the core of counter-based sample streams.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer. Used to derive seeds and stream tags.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed number `index` of `parent`.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

struct StreamId {
  std::uint64_t mdp_id = 0;
  std::uint64_t algorithm_id = 0;
  std::uint64_t replicate_id = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Reserved algorithm ids for streams that do not belong to a learner.
inline constexpr std::uint64_t kMdpGenerationStream = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kMixtureCoinStream = 0xFFFF'FFFF'0000'0002ULL;

/// Counter-based uniform stream keyed by (seed, stream id).
///
/// Draw d of a stream is a pure function of (seed, id, d): equal keys give
/// identical sequences and distinct ids give independent ones. Each call to
/// next_uniform() consumes exactly one draw. Single owner; not thread-safe.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, StreamId id) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  std::uint64_t next_bits() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const StreamId& id() const noexcept { return id_; }

 private:
  std::uint64_t seed_;
  StreamId id_;
  std::uint64_t tag_;
  std::uint64_t counter_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<std::uint64_t, 2> cache_{};
};

}  // namespace gsql
