#pragma once

#include <cmath>
#include <cstdint>

namespace cmjlab {

namespace detail {

// splitmix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant)
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Named sub-streams, so the draws of one concern never shift another's.
enum class RngLane : std::uint64_t {
  kLife = 1,      // edge life sampling
  kMarks = 2,     // degree-increment marks
  kEndpoint = 3,  // jump-1 endpoint coin in the graph
  kReplica = 4,   // per-replica master streams
  kAncestor = 5,  // ancestor-count draws
  kMisc = 6,
};

/// Deterministic stream id for (seed, index, lane). Streams derived from
/// distinct triples are statistically independent, which is what makes
/// replica fan-out order-independent.
inline constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index,
                                             RngLane lane) {
  std::uint64_t s = detail::mix64(seed + detail::kGolden);
  s = detail::mix64(s ^ (index + detail::kGolden));
  s = detail::mix64(s ^ (static_cast<std::uint64_t>(lane) + detail::kGolden));
  return s;
}

/// Counter-based splitmix64 generator. Cheap to construct, so every
/// individual/edge/replica owns its own instance.
class Rng {
 public:
  explicit constexpr Rng(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next_u64() {
    std::uint64_t z = (state_ += detail::kGolden);
    return detail::mix64(z);
  }

  /// Uniform on the open interval (0,1); never returns 0 or 1, so logs and
  /// inverse transforms are always finite.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate; strictly positive.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

inline Rng make_rng(std::uint64_t seed, std::uint64_t index, RngLane lane) {
  return Rng(derive_stream(seed, index, lane));
}

/// Seed for replica r of a run seeded with `master`.
inline constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
  return derive_stream(master, replica, RngLane::kReplica);
}

}  // namespace cmjlab
