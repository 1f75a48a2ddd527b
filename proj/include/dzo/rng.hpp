#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dzo {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3", SC 2011). Maps a 128-bit counter and a 64-bit key to 128
// pseudo-random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter Philox4x32(PhiloxCounter counter, PhiloxKey key);

// SplitMix64 finalizer, used to fold (seed, stream) pairs into Philox keys.
std::uint64_t Mix64(std::uint64_t x);

// What a draw is used for. Each purpose gets its own counter subspace so that
// adding draws for one purpose never shifts another.
enum class StreamPurpose : std::uint32_t {
  kDirection = 0,
  kNoise = 1,
  kInit = 2,
  kMetric = 3,
  kConstruction = 4,
  kAuxiliary = 5,
};

// Counter-based random stream. The value of draw j is a pure function of
// (seed, stream, substream, purpose, j); there is no hidden mutable state
// shared between streams, so streams may be created on any thread in any
// order and still reproduce bit-identical sequences.
// 
// Satisfies UniformRandomBitGenerator so it can be handed to <random>
// algorithms, but the sampling helpers below are what the library uses
// because their output is identical across standard library vendors.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0,
             StreamPurpose purpose = StreamPurpose::kAuxiliary);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return NextU64(); }

  std::uint64_t NextU64();
  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double Uniform();
  // Standard normal via Box-Muller; pairs are cached.
  double Normal();
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t UniformInt(std::uint64_t bound);

  // Number of 128-bit blocks consumed so far.
  std::uint64_t blocks_used() const { return block_; }

 private:
  void Refill();

  PhiloxKey key_;
  std::uint64_t substream_;
  std::uint32_t purpose_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int buffer_pos_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace dzo
