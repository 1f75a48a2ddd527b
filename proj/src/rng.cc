#include "dzo/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dzo {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void MulHiLo(std::uint32_t a, std::uint32_t b, std::uint32_t* lo, std::uint32_t* hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  *lo = static_cast<std::uint32_t>(product);
  *hi = static_cast<std::uint32_t>(product >> 32);
}

inline PhiloxCounter Round(const PhiloxCounter& c, const PhiloxKey& k) {
  std::uint32_t lo0, hi0, lo1, hi1;
  MulHiLo(kPhiloxM0, c[0], &lo0, &hi0);
  MulHiLo(kPhiloxM1, c[2], &lo1, &hi1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxCounter Philox4x32(PhiloxCounter counter, PhiloxKey key) {
  counter = Round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
    counter = Round(counter, key);
  }
  return counter;
}

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream,
                       StreamPurpose purpose)
    : substream_(substream), purpose_(static_cast<std::uint32_t>(purpose)) {
  const std::uint64_t k = Mix64(Mix64(seed) ^ Mix64(stream + 0x632BE59BD9B4E019ull));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void CounterRng::Refill() {
  // Counter layout: [block lo | block hi (16 bits) + purpose (16 bits) |
  // substream lo | substream hi].
  if (block_ >> 48) throw std::overflow_error("CounterRng: block counter exhausted");
  const PhiloxCounter ctr = {
      static_cast<std::uint32_t>(block_),
      static_cast<std::uint32_t>((block_ >> 32) & 0xFFFFu) | (purpose_ << 16),
      static_cast<std::uint32_t>(substream_),
      static_cast<std::uint32_t>(substream_ >> 32),
  };
  buffer_ = Philox4x32(ctr, key_);
  ++block_;
  buffer_pos_ = 0;
}

std::uint64_t CounterRng::NextU64() {
  if (buffer_pos_ > 2) Refill();
  const std::uint64_t lo = buffer_[buffer_pos_];
  const std::uint64_t hi = buffer_[buffer_pos_ + 1];
  buffer_pos_ += 2;
  return lo | (hi << 32);
}

double CounterRng::Uniform() {
  // (m + 0.5) / 2^53 lies strictly inside (0, 1).
  const std::uint64_t m = NextU64() >> 11;
  return (static_cast<double>(m) + 0.5) * 0x1.0p-53;
}

double CounterRng::Normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double u1 = Uniform();
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(phi);
  has_spare_normal_ = true;
  return r * std::cos(phi);
}

std::uint64_t CounterRng::UniformInt(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("UniformInt: bound must be positive");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r;
  do {
    r = NextU64();
  } while (r >= limit);
  return r % bound;
}

}  // namespace dzo
