#include "pvgas/rng.hpp"

#include <cmath>

namespace pvgas {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

void Rng::refill() {
  std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(block_),
                                 static_cast<std::uint32_t>(block_ >> 32), stream_[0], stream_[1]};
  std::uint32_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  out_ = c;
  ++block_;
  cursor_ = 0;
}

Rng::result_type Rng::operator()() {
  if (cursor_ >= 4) refill();
  const std::uint64_t lo = out_[cursor_];
  const std::uint64_t hi = out_[cursor_ + 1];
  cursor_ += 2;
  return (hi << 32) | lo;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's nearly-divisionless rejection.
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u = 0.0;
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  spare_normal_ = r * std::sin(kTwoPi * v);
  has_spare_ = true;
  return r * std::cos(kTwoPi * v);
}

Vec2 Rng::disk_point() {
  const double r = kRadius * std::sqrt(uniform());
  const double t = kTwoPi * uniform();
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace pvgas
