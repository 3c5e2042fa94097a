#pragma once

#include <cmath>
#include <cstdint>

namespace pflow {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3").  A (seed, stream) pair addresses an
/// independent sequence; distinct streams never overlap, so every matrix,
/// trial and planted factor in this codebase draws from its own stream and
/// any single object can be regenerated without replaying the rest.
///
/// Stream layout used across the library:
///   k            entries of ensemble matrix A_k
///   2^32 + t     restricted-isometry probe, deviation trial t
///   2^33 + 2t,+1 restricted-isometry probe, inner-product pair t
///   2^48, 2^48+1 planted factors X and Y of a generated problem
///
/// Counter word order: (block lo32, block hi32, stream lo32, stream hi32).
/// Key = (seed lo32, seed hi32).  Each block yields two u64 outputs,
/// (w0<<32)|w1 and (w2<<32)|w3.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() {
    if (have_ == 0) {
      block(block_index_++);
      have_ = 2;
    }
    return out_[2 - have_--];
  }

  /// Jump straight to a counter block (two u64 outputs per block); drops any
  /// buffered output and the cached Gaussian deviate.
  void seek(std::uint64_t block_index) {
    block_index_ = block_index;
    have_ = 0;
    have_spare_ = false;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the paired deviate is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static void round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr[0] = hi1 ^ ctr[1] ^ key[0];
    ctr[1] = lo1;
    ctr[2] = hi0 ^ ctr[3] ^ key[1];
    ctr[3] = lo0;
  }

  void block(std::uint64_t index) {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    std::uint32_t key[2] = {
        static_cast<std::uint32_t>(seed_),
        static_cast<std::uint32_t>(seed_ >> 32),
    };
    round(ctr, key);
    for (int i = 0; i < 9; ++i) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      round(ctr, key);
    }
    out_[0] = (static_cast<std::uint64_t>(ctr[0]) << 32) | ctr[1];
    out_[1] = (static_cast<std::uint64_t>(ctr[2]) << 32) | ctr[3];
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::uint64_t out_[2] = {0, 0};
  int have_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pflow
