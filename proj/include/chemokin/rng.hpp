#pragma once

#include <array>
#include <cstdint>

namespace chemokin {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Every draw is a pure function of (key, counter), so particle l at step k
/// always sees the same numbers no matter which thread advances it.
class Philox4x32 {
public:
  using Block = std::array<std::uint32_t, 4>;

  explicit constexpr Philox4x32(std::uint64_t key)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

  constexpr Block operator()(Block ctr) const {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

  /// Block for (stream, step): the counter is {stream, step} as two 64-bit halves.
  constexpr Block draw(std::uint64_t stream, std::uint64_t step) const {
    return (*this)(Block{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                         static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)});
  }

  /// Blocks for W consecutive streams first_stream + j at one step, laid out
  /// word-major (out[w][j]) so the rounds vectorise across j.
  template <int W>
  void draw_lanes(std::uint64_t first_stream, std::uint64_t step, std::uint32_t (&out)[4][W]) const {
    std::uint32_t c0[W], c1[W], c2[W], c3[W];
    for (int j = 0; j < W; ++j) {
      const std::uint64_t s = first_stream + static_cast<std::uint64_t>(j);
      c0[j] = static_cast<std::uint32_t>(s);
      c1[j] = static_cast<std::uint32_t>(s >> 32);
      c2[j] = static_cast<std::uint32_t>(step);
      c3[j] = static_cast<std::uint32_t>(step >> 32);
    }
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k0 += kWeyl0;
        k1 += kWeyl1;
      }
#pragma omp simd
      for (int j = 0; j < W; ++j) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[j];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[j];
        const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[j] ^ k0;
        const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[j] ^ k1;
        c1[j] = static_cast<std::uint32_t>(p1);
        c3[j] = static_cast<std::uint32_t>(p0);
        c0[j] = n0;
        c2[j] = n2;
      }
    }
    for (int j = 0; j < W; ++j) {
      out[0][j] = c0[j];
      out[1][j] = c1[j];
      out[2][j] = c2[j];
      out[3][j] = c3[j];
    }
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Block single_round(const Block& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return Block{hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  std::array<std::uint32_t, 2> key_;
};

/// [0, 1) with 32-bit resolution.
constexpr double to_unit(std::uint32_t u) { return u * 0x1.0p-32; }

/// [0, 1) with 53-bit resolution from two words.
constexpr double to_unit53(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) * 0x1.0p-53;
}

/// Smallest 32-bit threshold t such that P(u < t) = p for u uniform on 2^32
/// words, rounded to nearest. p must lie in [0, 1].
constexpr std::uint64_t probability_threshold(double p) {
  return static_cast<std::uint64_t>(p * 0x1.0p32 + 0.5);
}

}  // namespace chemokin
