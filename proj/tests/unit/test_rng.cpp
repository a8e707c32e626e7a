#include <gtest/gtest.h>

#include <cmath>

#include "chemokin/rng.hpp"

using chemokin::Philox4x32;

// Known-answer vectors of the reference philox4x32-10 implementation.
TEST(Philox, KnownAnswers) {
  using B = Philox4x32::Block;
  EXPECT_EQ(Philox4x32(0)(B{0, 0, 0, 0}), (B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32(0xffffffffffffffffull)(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}),
            (B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32(0x299f31d0a4093822ull)(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}),
            (B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, LanesMatchSingleDraws) {
  const Philox4x32 rng(12345);
  std::uint32_t out[4][32];
  for (std::uint64_t step : {0ull, 7ull, 1ull << 40}) {
    const std::uint64_t first = (1ull << 63) | 1000;
    rng.draw_lanes<32>(first, step, out);
    for (int j = 0; j < 32; ++j) {
      const auto b = rng.draw(first + j, step);
      for (int w = 0; w < 4; ++w) EXPECT_EQ(out[w][j], b[w]);
    }
  }
}

TEST(Philox, UniformMoments) {
  const Philox4x32 rng(7);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = chemokin::to_unit(rng.draw(i, 3)[i & 3]);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sq / n - mean * mean, 1.0 / 12, 2e-3);
}

TEST(Philox, UnitConversionsStayInHalfOpenInterval) {
  EXPECT_EQ(chemokin::to_unit(0), 0.0);
  EXPECT_LT(chemokin::to_unit(0xffffffffu), 1.0);
  EXPECT_EQ(chemokin::to_unit53(0, 0), 0.0);
  EXPECT_LT(chemokin::to_unit53(0xffffffffu, 0xffffffffu), 1.0);
}
