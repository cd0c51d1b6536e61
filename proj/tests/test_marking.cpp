#include <gtest/gtest.h>

#include <random>

#include "procforge/marking.hpp"

using procforge::Marking;

TEST(Marking, EmptyRendersAsZero) {
  Marking m;
  EXPECT_TRUE(m.none());
  EXPECT_EQ(m.to_hex(), "0x0");
  EXPECT_EQ(Marking::from_hex("0x0"), m);
}

TEST(Marking, ListingShapedUpdate) {
  // consume two bits, produce one
  Marking pre = Marking::from_hex("0x44");
  Marking post = Marking::from_hex("0x10");
  Marking m = Marking::from_hex("0x45");
  ASSERT_TRUE(m.contains(pre));
  Marking next = (m & ~pre) | post;
  EXPECT_EQ(next.to_hex(), "0x11");
  EXPECT_EQ(pre.popcount(), 2);
  EXPECT_EQ(post.popcount(), 1);
}

TEST(Marking, HighBitsSurviveHexRoundTrip) {
  Marking m;
  m.set(0);
  m.set(63);
  m.set(64);
  m.set(200);
  m.set(255);
  EXPECT_EQ(Marking::from_hex(m.to_hex()), m);
  EXPECT_EQ(m.popcount(), 5);
  EXPECT_TRUE(m.test(255));
  m.reset(255);
  EXPECT_FALSE(m.test(255));
}

TEST(Marking, RejectsMalformedHex) {
  EXPECT_THROW(Marking::from_hex("44"), std::invalid_argument);
  EXPECT_THROW(Marking::from_hex("0xg1"), std::invalid_argument);
  EXPECT_THROW(Marking::from_hex("0x" + std::string(65, '1')), std::invalid_argument);
}

TEST(Marking, SubsetMatchesBitwiseDefinition) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    Marking a, b;
    for (int k = 0; k < 256; ++k) {
      if (rng() % 5 == 0) a.set(k);
      if (rng() % 9 == 0) b.set(k);
    }
    bool subset = true;
    bool overlap = false;
    for (int k = 0; k < 256; ++k) {
      if (b.test(k) && !a.test(k)) subset = false;
      if (b.test(k) && a.test(k)) overlap = true;
    }
    EXPECT_EQ(a.contains(b), subset);
    EXPECT_EQ(a.intersects(b), overlap);
    EXPECT_EQ((a & b).popcount() + (a & ~b).popcount(), a.popcount());
  }
}
