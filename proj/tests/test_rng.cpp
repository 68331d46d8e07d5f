#include "btud/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace btud;

namespace {
using C = Philox4x32::Counter;
using K = Philox4x32::Key;
}  // namespace

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswers) {
    EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, DeterministicAndStreamSeparated) {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        EXPECT_EQ(va, b.next_u64());
        EXPECT_NE(va, c.next_u64());
        EXPECT_NE(va, d.next_u64());
    }
}

TEST(RngStream, UniformLayoutFollowsBlocks) {
    RngStream s(9, 3);
    const auto blk = Philox4x32::block(C{0, 0, 3, 0}, K{9, 0});
    const std::uint64_t first = (std::uint64_t{blk[1]} << 32) | blk[0];
    EXPECT_EQ(s.uniform(), static_cast<double>(first >> 11) * 0x1.0p-53);
}

TEST(RngStream, UniformAndNormalMoments) {
    RngStream s(1, stream_id(StreamKind::row_values, 5));
    const int n = 200000;
    double su = 0.0, sz = 0.0, sz2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
    }
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sz += z;
        sz2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sz / n, 0.0, 4.0 / std::sqrt(double(n)));
    EXPECT_NEAR(sz2 / n, 1.0, 0.02);
}

TEST(Uniform24, RandomAccessMatchesBlocks) {
    const std::uint64_t stream = stream_id(StreamKind::gcm_coupling, 12);
    for (std::uint64_t b = 0; b < 10; ++b) {
        const auto blk = uniform24_block(5, stream, b);
        for (std::uint64_t lane = 0; lane < 4; ++lane) {
            EXPECT_EQ(uniform24_at(5, stream, 4 * b + lane), blk[lane]);
            EXPECT_GE(blk[lane], 0.0f);
            EXPECT_LT(blk[lane], 1.0f);
        }
    }
}

TEST(StreamId, KindInTopByte) {
    EXPECT_EQ(stream_id(StreamKind::row_values, 17), 17u);
    EXPECT_EQ(stream_id(StreamKind::gcm_coupling, 1), (std::uint64_t{3} << 56) | 1u);
}
