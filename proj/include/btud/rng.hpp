#pragma once

#include <array>
#include <cstdint>

namespace btud {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A block of four 32-bit outputs is a pure function of a 128-bit counter
/// and a 64-bit key, so any element of any stream can be regenerated
/// without replaying the stream.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

/// Stream layout shared by all generators.
///
/// key     = seed (low word, high word)
/// counter = (block index low, block index high, stream id low, stream id high)
///
/// The top byte of a stream id names the purpose, the rest is a row index.
enum class StreamKind : std::uint64_t {
    row_values = 0,
    gcm_nonlinearity = 1,
    gcm_initial = 2,
    gcm_coupling = 3,
};

constexpr std::uint64_t stream_id(StreamKind kind, std::uint64_t row) {
    return (static_cast<std::uint64_t>(kind) << 56) | (row & ((std::uint64_t{1} << 56) - 1));
}

/// Sequential reader over one Philox stream.
///
/// uniform() consumes 64 bits and returns (bits >> 11) * 2^-53 in [0, 1).
/// normal() uses the Box-Muller transform on two uniforms,
/// r = sqrt(-2 ln(1 - u1)), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2),
/// returning z0 then z1.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();
    double normal();

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Random-access single-precision uniform for element `index` of `stream`:
/// one 32-bit lane of block index/4, keeping the top 24 bits, so the value
/// is exactly representable as a float in [0, 1).
float uniform24_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Four consecutive uniform24_at values starting at a multiple of four.
std::array<float, 4> uniform24_block(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t block_index);

}  // namespace btud
