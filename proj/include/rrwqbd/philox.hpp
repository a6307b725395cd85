#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each call to
// next_block() encrypts the next counter value under the fixed key.

#include <array>
#include <cstdint>

namespace rrwqbd {

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr const char* kName = "philox4x32-10";

    static Block encrypt(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    Block next_block() {
        const Block ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        ++counter_;
        return encrypt(ctr, key_);
    }

    /// Uniform in [0,1) with 53 random bits; two uniforms per block.
    double uniform() {
        if (cached_) {
            cached_ = false;
            return to_double(block_[2], block_[3]);
        }
        block_ = next_block();
        cached_ = true;
        return to_double(block_[0], block_[1]);
    }

private:
    static double to_double(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Block block_{};
    bool cached_ = false;
};

}  // namespace rrwqbd
