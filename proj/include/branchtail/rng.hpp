#pragma once

#include <cstdint>

namespace branchtail {

// Counter-based stream generator (Philox-style 4x32, 10 rounds).
//
// A stream is keyed by (seed, stream_id) where stream_id is the global
// replication index. The 128-bit counter space is partitioned so that
// distinct streams can never overlap: two counter words hold the stream id,
// the other two count output blocks within the stream. Draw order inside a
// replication is therefore reproducible regardless of which worker thread
// runs it.
class RandomStream {
public:
    RandomStream() : RandomStream(0, 0) {}

    RandomStream(std::uint64_t seed, std::uint64_t stream_id) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = static_cast<std::uint32_t>(stream_id);
        ctr_[3] = static_cast<std::uint32_t>(stream_id >> 32);
        have_ = 0;
    }

    std::uint64_t next_u64() {
        if (have_ == 0) {
            block();
            have_ = 2;
        }
        --have_;
        return out_[1 - have_];
    }

    // Uniform draw on the open interval (0,1): safe as argument to log() and
    // to the Pareto inverse transform u^(-1/alpha).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // 64-bit multiply-shift; modulo bias is < 2^-64 * n, irrelevant here.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void block() {
        std::uint32_t x0 = ctr_[0], x1 = ctr_[1], x2 = ctr_[2], x3 = ctr_[3];
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, x0, hi0, lo0);
            mulhilo(0xCD9E8D57u, x2, hi1, lo1);
            std::uint32_t y0 = hi1 ^ x1 ^ k0;
            std::uint32_t y1 = lo1;
            std::uint32_t y2 = hi0 ^ x3 ^ k1;
            std::uint32_t y3 = lo0;
            x0 = y0;
            x1 = y1;
            x2 = y2;
            x3 = y3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_[0] = (static_cast<std::uint64_t>(x1) << 32) | x0;
        out_[1] = (static_cast<std::uint64_t>(x3) << 32) | x2;
        // 64-bit block counter in words 0..1; words 2..3 stay pinned to the
        // stream id.
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::uint32_t key_[2];
    std::uint32_t ctr_[4];
    std::uint64_t out_[2];
    int have_;
};

} // namespace branchtail
