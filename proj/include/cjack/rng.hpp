#pragma once

// Counter-based random numbers: Philox4x64-10 (Salmon et al., Random123
// semantics).  A stream is addressed by (seed, grid, rep, stream); draws are
// reproducible and independent of thread count or evaluation order.

#include <array>
#include <cmath>
#include <cstdint>

namespace cjack {

struct Philox4x64 {
    static constexpr uint64_t M0 = 0xD2E7470EE14C6C93ull;
    static constexpr uint64_t M1 = 0xCA5A826395121157ull;
    static constexpr uint64_t W0 = 0x9E3779B97F4A7C15ull;
    static constexpr uint64_t W1 = 0xBB67AE8584CAA73Bull;

    static void mulhilo(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
        const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<uint64_t>(p >> 64);
        lo = static_cast<uint64_t>(p);
    }

    static std::array<uint64_t, 4> block(std::array<uint64_t, 4> c, std::array<uint64_t, 2> k) {
        for (int round = 0; round < 10; ++round) {
            uint64_t hi0, lo0, hi1, lo1;
            mulhilo(M0, c[0], hi0, lo0);
            mulhilo(M1, c[2], hi1, lo1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }
};

// One addressable stream of uniforms/normals.  The 256-bit counter is laid
// out as (rep, stream, block, 0) and the key as (seed, grid), so any two
// distinct addresses never share a counter/key pair.
class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t grid, uint64_t rep, uint64_t stream)
        : key_{seed, grid}, base_{rep, stream, 0, 0} {}

    uint64_t next_u64() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    // uniform on (0, 1]
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    }

    // standard normal via Box-Muller
    double next_normal() {
        if (have_normal_) {
            have_normal_ = false;
            return cached_normal_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_normal_ = r * std::sin(a);
        have_normal_ = true;
        return r * std::cos(a);
    }

  private:
    void refill() {
        std::array<uint64_t, 4> ctr = base_;
        ctr[2] = block_;
        buf_ = Philox4x64::block(ctr, key_);
        ++block_;
        pos_ = 0;
    }

    std::array<uint64_t, 2> key_;
    std::array<uint64_t, 4> base_;
    std::array<uint64_t, 4> buf_{};
    uint64_t block_ = 0;
    int pos_ = 4;
    bool have_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace cjack
