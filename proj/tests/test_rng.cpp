#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "cjack/rng.hpp"

using namespace cjack;

TEST_CASE("philox4x64-10 known answers") {
    // reference vectors (Random123 convention; cross-checked against the
    // numpy Philox implementation)
    auto out = Philox4x64::block({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x16554d9eca36314cull);
    CHECK(out[1] == 0xdb20fe9d672d0fdcull);
    CHECK(out[2] == 0xd7e772cee186176bull);
    CHECK(out[3] == 0x7e68b68aec7ba23bull);

    out = Philox4x64::block({1, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x02f4ba6408e4d89bull);
    CHECK(out[1] == 0x3dd62b0b9ca8c5b2ull);
    CHECK(out[2] == 0x1c8667a55d902e79ull);
    CHECK(out[3] == 0x907d7a052fd5b4dcull);

    out = Philox4x64::block({2, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x809bf322883987c3ull);
    CHECK(out[1] == 0x471128b9e807f7ddull);
    CHECK(out[2] == 0xf250ba0dbec065b7ull);
    CHECK(out[3] == 0xfc6ed66767a457bcull);

    out = Philox4x64::block({1, 0, 0, 0}, {0xdeadbeefull, 0});
    CHECK(out[0] == 0xa4e930dc738acaf1ull);
    CHECK(out[1] == 0xb1c7ecc6484e9cf0ull);
    CHECK(out[2] == 0x6b88a411909298aaull);
    CHECK(out[3] == 0x66f3c896201f7262ull);
}

TEST_CASE("streams are deterministic and distinct") {
    RngStream a(7, 3, 11, 0);
    RngStream b(7, 3, 11, 0);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    std::set<uint64_t> firsts;
    for (uint64_t rep = 0; rep < 8; ++rep)
        for (uint64_t stream = 0; stream < 8; ++stream) {
            RngStream s(7, 3, rep, stream);
            firsts.insert(s.next_u64());
        }
    CHECK(firsts.size() == 64);  // no collisions across addresses
}

TEST_CASE("uniforms live in (0,1] and normals have sane moments") {
    RngStream s(123, 0, 0, 0);
    double mean = 0.0, var = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_uniform();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        if (i >= n) break;
    }
    RngStream z(123, 0, 0, 1);
    for (int i = 0; i < n; ++i) {
        const double v = z.next_normal();
        mean += v;
        var += v * v;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}
