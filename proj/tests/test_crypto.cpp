#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gossicrypt/crypto.hpp"
#include "test_util.hpp"

using namespace gossicrypt;
using namespace gossicrypt::crypto;

namespace {

Bytes iota_bytes(std::size_t n) {
    Bytes b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(i);
    return b;
}

const CipherSuite& suite_by_index(int i) { return i == 0 ? toy_suite() : sodium_suite(); }

}  // namespace

TEST_CASE("siphash24 matches the reference vectors") {
    // Key 000102...0f, message = first n bytes of 00 01 02 ...; outputs from
    // the SipHash-2-4 reference vector table.
    const Bytes key = iota_bytes(16);
    const Bytes msg = iota_bytes(16);
    CHECK(siphash24(key, ConstSpan(msg.data(), 0)) == 0x726fdb47dd0e0e31ULL);
    CHECK(siphash24(key, ConstSpan(msg.data(), 1)) == 0x74f839c593dc67fdULL);
    CHECK(siphash24(key, ConstSpan(msg.data(), 8)) == 0x93f5f5799a932462ULL);
    CHECK(siphash24(key, ConstSpan(msg.data(), 15)) == 0xa129ca6149be45e5ULL);
}

TEST_CASE("ske round trip over random keys and plaintexts") {
    for (int si = 0; si < 2; ++si) {
        const CipherSuite& suite = suite_by_index(si);
        Rng rng(7 + si);
        for (int trial = 0; trial < 1000; ++trial) {
            const SymmetricKey key = suite.make_key(rng);
            const Bytes pt = rng.bytes(rng.below(65));
            const Bytes ct = suite.ske_encrypt(key, pt, rng);
            CHECK(ct.size() == pt.size() + suite.ske_overhead());
            const auto back = suite.ske_decrypt(key, ct);
            REQUIRE(back.has_value());
            CHECK(*back == pt);
        }
    }
}

TEST_CASE("ske empty plaintext round trips") {
    for (int si = 0; si < 2; ++si) {
        const CipherSuite& suite = suite_by_index(si);
        Rng rng(11);
        const SymmetricKey key = suite.make_key(rng);
        const auto back = suite.ske_decrypt(key, suite.ske_encrypt(key, {}, rng));
        REQUIRE(back.has_value());
        CHECK(back->empty());
    }
}

TEST_CASE("ske wrong key and truncation fail") {
    for (int si = 0; si < 2; ++si) {
        const CipherSuite& suite = suite_by_index(si);
        Rng rng(13 + si);
        for (int trial = 0; trial < 50; ++trial) {
            const SymmetricKey k1 = suite.make_key(rng);
            const SymmetricKey k2 = suite.make_key(rng);
            const Bytes pt = rng.bytes(20);
            const Bytes ct = suite.ske_encrypt(k1, pt, rng);
            CHECK(!suite.ske_decrypt(k2, ct).has_value());
            CHECK(!suite.ske_decrypt(k1, ConstSpan(ct.data(), ct.size() - 1)).has_value());
            CHECK(!suite.ske_decrypt(k1, ConstSpan(ct.data(), 3)).has_value());
        }
    }
}

TEST_CASE("mac is deterministic and separates messages and keys") {
    for (int si = 0; si < 2; ++si) {
        const CipherSuite& suite = suite_by_index(si);
        Rng rng(17 + si);
        const SymmetricKey key = suite.make_key(rng);
        const Bytes m = rng.bytes(20);
        CHECK(suite.mac(key, m) == suite.mac(key, m));

        for (int trial = 0; trial < 10000 / (si == 0 ? 1 : 10); ++trial) {
            Bytes m2 = rng.bytes(20);
            if (m2 == m) continue;
            CHECK(suite.mac(key, m) != suite.mac(key, m2));
        }
        for (int trial = 0; trial < 100; ++trial) {
            const SymmetricKey k2 = suite.make_key(rng);
            CHECK(suite.mac(key, m) != suite.mac(k2, m));
        }
    }
}

TEST_CASE("mac verification rejects every single-bit flip") {
    for (int si = 0; si < 2; ++si) {
        const CipherSuite& suite = suite_by_index(si);
        Rng rng(19);
        const SymmetricKey key = suite.make_key(rng);
        const Bytes m = iota_bytes(20);
        const MacTag tag = suite.mac(key, m);
        REQUIRE(suite.mac_verify(key, m, tag));

        for (std::size_t bit = 0; bit < m.size() * 8; ++bit) {
            Bytes flipped = m;
            flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            CHECK(!suite.mac_verify(key, flipped, tag));
        }
        for (std::size_t bit = 0; bit < tag.bytes.size() * 8; ++bit) {
            MacTag bad = tag;
            bad.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            CHECK(!suite.mac_verify(key, m, bad));
        }
    }
}

TEST_CASE("pke round trip, key separation, and expansion") {
    for (int si = 0; si < 2; ++si) {
        const CipherSuite& suite = suite_by_index(si);
        Rng rng(23 + si);
        for (int trial = 0; trial < (si == 0 ? 1000 : 200); ++trial) {
            const SinkKeyPair kp = suite.pke_keygen(rng);
            const Bytes pt = rng.bytes(2 + suite.key_size());  // node id plus one key
            const Bytes ct = suite.pke_encrypt(kp.pub, pt, rng);
            CHECK(ct.size() >= pt.size());
            CHECK(ct.size() == pt.size() + suite.pke_overhead());
            const auto back = suite.pke_decrypt(kp.priv, ct);
            REQUIRE(back.has_value());
            CHECK(*back == pt);

            const SinkKeyPair other = suite.pke_keygen(rng);
            CHECK(!suite.pke_decrypt(other.priv, ct).has_value());
        }
    }
}

TEST_CASE("toy suite is deterministic per (key, plaintext)") {
    const CipherSuite& suite = toy_suite();
    Rng rng(29);
    const SymmetricKey key = suite.make_key(rng);
    const Bytes pt = rng.bytes(33);
    Rng r1(1), r2(2);
    CHECK(suite.ske_encrypt(key, pt, r1) == suite.ske_encrypt(key, pt, r2));

    const SinkKeyPair kp = suite.pke_keygen(rng);
    Rng r3(3), r4(4);
    CHECK(suite.pke_encrypt(kp.pub, pt, r3) == suite.pke_encrypt(kp.pub, pt, r4));
}

TEST_CASE("toy suite golden vectors") {
    // key_hex pt_hex ct_hex ("-" for empty)
    for (const auto& rec : testutil::load_fixture("toy_ske.txt")) {
        REQUIRE(rec.size() == 3);
        const SymmetricKey key{rec[0], 0};
        Rng rng(0);
        CHECK(toy_suite().ske_encrypt(key, rec[1], rng) == rec[2]);
        const auto back = toy_suite().ske_decrypt(key, rec[2]);
        REQUIRE(back.has_value());
        CHECK(*back == rec[1]);
    }
    // key_hex msg_hex tag_hex
    for (const auto& rec : testutil::load_fixture("toy_mac.txt")) {
        REQUIRE(rec.size() == 3);
        const SymmetricKey key{rec[0], 0};
        CHECK(toy_suite().mac(key, rec[1]).bytes == rec[2]);
    }
}

TEST_CASE("invalid key size is a configuration error") {
    for (int si = 0; si < 2; ++si) {
        const CipherSuite& suite = suite_by_index(si);
        Rng rng(31);
        const SymmetricKey bad{Bytes(suite.key_size() + 1, 0xaa), 0};
        CHECK_THROWS_AS((void)suite.ske_encrypt(bad, Bytes{0x01}, rng), std::invalid_argument);
        CHECK_THROWS_AS((void)suite.mac(bad, Bytes{0x01}), std::invalid_argument);
    }
}
