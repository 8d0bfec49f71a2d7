#include "gossicrypt/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace gossicrypt::crypto {

namespace {

inline std::uint64_t rotl64(std::uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

inline std::uint64_t load_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline void store_le64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        p[i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
}

inline void sipround(std::uint64_t& v0, std::uint64_t& v1, std::uint64_t& v2, std::uint64_t& v3) {
    v0 += v1;
    v1 = rotl64(v1, 13);
    v1 ^= v0;
    v0 = rotl64(v0, 32);
    v2 += v3;
    v3 = rotl64(v3, 16);
    v3 ^= v2;
    v0 += v3;
    v3 = rotl64(v3, 21);
    v3 ^= v0;
    v2 += v1;
    v1 = rotl64(v1, 17);
    v1 ^= v2;
    v2 = rotl64(v2, 32);
}

}  // namespace

std::uint64_t siphash24(ConstSpan key16, ConstSpan data) {
    if (key16.size() != 16) throw std::invalid_argument("siphash24: key must be 16 bytes");
    const std::uint64_t k0 = load_le64(key16.data());
    const std::uint64_t k1 = load_le64(key16.data() + 8);

    std::uint64_t v0 = 0x736f6d6570736575ULL ^ k0;
    std::uint64_t v1 = 0x646f72616e646f6dULL ^ k1;
    std::uint64_t v2 = 0x6c7967656e657261ULL ^ k0;
    std::uint64_t v3 = 0x7465646279746573ULL ^ k1;

    const std::size_t n = data.size();
    const std::size_t full = n - n % 8;
    for (std::size_t i = 0; i < full; i += 8) {
        const std::uint64_t m = load_le64(data.data() + i);
        v3 ^= m;
        sipround(v0, v1, v2, v3);
        sipround(v0, v1, v2, v3);
        v0 ^= m;
    }

    std::uint64_t last = static_cast<std::uint64_t>(n & 0xff) << 56;
    for (std::size_t i = 0; i < n % 8; ++i)
        last |= static_cast<std::uint64_t>(data[full + i]) << (8 * i);
    v3 ^= last;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    v0 ^= last;

    v2 ^= 0xff;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    return v0 ^ v1 ^ v2 ^ v3;
}

bool ct_equal(ConstSpan a, ConstSpan b) {
    if (a.size() != b.size()) return false;
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc |= a[i] ^ b[i];
    return acc == 0;
}

bool CipherSuite::mac_verify(const SymmetricKey& key, ConstSpan message, const MacTag& tag) const {
    const MacTag expect = mac(key, message);
    return ct_equal(expect.bytes, tag.bytes);
}

SymmetricKey CipherSuite::make_key(Rng& rng, std::uint32_t version) const {
    return SymmetricKey{rng.bytes(key_size()), version};
}

void CipherSuite::check_key(const SymmetricKey& key) const {
    if (key.bytes.size() != key_size())
        throw std::invalid_argument("key size does not match cipher suite");
}

// ---------------------------------------------------------------------------
// Toy suite

namespace {

// Domain-separation prefixes for the SipHash invocations.
constexpr std::uint8_t kDomKeystream = 0x4b;
constexpr std::uint8_t kDomSkeTag = 0x54;
constexpr std::uint8_t kDomMac = 0x4d;
constexpr std::uint8_t kDomPkeStream = 0x45;
constexpr std::uint8_t kDomPkeTag = 0x41;
constexpr std::uint8_t kDomPubDerive = 0x50;

Bytes sip_prf(ConstSpan key16, std::uint8_t domain, ConstSpan data) {
    Bytes input;
    input.reserve(1 + data.size());
    input.push_back(domain);
    append(input, data);
    Bytes out(8);
    store_le64(out.data(), siphash24(key16, input));
    return out;
}

void xor_keystream(ConstSpan key16, std::uint8_t domain, ConstSpan in, std::uint8_t* out) {
    std::uint8_t block[9];
    block[0] = domain;
    for (std::size_t i = 0; i < in.size(); i += 8) {
        store_le64(block + 1, i / 8);
        std::uint8_t ks[8];
        store_le64(ks, siphash24(key16, ConstSpan(block, 9)));
        const std::size_t chunk = std::min<std::size_t>(8, in.size() - i);
        for (std::size_t j = 0; j < chunk; ++j) out[i + j] = in[i + j] ^ ks[j];
    }
}

class ToySuite final : public CipherSuite {
   public:
    std::string_view name() const override { return "toy"; }
    std::size_t key_size() const override { return 16; }
    std::size_t mac_size() const override { return 8; }
    std::size_t ske_overhead() const override { return 8; }
    std::size_t pke_overhead() const override { return 8; }

    Bytes ske_encrypt(const SymmetricKey& key, ConstSpan pt, Rng&) const override {
        check_key(key);
        Bytes ct(pt.size() + 8);
        xor_keystream(key.bytes, kDomKeystream, pt, ct.data());
        Bytes tag = sip_prf(key.bytes, kDomSkeTag, ConstSpan(ct.data(), pt.size()));
        std::memcpy(ct.data() + pt.size(), tag.data(), 8);
        return ct;
    }

    std::optional<Bytes> ske_decrypt(const SymmetricKey& key, ConstSpan ct) const override {
        check_key(key);
        if (ct.size() < 8) return std::nullopt;
        const std::size_t body = ct.size() - 8;
        Bytes tag = sip_prf(key.bytes, kDomSkeTag, ct.subspan(0, body));
        if (!ct_equal(tag, ct.subspan(body))) return std::nullopt;
        Bytes pt(body);
        xor_keystream(key.bytes, kDomKeystream, ct.subspan(0, body), pt.data());
        return pt;
    }

    MacTag mac(const SymmetricKey& key, ConstSpan message) const override {
        check_key(key);
        return MacTag{sip_prf(key.bytes, kDomMac, message)};
    }

    SinkKeyPair pke_keygen(Rng& rng) const override {
        PrivateKey priv{rng.bytes(16)};
        return SinkKeyPair{derive_pub(priv), std::move(priv)};
    }

    Bytes pke_encrypt(const PublicKey& pub, ConstSpan pt, Rng&) const override {
        if (pub.bytes.size() != 16) throw std::invalid_argument("toy public key must be 16 bytes");
        Bytes ct(pt.size() + 8);
        xor_keystream(pub.bytes, kDomPkeStream, pt, ct.data());
        Bytes tag = sip_prf(pub.bytes, kDomPkeTag, ConstSpan(ct.data(), pt.size()));
        std::memcpy(ct.data() + pt.size(), tag.data(), 8);
        return ct;
    }

    std::optional<Bytes> pke_decrypt(const PrivateKey& priv, ConstSpan ct) const override {
        if (priv.bytes.size() != 16) throw std::invalid_argument("toy private key must be 16 bytes");
        if (ct.size() < 8) return std::nullopt;
        const PublicKey pub = derive_pub(priv);
        const std::size_t body = ct.size() - 8;
        Bytes tag = sip_prf(pub.bytes, kDomPkeTag, ct.subspan(0, body));
        if (!ct_equal(tag, ct.subspan(body))) return std::nullopt;
        Bytes pt(body);
        xor_keystream(pub.bytes, kDomPkeStream, ct.subspan(0, body), pt.data());
        return pt;
    }

   private:
    static PublicKey derive_pub(const PrivateKey& priv) {
        Bytes pub;
        pub.reserve(16);
        for (std::uint8_t lane : {std::uint8_t{0}, std::uint8_t{1}}) {
            std::uint8_t msg[2] = {kDomPubDerive, lane};
            std::uint8_t block[8];
            store_le64(block, siphash24(priv.bytes, ConstSpan(msg, 2)));
            pub.insert(pub.end(), block, block + 8);
        }
        return PublicKey{std::move(pub)};
    }
};

// ---------------------------------------------------------------------------
// libsodium suite

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

static_assert(crypto_secretbox_KEYBYTES == crypto_auth_KEYBYTES,
              "one node key serves both encryption and MAC");

class SodiumSuite final : public CipherSuite {
   public:
    SodiumSuite() { ensure_sodium(); }

    std::string_view name() const override { return "sodium"; }
    std::size_t key_size() const override { return crypto_secretbox_KEYBYTES; }
    std::size_t mac_size() const override { return crypto_auth_BYTES; }
    std::size_t ske_overhead() const override {
        return crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES;
    }
    std::size_t pke_overhead() const override { return crypto_box_SEALBYTES; }

    Bytes ske_encrypt(const SymmetricKey& key, ConstSpan pt, Rng& rng) const override {
        check_key(key);
        Bytes ct(crypto_secretbox_NONCEBYTES + pt.size() + crypto_secretbox_MACBYTES);
        rng.fill(ct.data(), crypto_secretbox_NONCEBYTES);
        crypto_secretbox_easy(ct.data() + crypto_secretbox_NONCEBYTES, pt.data(), pt.size(),
                              ct.data(), key.bytes.data());
        return ct;
    }

    std::optional<Bytes> ske_decrypt(const SymmetricKey& key, ConstSpan ct) const override {
        check_key(key);
        if (ct.size() < ske_overhead()) return std::nullopt;
        Bytes pt(ct.size() - ske_overhead());
        if (crypto_secretbox_open_easy(pt.data(), ct.data() + crypto_secretbox_NONCEBYTES,
                                       ct.size() - crypto_secretbox_NONCEBYTES, ct.data(),
                                       key.bytes.data()) != 0)
            return std::nullopt;
        return pt;
    }

    MacTag mac(const SymmetricKey& key, ConstSpan message) const override {
        check_key(key);
        Bytes tag(crypto_auth_BYTES);
        crypto_auth(tag.data(), message.data(), message.size(), key.bytes.data());
        return MacTag{std::move(tag)};
    }

    SinkKeyPair pke_keygen(Rng& rng) const override {
        Bytes seed = rng.bytes(crypto_box_SEEDBYTES);
        PublicKey pub{Bytes(crypto_box_PUBLICKEYBYTES)};
        PrivateKey priv{Bytes(crypto_box_SECRETKEYBYTES)};
        crypto_box_seed_keypair(pub.bytes.data(), priv.bytes.data(), seed.data());
        return SinkKeyPair{std::move(pub), std::move(priv)};
    }

    // Sealed boxes generate the ephemeral sender key internally, so the
    // ciphertext bytes are not reproducible from `rng`; round-trip behavior is.
    Bytes pke_encrypt(const PublicKey& pub, ConstSpan pt, Rng&) const override {
        if (pub.bytes.size() != crypto_box_PUBLICKEYBYTES)
            throw std::invalid_argument("bad sodium public key size");
        Bytes ct(pt.size() + crypto_box_SEALBYTES);
        crypto_box_seal(ct.data(), pt.data(), pt.size(), pub.bytes.data());
        return ct;
    }

    std::optional<Bytes> pke_decrypt(const PrivateKey& priv, ConstSpan ct) const override {
        if (priv.bytes.size() != crypto_box_SECRETKEYBYTES)
            throw std::invalid_argument("bad sodium private key size");
        if (ct.size() < crypto_box_SEALBYTES) return std::nullopt;
        Bytes pub(crypto_box_PUBLICKEYBYTES);
        crypto_scalarmult_base(pub.data(), priv.bytes.data());
        Bytes pt(ct.size() - crypto_box_SEALBYTES);
        if (crypto_box_seal_open(pt.data(), ct.data(), ct.size(), pub.data(),
                                 priv.bytes.data()) != 0)
            return std::nullopt;
        return pt;
    }
};

}  // namespace

const CipherSuite& toy_suite() {
    static const ToySuite suite;
    return suite;
}

const CipherSuite& sodium_suite() {
    static const SodiumSuite suite;
    return suite;
}

}  // namespace gossicrypt::crypto
