#ifndef GOSSICRYPT_CRYPTO_HPP
#define GOSSICRYPT_CRYPTO_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "gossicrypt/bytes.hpp"
#include "gossicrypt/rng.hpp"

namespace gossicrypt::crypto {

// Sensor-sink shared key. `version` is the key-refresh generation counter;
// it increases by one per accepted refresh and never decreases.
struct SymmetricKey {
    Bytes bytes;
    std::uint32_t version = 0;

    bool operator==(const SymmetricKey&) const = default;
};

// Per-message nonce used for replay detection at the sink (64-bit).
struct Nonce {
    std::array<std::uint8_t, 8> bytes{};

    static Nonce random(Rng& rng) {
        Nonce n;
        rng.fill(n.bytes.data(), n.bytes.size());
        return n;
    }
    std::uint64_t as_u64() const {
        std::uint64_t v = 0;
        for (auto b : bytes) v = (v << 8) | b;
        return v;
    }
    bool operator==(const Nonce&) const = default;
};

struct MacTag {
    Bytes bytes;
    bool operator==(const MacTag&) const = default;
};

struct PublicKey {
    Bytes bytes;
    bool operator==(const PublicKey&) const = default;
};

struct PrivateKey {
    Bytes bytes;
};

struct SinkKeyPair {
    PublicKey pub;
    PrivateKey priv;
};

// Pluggable primitives: one authenticated symmetric cipher, one MAC and one
// encrypt-to-recipient asymmetric primitive, all sized by the suite so the
// protocol layer stays cipher-agnostic.
//
// Two bundled implementations:
//  - toy_suite(): deterministic keystream/tag construction built on
//    SipHash-2-4. Ciphertexts are pure functions of (key, plaintext), which
//    makes golden byte-level fixtures reproducible. Not secure; test use only.
//  - sodium_suite(): libsodium secretbox / auth / sealed boxes.
//
// All operations are pure functions of their arguments (encryption draws any
// randomness it needs from the caller's Rng), so a suite instance may be
// shared freely across threads.
class CipherSuite {
   public:
    virtual ~CipherSuite() = default;

    virtual std::string_view name() const = 0;
    virtual std::size_t key_size() const = 0;
    virtual std::size_t mac_size() const = 0;
    // ciphertext length = plaintext length + ske_overhead(), independent of content
    virtual std::size_t ske_overhead() const = 0;
    virtual std::size_t pke_overhead() const = 0;

    virtual Bytes ske_encrypt(const SymmetricKey& key, ConstSpan plaintext, Rng& rng) const = 0;
    virtual std::optional<Bytes> ske_decrypt(const SymmetricKey& key, ConstSpan ciphertext) const = 0;

    virtual MacTag mac(const SymmetricKey& key, ConstSpan message) const = 0;
    bool mac_verify(const SymmetricKey& key, ConstSpan message, const MacTag& tag) const;

    virtual SinkKeyPair pke_keygen(Rng& rng) const = 0;
    virtual Bytes pke_encrypt(const PublicKey& pub, ConstSpan plaintext, Rng& rng) const = 0;
    virtual std::optional<Bytes> pke_decrypt(const PrivateKey& priv, ConstSpan ciphertext) const = 0;

    SymmetricKey make_key(Rng& rng, std::uint32_t version = 0) const;
    void check_key(const SymmetricKey& key) const;
};

const CipherSuite& toy_suite();
const CipherSuite& sodium_suite();

// SipHash-2-4 with 128-bit key and 64-bit output.
std::uint64_t siphash24(ConstSpan key16, ConstSpan data);

bool ct_equal(ConstSpan a, ConstSpan b);

}  // namespace gossicrypt::crypto

#endif
