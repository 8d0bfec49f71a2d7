#ifndef GOSSICRYPT_PROTOCOL_HPP
#define GOSSICRYPT_PROTOCOL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "gossicrypt/bytes.hpp"
#include "gossicrypt/crypto.hpp"
#include "gossicrypt/rng.hpp"

namespace gossicrypt::protocol {

using NodeId = std::uint16_t;

// Payload discriminator, carried as the first plaintext octet inside the
// innermost encryption layer. Refresh messages are distinguishable only
// after decryption; on the wire they look like data reports.
constexpr std::uint8_t kFlagData = 0x00;
constexpr std::uint8_t kFlagRefreshRaw = 0x01;     // key material is the new key itself
constexpr std::uint8_t kFlagRefreshSealed = 0x02;  // key material is sealed to the sink

struct DataPayload {
    Bytes m;
    crypto::Nonce n;
    crypto::MacTag h;
    NodeId origin = 0;
};

struct RefreshPayload {
    std::uint8_t flag = kFlagRefreshRaw;
    Bytes key_material;
    crypto::Nonce n;
    crypto::MacTag h;
    NodeId origin = 0;
};

using Payload = std::variant<DataPayload, RefreshPayload>;

// One encryption layer. Layers are kept innermost-first. Only the outermost
// layer carries ciphertext on the wire: a re-encrypting relay wraps the whole
// serialized packet, so inner ciphertexts travel inside the outer one and the
// inner records keep just the encryptor identity in cleartext.
struct Layer {
    NodeId encryptor = 0;
    Bytes ciphertext;
};

struct Packet {
    std::vector<Layer> layers;  // innermost first, never empty

    NodeId outer_id() const { return layers.back().encryptor; }
    std::size_t layer_count() const { return layers.size(); }
};

// Wire framing:
//   [outer_id:2][layer_count:1][per layer, outermost first:
//       encryptor_id:2, ciphertext_len:2, ciphertext]
// Inner layers serialize with ciphertext_len = 0.
Bytes serialize(const Packet& p);
std::optional<Packet> parse_packet(ConstSpan wire);

struct NodeProtocolState {
    NodeId id = 0;
    crypto::SymmetricKey key;
    double q = 0.5;  // re-encryption probability, in (0,1)
    std::optional<crypto::SymmetricKey> pending_refresh;
};

struct SinkState {
    std::unordered_map<NodeId, crypto::SymmetricKey> key_table;
    std::set<std::pair<NodeId, std::uint64_t>> seen_nonces;
    crypto::SinkKeyPair keypair;

    bool nonce_seen(NodeId origin, const crypto::Nonce& n) const {
        return seen_nonces.count({origin, n.as_u64()}) != 0;
    }
};

enum class UnwrapErrorKind { UnknownNode, DecryptFailed, Malformed };

struct UnwrapError {
    UnwrapErrorKind kind = UnwrapErrorKind::Malformed;
    NodeId node = 0;  // offending layer's encryptor (UnknownNode / DecryptFailed)
};

using UnwrapResult = std::variant<DataPayload, RefreshPayload, UnwrapError>;

enum class Verdict { Accepted, Replay, BadMac, IdMismatch };

struct VerifyOutcome {
    Verdict verdict = Verdict::Accepted;
    Bytes delivered;  // the measurement, when accepted
};

// Source step: one fresh layer under the node's current key carrying
// {m, n, H}. The measurement must fit `payload_budget`; data and refresh
// plaintexts are padded to that budget so both packet kinds have equal
// on-wire length.
Packet source_encrypt(const crypto::CipherSuite& suite, std::size_t payload_budget,
                      const NodeProtocolState& node, ConstSpan m, Rng& rng);

// Relay step: with probability node.q wraps the packet in one more layer,
// otherwise forwards it unchanged.
Packet relay_process(const crypto::CipherSuite& suite, const NodeProtocolState& node,
                     const Packet& p, Rng& rng);

// The re-encryption branch of the relay step (the coin forced to heads).
Packet relay_wrap(const crypto::CipherSuite& suite, const NodeProtocolState& node,
                  const Packet& p, Rng& rng);

// Peels layers outermost-in with the sink's key table. Pure with respect to
// the sink state; replay/integrity verification is separate.
UnwrapResult sink_unwrap(const crypto::CipherSuite& suite, const SinkState& sink,
                         const Packet& p);

// Same peel loop with an arbitrary key source (the adversary supplies its
// stolen-key store). Returns nullptr from the lookup to signal a missing key.
using KeyLookupFn = std::function<const crypto::SymmetricKey*(NodeId)>;
UnwrapResult unwrap_with_keys(const crypto::CipherSuite& suite, const KeyLookupFn& lookup,
                              const Packet& p);

// Replay and MAC checks for a data payload; on acceptance records the nonce
// and releases the measurement.
VerifyOutcome sink_verify_data(const crypto::CipherSuite& suite, SinkState& sink,
                               const DataPayload& d);

// Installs node.pending_refresh as the next key version once the node's
// report slot comes up.
void schedule_refresh(const crypto::CipherSuite& suite, NodeProtocolState& node, Rng& rng);

struct RefreshBuildResult {
    Packet packet;
    crypto::SymmetricKey new_key;
};

// Emits the refresh message under the outgoing key and switches the node to
// the new key. With `sink_pub` present the key material is sealed to the sink
// (variant 2), otherwise it is carried raw (variant 1).
RefreshBuildResult refresh_build(const crypto::CipherSuite& suite, std::size_t payload_budget,
                                 NodeProtocolState& node,
                                 const std::optional<crypto::PublicKey>& sink_pub, Rng& rng);

// Replay check, MAC check under the node's old key and, for sealed refreshes,
// decryption of the key material and origin cross-check. On acceptance the
// key table entry advances one version.
Verdict sink_process_refresh(const crypto::CipherSuite& suite, SinkState& sink,
                             const RefreshPayload& r);

// Poisson point process sample on [0, horizon); empty for lambda_r <= 0.
std::vector<double> rgen_schedule(double lambda_r, double horizon, Rng& rng);

// MAC input serializations (length-prefixed field concatenation).
Bytes mac_message_data(ConstSpan m, const crypto::Nonce& n, NodeId origin);
Bytes mac_message_refresh(std::uint8_t flag, ConstSpan key_material, const crypto::Nonce& n,
                          NodeId origin);

// Inner plaintext codec, exposed for tests.
Bytes encode_payload(std::uint8_t flag, ConstSpan field, const crypto::Nonce& n,
                     const crypto::MacTag& h, std::size_t payload_budget);
std::optional<Payload> parse_payload(const crypto::CipherSuite& suite, ConstSpan plaintext,
                                     NodeId origin);

}  // namespace gossicrypt::protocol

#endif
