#include "gossicrypt/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace gossicrypt::protocol {

namespace {

constexpr std::size_t kMaxLayers = 255;

void put_length_prefixed(Bytes& out, ConstSpan field) {
    if (field.size() > 0xffff) throw std::length_error("field too long for MAC input");
    put_u16(out, static_cast<std::uint16_t>(field.size()));
    append(out, field);
}

const crypto::SymmetricKey* lookup_sink(const SinkState& sink, NodeId id) {
    auto it = sink.key_table.find(id);
    return it == sink.key_table.end() ? nullptr : &it->second;
}

}  // namespace

Bytes serialize(const Packet& p) {
    if (p.layers.empty()) throw std::logic_error("cannot serialize empty packet");
    Bytes out;
    out.reserve(5 + p.layers.size() * 4 + p.layers.back().ciphertext.size());
    put_u16(out, p.outer_id());
    out.push_back(static_cast<std::uint8_t>(p.layers.size()));
    for (auto it = p.layers.rbegin(); it != p.layers.rend(); ++it) {
        put_u16(out, it->encryptor);
        if (it->ciphertext.size() > 0xffff) throw std::length_error("ciphertext too long");
        put_u16(out, static_cast<std::uint16_t>(it->ciphertext.size()));
        append(out, it->ciphertext);
    }
    return out;
}

std::optional<Packet> parse_packet(ConstSpan wire) {
    ByteReader r{wire};
    std::uint16_t outer_id;
    std::uint8_t count;
    if (!r.read_u16(outer_id) || !r.read_u8(count) || count == 0) return std::nullopt;

    std::vector<Layer> outermost_first(count);
    for (std::uint8_t i = 0; i < count; ++i) {
        std::uint16_t id, len;
        ConstSpan ct;
        if (!r.read_u16(id) || !r.read_u16(len) || !r.read_bytes(len, ct)) return std::nullopt;
        // Only the outermost layer carries bytes; inner ciphertexts ride
        // inside it.
        if ((i == 0) != (len > 0)) return std::nullopt;
        outermost_first[i] = Layer{id, Bytes(ct.begin(), ct.end())};
    }
    if (r.remaining() != 0) return std::nullopt;
    if (outermost_first.front().encryptor != outer_id) return std::nullopt;

    Packet p;
    p.layers.assign(std::make_move_iterator(outermost_first.rbegin()),
                    std::make_move_iterator(outermost_first.rend()));
    return p;
}

Bytes mac_message_data(ConstSpan m, const crypto::Nonce& n, NodeId origin) {
    Bytes msg;
    put_length_prefixed(msg, m);
    put_length_prefixed(msg, ConstSpan(n.bytes.data(), n.bytes.size()));
    Bytes id;
    put_u16(id, origin);
    put_length_prefixed(msg, id);
    return msg;
}

Bytes mac_message_refresh(std::uint8_t flag, ConstSpan key_material, const crypto::Nonce& n,
                          NodeId origin) {
    Bytes msg;
    put_length_prefixed(msg, ConstSpan(&flag, 1));
    put_length_prefixed(msg, key_material);
    put_length_prefixed(msg, ConstSpan(n.bytes.data(), n.bytes.size()));
    Bytes id;
    put_u16(id, origin);
    put_length_prefixed(msg, id);
    return msg;
}

Bytes encode_payload(std::uint8_t flag, ConstSpan field, const crypto::Nonce& n,
                     const crypto::MacTag& h, std::size_t payload_budget) {
    if (field.size() > payload_budget)
        throw std::invalid_argument("payload exceeds the configured budget");
    Bytes pt;
    pt.reserve(3 + payload_budget + n.bytes.size() + h.bytes.size());
    pt.push_back(flag);
    put_u16(pt, static_cast<std::uint16_t>(field.size()));
    append(pt, field);
    pt.resize(3 + payload_budget, 0);  // pad so data and refresh frames match in length
    append(pt, ConstSpan(n.bytes.data(), n.bytes.size()));
    append(pt, h.bytes);
    return pt;
}

std::optional<Payload> parse_payload(const crypto::CipherSuite& suite, ConstSpan plaintext,
                                     NodeId origin) {
    const std::size_t mac_size = suite.mac_size();
    const std::size_t fixed = 3 + crypto::Nonce{}.bytes.size() + mac_size;
    if (plaintext.size() < fixed) return std::nullopt;
    const std::size_t budget = plaintext.size() - fixed;

    ByteReader r{plaintext};
    std::uint8_t flag;
    std::uint16_t field_len;
    ConstSpan field, pad, nonce_bytes, tag;
    if (!r.read_u8(flag) || !r.read_u16(field_len)) return std::nullopt;
    if (field_len > budget) return std::nullopt;
    if (!r.read_bytes(field_len, field)) return std::nullopt;
    if (!r.read_bytes(budget - field_len, pad)) return std::nullopt;
    for (std::uint8_t b : pad)
        if (b != 0) return std::nullopt;
    if (!r.read_bytes(8, nonce_bytes) || !r.read_bytes(mac_size, tag)) return std::nullopt;

    crypto::Nonce n;
    std::copy(nonce_bytes.begin(), nonce_bytes.end(), n.bytes.begin());
    crypto::MacTag h{Bytes(tag.begin(), tag.end())};

    switch (flag) {
        case kFlagData:
            return Payload{DataPayload{Bytes(field.begin(), field.end()), n, std::move(h), origin}};
        case kFlagRefreshRaw:
        case kFlagRefreshSealed:
            return Payload{RefreshPayload{flag, Bytes(field.begin(), field.end()), n, std::move(h),
                                          origin}};
        default:
            return std::nullopt;
    }
}

Packet source_encrypt(const crypto::CipherSuite& suite, std::size_t payload_budget,
                      const NodeProtocolState& node, ConstSpan m, Rng& rng) {
    const crypto::Nonce n = crypto::Nonce::random(rng);
    const crypto::MacTag h = suite.mac(node.key, mac_message_data(m, n, node.id));
    const Bytes pt = encode_payload(kFlagData, m, n, h, payload_budget);
    Packet p;
    p.layers.push_back(Layer{node.id, suite.ske_encrypt(node.key, pt, rng)});
    return p;
}

Packet relay_wrap(const crypto::CipherSuite& suite, const NodeProtocolState& node,
                  const Packet& p, Rng& rng) {
    if (p.layers.size() >= kMaxLayers) throw std::length_error("layer count overflow");
    Bytes wire = serialize(p);
    Packet out;
    out.layers.reserve(p.layers.size() + 1);
    for (const Layer& l : p.layers) out.layers.push_back(Layer{l.encryptor, {}});
    out.layers.push_back(Layer{node.id, suite.ske_encrypt(node.key, wire, rng)});
    return out;
}

Packet relay_process(const crypto::CipherSuite& suite, const NodeProtocolState& node,
                     const Packet& p, Rng& rng) {
    if (rng.uniform01() > node.q) return p;  // relay as-is
    return relay_wrap(suite, node, p, rng);
}

namespace {

// Shared peel loop: the sink and the adversary differ only in where keys
// come from.
template <typename KeyLookup>
UnwrapResult unwrap_with(const crypto::CipherSuite& suite, KeyLookup&& lookup, const Packet& p) {
    Packet scratch;
    const Packet* cur = &p;
    while (true) {
        if (cur->layers.empty()) return UnwrapError{UnwrapErrorKind::Malformed, 0};
        const Layer& outer = cur->layers.back();
        if (outer.ciphertext.empty()) return UnwrapError{UnwrapErrorKind::Malformed, outer.encryptor};
        const crypto::SymmetricKey* key = lookup(outer.encryptor);
        if (key == nullptr) return UnwrapError{UnwrapErrorKind::UnknownNode, outer.encryptor};
        auto pt = suite.ske_decrypt(*key, outer.ciphertext);
        if (!pt) return UnwrapError{UnwrapErrorKind::DecryptFailed, outer.encryptor};

        if (cur->layers.size() == 1) {
            auto payload = parse_payload(suite, *pt, outer.encryptor);
            if (!payload) return UnwrapError{UnwrapErrorKind::Malformed, outer.encryptor};
            if (std::holds_alternative<DataPayload>(*payload))
                return std::get<DataPayload>(std::move(*payload));
            return std::get<RefreshPayload>(std::move(*payload));
        }

        auto inner = parse_packet(*pt);
        if (!inner) return UnwrapError{UnwrapErrorKind::Malformed, outer.encryptor};
        // The encrypted content must agree with the cleartext layer list.
        if (inner->layers.size() != cur->layers.size() - 1)
            return UnwrapError{UnwrapErrorKind::Malformed, outer.encryptor};
        for (std::size_t i = 0; i < inner->layers.size(); ++i)
            if (inner->layers[i].encryptor != cur->layers[i].encryptor)
                return UnwrapError{UnwrapErrorKind::Malformed, outer.encryptor};
        scratch = std::move(*inner);
        cur = &scratch;
    }
}

}  // namespace

UnwrapResult sink_unwrap(const crypto::CipherSuite& suite, const SinkState& sink,
                         const Packet& p) {
    return unwrap_with(suite, [&](NodeId id) { return lookup_sink(sink, id); }, p);
}

UnwrapResult unwrap_with_keys(const crypto::CipherSuite& suite, const KeyLookupFn& lookup,
                              const Packet& p) {
    return unwrap_with(suite, lookup, p);
}

VerifyOutcome sink_verify_data(const crypto::CipherSuite& suite, SinkState& sink,
                               const DataPayload& d) {
    if (sink.nonce_seen(d.origin, d.n)) return {Verdict::Replay, {}};
    const crypto::SymmetricKey& key = sink.key_table.at(d.origin);
    if (!suite.mac_verify(key, mac_message_data(d.m, d.n, d.origin), d.h))
        return {Verdict::BadMac, {}};
    sink.seen_nonces.insert({d.origin, d.n.as_u64()});
    return {Verdict::Accepted, d.m};
}

void schedule_refresh(const crypto::CipherSuite& suite, NodeProtocolState& node, Rng& rng) {
    node.pending_refresh = suite.make_key(rng, node.key.version + 1);
}

RefreshBuildResult refresh_build(const crypto::CipherSuite& suite, std::size_t payload_budget,
                                 NodeProtocolState& node,
                                 const std::optional<crypto::PublicKey>& sink_pub, Rng& rng) {
    if (!node.pending_refresh) throw std::logic_error("refresh_build: no pending key");
    crypto::SymmetricKey new_key = *node.pending_refresh;

    std::uint8_t flag = kFlagRefreshRaw;
    Bytes key_material = new_key.bytes;
    if (sink_pub) {
        flag = kFlagRefreshSealed;
        Bytes sealed_pt;
        put_u16(sealed_pt, node.id);
        append(sealed_pt, new_key.bytes);
        key_material = suite.pke_encrypt(*sink_pub, sealed_pt, rng);
    }

    const crypto::Nonce n = crypto::Nonce::random(rng);
    const crypto::MacTag h =
        suite.mac(node.key, mac_message_refresh(flag, key_material, n, node.id));
    const Bytes pt = encode_payload(flag, key_material, n, h, payload_budget);

    Packet p;
    p.layers.push_back(Layer{node.id, suite.ske_encrypt(node.key, pt, rng)});

    node.key = new_key;
    node.pending_refresh.reset();
    return {std::move(p), std::move(new_key)};
}

Verdict sink_process_refresh(const crypto::CipherSuite& suite, SinkState& sink,
                             const RefreshPayload& r) {
    if (sink.nonce_seen(r.origin, r.n)) return Verdict::Replay;
    const crypto::SymmetricKey& old_key = sink.key_table.at(r.origin);
    if (!suite.mac_verify(old_key, mac_message_refresh(r.flag, r.key_material, r.n, r.origin),
                          r.h))
        return Verdict::BadMac;

    Bytes new_key_bytes;
    if (r.flag == kFlagRefreshRaw) {
        if (r.key_material.size() != suite.key_size()) return Verdict::BadMac;
        new_key_bytes = r.key_material;
    } else {
        auto sealed_pt = suite.pke_decrypt(sink.keypair.priv, r.key_material);
        if (!sealed_pt || sealed_pt->size() != 2 + suite.key_size()) return Verdict::BadMac;
        ByteReader rd{*sealed_pt};
        std::uint16_t embedded_id = 0;
        rd.read_u16(embedded_id);
        if (embedded_id != r.origin) return Verdict::IdMismatch;
        new_key_bytes.assign(sealed_pt->begin() + 2, sealed_pt->end());
    }

    sink.seen_nonces.insert({r.origin, r.n.as_u64()});
    sink.key_table[r.origin] = crypto::SymmetricKey{std::move(new_key_bytes), old_key.version + 1};
    return Verdict::Accepted;
}

std::vector<double> rgen_schedule(double lambda_r, double horizon, Rng& rng) {
    std::vector<double> events;
    if (lambda_r <= 0.0) return events;
    double t = rng.exponential(lambda_r);
    while (t < horizon) {
        events.push_back(t);
        t += rng.exponential(lambda_r);
    }
    return events;
}

}  // namespace gossicrypt::protocol
