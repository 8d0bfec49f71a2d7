#include "gossicrypt/adversary.hpp"

namespace gossicrypt::adversary {

void compromise(AdversaryState& adv, const protocol::NodeProtocolState& node, double t,
                std::span<const Bytes> recent_measurements) {
    if (!(t > adv.last_compromise_time) ||
        t - adv.last_compromise_time < adv.min_compromise_gap)
        throw TooSoonError("compromise scheduled before the rate bound allows");
    adv.stolen[node.id] = node.key;
    auto& history = adv.measurement_history[node.id];
    history.assign(recent_measurements.begin(), recent_measurements.end());
    adv.last_compromise_time = t;
}

AttemptResult attempt_decrypt(const crypto::CipherSuite& suite, const AdversaryState& adv,
                              const protocol::Packet& p) {
    auto lookup = [&adv](NodeId id) -> const crypto::SymmetricKey* {
        auto it = adv.stolen.find(id);
        return it == adv.stolen.end() ? nullptr : &it->second;
    };
    auto result = protocol::unwrap_with_keys(suite, lookup, p);
    if (auto* err = std::get_if<protocol::UnwrapError>(&result)) {
        switch (err->kind) {
            case protocol::UnwrapErrorKind::UnknownNode:
                return DecryptFailure{FailKind::MissingKey, err->node};
            case protocol::UnwrapErrorKind::DecryptFailed:
                // Key present but wrong: the snapshot predates a refresh.
                return DecryptFailure{FailKind::StaleKey, err->node};
            case protocol::UnwrapErrorKind::Malformed:
                return DecryptFailure{FailKind::Malformed, err->node};
        }
    }
    if (auto* d = std::get_if<protocol::DataPayload>(&result)) return std::move(*d);
    return std::get<protocol::RefreshPayload>(std::move(result));
}

NodeId step_walk(AdversaryState& adv, const sim::GridTopology& topo, Rng& rng) {
    adv.position = topo.neighbors(adv.position)[rng.below(4)];
    return adv.position;
}

}  // namespace gossicrypt::adversary
