#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "gossicrypt/adversary.hpp"
#include "test_util.hpp"

using namespace gossicrypt;
using namespace gossicrypt::adversary;
using namespace gossicrypt::protocol;

namespace {

constexpr std::size_t kBudget = 96;

struct Net {
    const crypto::CipherSuite& suite = crypto::toy_suite();
    std::vector<NodeProtocolState> nodes;
    Rng rng{77};

    explicit Net(int n) {
        for (int v = 0; v < n; ++v)
            nodes.push_back({static_cast<NodeId>(v), suite.make_key(rng, 0), 0.5, std::nullopt});
    }

    Packet send(NodeId source, const Bytes& m, const std::vector<NodeId>& reencryptors) {
        Packet p = source_encrypt(suite, kBudget, nodes[source], m, rng);
        for (NodeId v : reencryptors) p = relay_wrap(suite, nodes[v], p, rng);
        return p;
    }
};

const Bytes kMsg{0x74, 0x3d, 0x32, 0x31};

}  // namespace

TEST_CASE("compromise then intercept recovers the plaintext") {
    Net net(4);
    AdversaryState adv;
    compromise(adv, net.nodes[2], 1.0);
    const Packet p = net.send(2, kMsg, {});
    auto res = attempt_decrypt(net.suite, adv, p);
    REQUIRE(std::holds_alternative<DataPayload>(res));
    CHECK(std::get<DataPayload>(res).m == kMsg);
}

TEST_CASE("a refresh defeats an earlier compromise; re-compromise restores it") {
    Net net(4);
    AdversaryState adv;
    compromise(adv, net.nodes[1], 1.0);

    schedule_refresh(net.suite, net.nodes[1], net.rng);
    (void)refresh_build(net.suite, kBudget, net.nodes[1], std::nullopt, net.rng);
    const Packet p = net.send(1, kMsg, {});
    auto res = attempt_decrypt(net.suite, adv, p);
    REQUIRE(std::holds_alternative<DecryptFailure>(res));
    CHECK(std::get<DecryptFailure>(res).kind == FailKind::StaleKey);
    CHECK(std::get<DecryptFailure>(res).node == 1);

    compromise(adv, net.nodes[1], 2.0);
    CHECK(std::holds_alternative<DataPayload>(attempt_decrypt(net.suite, adv, net.send(1, kMsg, {}))));
}

TEST_CASE("stolen snapshots never auto-update") {
    Net net(2);
    AdversaryState adv;
    compromise(adv, net.nodes[0], 1.0);
    const auto snapshot = adv.stolen.at(0);

    schedule_refresh(net.suite, net.nodes[0], net.rng);
    (void)refresh_build(net.suite, kBudget, net.nodes[0], std::nullopt, net.rng);
    CHECK(adv.stolen.at(0) == snapshot);
    CHECK(adv.stolen.at(0).version != net.nodes[0].key.version);
}

TEST_CASE("compromise rate guard") {
    Net net(3);
    AdversaryState adv;
    adv.min_compromise_gap = 1.5;
    compromise(adv, net.nodes[0], 10.0);
    CHECK_THROWS_AS(compromise(adv, net.nodes[1], 11.0), TooSoonError);
    CHECK_THROWS_AS(compromise(adv, net.nodes[1], 9.0), TooSoonError);
    CHECK_NOTHROW(compromise(adv, net.nodes[1], 11.5));

    AdversaryState poisson;  // default gap 0: only time monotonicity enforced
    compromise(poisson, net.nodes[0], 5.0);
    CHECK_THROWS_AS(compromise(poisson, net.nodes[1], 5.0), TooSoonError);
    CHECK_NOTHROW(compromise(poisson, net.nodes[1], 5.0 + 1e-9));
}

TEST_CASE("compromise captures the recent measurement window") {
    Net net(2);
    AdversaryState adv;
    const std::vector<Bytes> window{{0x01, 0x02}, {0x03}};
    compromise(adv, net.nodes[1], 1.0, window);
    CHECK(adv.measurement_history.at(1) == window);
}

TEST_CASE("decryption succeeds exactly when all layer keys are held") {
    Net net(5);
    // 3-layer packet: source 0, re-encrypted by 3 and 4.
    const Packet p = net.send(0, kMsg, {3, 4});
    const std::vector<NodeId> layer_set{0, 3, 4};

    // Brute force over all subsets of the three layer keys.
    for (unsigned mask = 0; mask < 8; ++mask) {
        AdversaryState adv;
        double t = 1.0;
        for (std::size_t i = 0; i < layer_set.size(); ++i)
            if (mask & (1u << i)) compromise(adv, net.nodes[layer_set[i]], t += 1.0);
        const bool expect = mask == 7;  // needs every layer key
        CHECK(decrypt_succeeds(net.suite, adv, p) == expect);
        if (!expect) {
            auto res = attempt_decrypt(net.suite, adv, p);
            const auto& fail = std::get<DecryptFailure>(res);
            CHECK(fail.kind == FailKind::MissingKey);
            // Peeling is outermost-in: the first unpeelable layer is reported.
            std::vector<NodeId> outermost_in{4, 3, 0};
            for (NodeId v : outermost_in) {
                if (!(mask & (1u << (v == 0 ? 0 : v == 3 ? 1 : 2)))) {
                    CHECK(fail.node == v);
                    break;
                }
            }
        }
    }
}

TEST_CASE("decryption predicate holds over random layer sets and stolen sets") {
    Net net(8);
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        const NodeId source = static_cast<NodeId>(rng.below(8));
        std::vector<NodeId> reenc;
        for (int v = 0; v < 8; ++v)
            if (v != source && rng.bernoulli(0.4)) reenc.push_back(static_cast<NodeId>(v));
        const Packet p = net.send(source, kMsg, reenc);

        AdversaryState adv;
        double t = 0.0;
        for (int v = 0; v < 8; ++v)
            if (rng.bernoulli(0.6)) compromise(adv, net.nodes[v], t += 1.0);

        std::vector<NodeId> layer_set{source};
        layer_set.insert(layer_set.end(), reenc.begin(), reenc.end());
        bool expect = true;
        for (NodeId v : layer_set) {
            auto it = adv.stolen.find(v);
            if (it == adv.stolen.end() || it->second.version != net.nodes[v].key.version)
                expect = false;
        }
        CHECK(decrypt_succeeds(net.suite, adv, p) == expect);
    }
}

TEST_CASE("walk steps are uniform over the four directions") {
    const sim::GridTopology topo = sim::GridTopology::build(100);
    AdversaryState adv;
    adv.position = topo.id_at(0, 0);
    Rng rng(31);

    // Single-step support from the origin, including wraparound cells.
    std::vector<NodeId> support{topo.id_at(9, 0), topo.id_at(1, 0), topo.id_at(0, 9),
                                topo.id_at(0, 1)};
    std::map<NodeId, long> counts;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        adv.position = topo.id_at(0, 0);
        ++counts[step_walk(adv, topo, rng)];
    }
    REQUIRE(counts.size() == 4);
    for (NodeId s : support) {
        const double freq = static_cast<double>(counts[s]) / trials;
        CHECK(std::abs(freq - 0.25) < 3 * std::sqrt(0.25 * 0.75 / trials));
    }
}

TEST_CASE("long-run walk occupancy is uniform over the torus") {
    const sim::GridTopology topo = sim::GridTopology::build(100);
    AdversaryState adv;
    adv.position = 0;
    Rng rng(32);
    const long steps = 4000000;
    std::vector<double> occupancy(topo.n(), 0.0);
    for (long t = 0; t < steps; ++t) occupancy[step_walk(adv, topo, rng)] += 1.0;
    for (double& o : occupancy) o /= static_cast<double>(steps);
    const std::vector<double> uniform(topo.n(), 1.0 / topo.n());
    CHECK(testutil::total_variation(occupancy, uniform) < 0.05);
}
