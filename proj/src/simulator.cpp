#include "gossicrypt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gossicrypt::sim {

namespace {

bool is_perfect_square(int n) {
    if (n <= 0) return false;
    const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    return s * s == n;
}

double quantile(std::vector<double> sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> errors;
    if (!is_perfect_square(n)) errors.push_back("n: must be a positive perfect square");
    if (n >= (1 << 16)) errors.push_back("n: must fit 16-bit node ids");
    if (!(q > 0.0) || !(q < 1.0)) errors.push_back("q: must lie in (0, 1)");
    if (lambda < 0.0) errors.push_back("lambda: must be >= 0");
    if (!(tau > 0.0)) errors.push_back("tau: must be > 0");
    if (lambda_r < 0.0) errors.push_back("lambda_r: must be >= 0");
    if (l < 1) errors.push_back("l: must be >= 1");
    if (k < 0) errors.push_back("k: must be >= 0");
    if (delta < 0.0 || delta > 1.0) errors.push_back("delta: must lie in [0, 1]");
    if (r < 1) errors.push_back("r: must be >= 1");
    if (transitions < 1) errors.push_back("transitions: must be >= 1");
    if (burn_in < 0 || burn_in >= transitions)
        errors.push_back("burn_in: must satisfy 0 <= burn_in < transitions");
    if (variant != 1 && variant != 2) errors.push_back("variant: must be 1 or 2");
    if (refresh_loss < 0.0 || refresh_loss > 1.0)
        errors.push_back("refresh_loss: must lie in [0, 1]");
    if (intercept_radius < 0) errors.push_back("intercept_radius: must be >= 0");
    if (!(epoch_dt > 0.0)) errors.push_back("epoch_dt: must be > 0");
    return errors;
}

Simulation::Simulation(const SimConfig& cfg, const crypto::CipherSuite& suite)
    : cfg_(cfg),
      suite_(suite),
      topo_(GridTopology::build(cfg.n)),
      event_rng_(0),
      sink_rng_(0),
      adv_rng_(0),
      proto_rng_(0),
      path_rng_(0),
      measure_rng_(0) {
    if (auto errors = cfg.validate(); !errors.empty()) {
        std::ostringstream msg;
        msg << "invalid simulation config:";
        for (const auto& e : errors) msg << ' ' << e << ';';
        throw std::invalid_argument(msg.str());
    }
    // Sealed refresh key material must fit the payload budget.
    const std::size_t sealed_material = 2 + suite_.key_size() + suite_.pke_overhead();
    if (cfg.payload_budget < sealed_material)
        throw std::invalid_argument("payload_budget: too small for sealed refresh material");

    const Rng master(cfg.seed);
    event_rng_ = master.split(1);
    sink_rng_ = master.split(2);
    adv_rng_ = master.split(3);
    proto_rng_ = master.split(4);
    path_rng_ = master.split(5);
    measure_rng_ = master.split(6);
    Rng setup_rng = master.split(7);

    nodes_.reserve(cfg.n);
    for (int v = 0; v < cfg.n; ++v) {
        protocol::NodeProtocolState node;
        node.id = static_cast<NodeId>(v);
        node.key = suite_.make_key(setup_rng, 0);
        node.q = cfg.q;
        sink_.key_table[node.id] = node.key;
        nodes_.push_back(std::move(node));
    }
    sink_.keypair = suite_.pke_keygen(setup_rng);

    adv_.position = topo_.id_at(topo_.side() / 2, topo_.side() / 2);
    adv_.intercept_radius = cfg.intercept_radius;

    // Fixed reporter set: ceil(delta * n) distinct nodes.
    const int reporter_count =
        static_cast<int>(std::min<long>(cfg.n, std::lround(std::ceil(cfg.delta * cfg.n))));
    std::vector<NodeId> ids(cfg.n);
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < reporter_count; ++i) {
        const std::size_t j = i + setup_rng.below(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
    reporters_.assign(ids.begin(), ids.begin() + reporter_count);
    std::sort(reporters_.begin(), reporters_.end());

    delayed_.resize(cfg.n);
    skip_report_.assign(cfg.n, 0);
    epoch_window_.resize(cfg.n);
    correct_ = cfg.n;
    next_epoch_ = cfg.epoch_dt;
    metrics_.state_histogram.assign(cfg.n + 1, 0);
}

bool Simulation::node_correct(NodeId v) const {
    auto it = adv_.stolen.find(v);
    return it == adv_.stolen.end() || it->second.version != nodes_[v].key.version;
}

long Simulation::recompute_correct() const {
    long c = 0;
    for (int v = 0; v < cfg_.n; ++v)
        if (node_correct(static_cast<NodeId>(v))) ++c;
    return c;
}

void Simulation::step() {
    const double rate = cfg_.lambda + 1.0 / cfg_.tau;
    now_ += event_rng_.exponential(rate);
    while (next_epoch_ <= now_) {
        collect_epoch();
        next_epoch_ += cfg_.epoch_dt;
    }
    if (event_rng_.bernoulli(cfg_.lambda / rate)) {
        last_event_sink_ = true;
        ++metrics_.sink_events;
        sink_event();
    } else {
        last_event_sink_ = false;
        ++metrics_.adversary_events;
        adversary_event();
    }
}

void Simulation::advance_to(double t) {
    while (now_ < t) step();
}

void Simulation::sink_event() {
    NodeId target;
    if (cfg_.sink_mode == SimConfig::SinkMode::Walk) {
        // Virtual move: the sink re-aims the refresh protocol rather than
        // physically relocating.
        sink_pos_ = topo_.neighbors(sink_pos_)[sink_rng_.below(4)];
        target = sink_pos_;
    } else {
        target = static_cast<NodeId>(sink_rng_.below(cfg_.n));
    }
    deliver_refresh(target);
}

void Simulation::adversary_event() {
    switch (cfg_.strategy) {
        case SimConfig::Strategy::Walk:
            adversary::step_walk(adv_, topo_, adv_rng_);
            break;
        case SimConfig::Strategy::Sweep:
            adv_.position = static_cast<NodeId>(sweep_next_ % cfg_.n);
            ++sweep_next_;
            break;
        case SimConfig::Strategy::Uniform:
            adv_.position = static_cast<NodeId>(adv_rng_.below(cfg_.n));
            break;
    }
    const NodeId target = adv_.position;
    const bool was_correct = node_correct(target);
    adversary::compromise(adv_, nodes_[target], now_, epoch_window_[target]);
    if (was_correct) --correct_;
}

void Simulation::deliver_refresh(NodeId target) {
    auto& node = nodes_[target];
    protocol::schedule_refresh(suite_, node, proto_rng_);
    skip_report_[target] = 1;  // the refresh consumes this node's next report slot

    const bool was_correct = node_correct(target);
    std::optional<crypto::PublicKey> sink_pub;
    if (cfg_.variant == 2) sink_pub = sink_.keypair.pub;
    auto built = protocol::refresh_build(suite_, cfg_.payload_budget, node, sink_pub, proto_rng_);
    if (!was_correct && node_correct(target)) ++correct_;
    ++metrics_.refreshes_sent;

    std::vector<NodeId> path;
    if (target == kSinkCell)
        path.push_back(target);
    else
        path = topo_.shortest_path(target, kSinkCell, path_rng_);

    for (int replica = 0; replica < cfg_.r; ++replica) {
        // Replicas reuse the same nonce so the replay cache absorbs them.
        PathTraversal t =
            relay_along(built.packet, path, 1, path.size() - 1, /*refresh_capture=*/true);
        if (cfg_.refresh_loss > 0.0 && proto_rng_.bernoulli(cfg_.refresh_loss)) {
            ++metrics_.refreshes_lost;
            continue;
        }
        auto res = protocol::sink_unwrap(suite_, sink_, t.packet);
        note_unwrap_attempt(res);
        if (auto* refresh = std::get_if<protocol::RefreshPayload>(&res)) {
            if (protocol::sink_process_refresh(suite_, sink_, *refresh) ==
                protocol::Verdict::Accepted)
                ++metrics_.refreshes_installed;
        }
    }
}

void Simulation::collect_epoch() {
    ++epoch_index_;
    for (NodeId v : reporters_) {
        Bytes m = epoch_measurement(v);
        epoch_window_[v].clear();
        epoch_window_[v].push_back(m);
        if (skip_report_[v]) {
            // Report slot used by a refresh; carry the measurement over.
            skip_report_[v] = 0;
            delayed_[v] = std::move(m);
            continue;
        }
        Bytes payload;
        if (!delayed_[v].empty()) {
            payload = std::move(delayed_[v]);
            delayed_[v].clear();
            append(payload, m);
        } else {
            payload = std::move(m);
        }
        transmit_data(v, payload, kSinkCell, /*deliver_to_sink=*/true);
    }
}

Bytes Simulation::epoch_measurement(NodeId v) const {
    // Synthetic fixed-size 20-byte measurement tagged by node and epoch.
    Bytes m(20, 0);
    m[0] = static_cast<std::uint8_t>(v >> 8);
    m[1] = static_cast<std::uint8_t>(v & 0xff);
    std::uint64_t e = static_cast<std::uint64_t>(epoch_index_);
    for (int i = 0; i < 8; ++i) {
        m[2 + i] = static_cast<std::uint8_t>(e & 0xff);
        e >>= 8;
    }
    return m;
}

void Simulation::observe(NodeId transmitter, const protocol::Packet& p, PathTraversal& t,
                         bool refresh_capture) {
    if (t.heard) return;
    if (topo_.distance(transmitter, adv_.position) > adv_.intercept_radius) return;
    t.heard = true;
    auto outcome = adversary::attempt_decrypt(suite_, adv_, p);
    t.decrypted = !std::holds_alternative<adversary::DecryptFailure>(outcome);
    adv_.intercept_log.push_back({now_, protocol::serialize(p), t.decrypted});
    ++metrics_.adversary_intercepts;
    if (!t.decrypted) return;
    ++metrics_.adversary_decrypts;

    if (!refresh_capture) return;
    if (auto* refresh = std::get_if<protocol::RefreshPayload>(&outcome)) {
        if (refresh->flag == protocol::kFlagRefreshRaw &&
            refresh->key_material.size() == suite_.key_size()) {
            // Raw-variant refresh overheard with the old key in hand: the
            // adversary learns the replacement key outright.
            const NodeId origin = refresh->origin;
            const bool was_correct = node_correct(origin);
            auto it = adv_.stolen.find(origin);
            const std::uint32_t version = it == adv_.stolen.end() ? 0 : it->second.version + 1;
            adv_.stolen[origin] = crypto::SymmetricKey{refresh->key_material, version};
            ++metrics_.refresh_keys_leaked;
            if (was_correct && !node_correct(origin)) --correct_;
        }
    }
}

Simulation::PathTraversal Simulation::relay_along(protocol::Packet p,
                                                  std::span<const NodeId> path,
                                                  std::size_t first_relay,
                                                  std::size_t last_relay, bool refresh_capture) {
    PathTraversal t;
    observe(path.front(), p, t, refresh_capture);
    for (std::size_t i = first_relay; i <= last_relay && i < path.size(); ++i) {
        p = protocol::relay_process(suite_, nodes_[path[i]], p, proto_rng_);
        observe(path[i], p, t, refresh_capture);
    }
    t.packet = std::move(p);
    return t;
}

void Simulation::note_unwrap_attempt(const protocol::UnwrapResult& res) {
    ++metrics_.sink_unwrap_attempts;
    if (auto* err = std::get_if<protocol::UnwrapError>(&res)) {
        if (err->kind == protocol::UnwrapErrorKind::DecryptFailed)
            ++metrics_.sink_decrypt_failures;
    }
}

Simulation::Transmission Simulation::transmit_data(NodeId source, ConstSpan m, NodeId dest_cell,
                                                   bool deliver_to_sink) {
    Transmission tx;
    protocol::Packet p =
        protocol::source_encrypt(suite_, cfg_.payload_budget, nodes_[source], m, proto_rng_);

    if (source != dest_cell) {
        const std::vector<NodeId> path = topo_.shortest_path(source, dest_cell, path_rng_);
        // For sink delivery the destination-cell node forwards to the sink and
        // relays like any other hop; a passive interception endpoint does not
        // touch the packet.
        const std::size_t last_relay = deliver_to_sink ? path.size() - 1 : path.size() - 2;
        PathTraversal t = relay_along(std::move(p), path, 1, last_relay, false);
        p = std::move(t.packet);
        tx.adversary_heard = t.heard;
        tx.adversary_decrypted = t.decrypted;
    } else {
        PathTraversal t;
        observe(source, p, t, false);
        tx.adversary_heard = t.heard;
        tx.adversary_decrypted = t.decrypted;
    }

    if (deliver_to_sink) {
        auto res = protocol::sink_unwrap(suite_, sink_, p);
        note_unwrap_attempt(res);
        if (auto* data = std::get_if<protocol::DataPayload>(&res)) {
            auto outcome = protocol::sink_verify_data(suite_, sink_, *data);
            tx.sink_accepted = outcome.verdict == protocol::Verdict::Accepted;
        }
        if (tx.sink_accepted)
            ++metrics_.data_delivered;
        else
            ++metrics_.data_discarded;
    }
    tx.final_packet = std::move(p);
    return tx;
}

SimMetrics run_collect(Simulation& sim) {
    const SimConfig& cfg = sim.config();
    for (long i = 0; i < cfg.transitions; ++i) {
        sim.step();
        if (i >= cfg.burn_in) ++sim.metrics().state_histogram[sim.correct_count()];
    }
    SimMetrics& m = sim.metrics();
    m.transitions = cfg.transitions;
    m.burn_in = cfg.burn_in;
    m.final_correct = sim.correct_count();
    m.sim_time = sim.now();
    m.decrypt_fail_rate =
        m.sink_unwrap_attempts == 0
            ? 0.0
            : static_cast<double>(m.sink_decrypt_failures) /
                  static_cast<double>(m.sink_unwrap_attempts);
    return m;
}

SimMetrics run(const SimConfig& cfg) {
    Simulation sim(cfg);
    return run_collect(sim);
}

namespace {

// One seeded run of the success experiment: per-q frequency of Y > 0.
std::vector<double> success_run(const SimConfig& cfg, int path_len, std::span<const double> qs,
                                int trials, int events_between) {
    Simulation sim(cfg);
    for (long i = 0; i < cfg.burn_in; ++i) sim.step();

    const GridTopology& topo = sim.topology();
    std::vector<long> successes(qs.size(), 0);
    Rng& rng = sim.measure_rng();
    for (int t = 0; t < trials; ++t) {
        for (int j = 0; j < events_between; ++j) sim.step();
        const NodeId anchor = sim.adversary_state().position;
        const auto sources = topo.nodes_at_distance(anchor, path_len + 1);
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
            const NodeId source = sources[rng.below(sources.size())];
            const auto path = topo.shortest_path(source, anchor, rng);
            // The L nodes strictly between the source and the interception
            // cell flip; Y counts correct nodes among the heads.
            bool success = false;
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                if (rng.bernoulli(qs[qi]) && sim.node_correct(path[i])) {
                    success = true;
                    break;
                }
            }
            if (success) ++successes[qi];
            if (qs.size() == 1)
                sim.metrics().success_samples.push_back(success ? 1 : 0);
        }
    }
    std::vector<double> freq(qs.size());
    for (std::size_t qi = 0; qi < qs.size(); ++qi)
        freq[qi] = static_cast<double>(successes[qi]) / static_cast<double>(trials);
    return freq;
}

}  // namespace

std::vector<SuccessEstimate> measure_success(const SimConfig& cfg, int path_len,
                                             std::span<const double> qs, int runs, int trials,
                                             int events_between_trials) {
    {
        GridTopology topo = GridTopology::build(cfg.n);
        if (path_len + 1 > topo.max_distance())
            throw std::invalid_argument("l: path length + 1 exceeds the torus diameter");
    }
    const Rng master(cfg.seed);
    std::vector<std::future<std::vector<double>>> futures;
    futures.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        SimConfig run_cfg = cfg;
        run_cfg.seed = master.split(1000 + static_cast<std::uint64_t>(r)).seed();
        futures.push_back(std::async(std::launch::async, [run_cfg, path_len, qs, trials,
                                                          events_between_trials] {
            return success_run(run_cfg, path_len, qs, trials, events_between_trials);
        }));
    }
    std::vector<std::vector<double>> per_run;
    per_run.reserve(runs);
    for (auto& f : futures) per_run.push_back(f.get());

    // With no refreshing the stationary regime is fully compromised (P0 = 1)
    // and the closed form degenerates to zero success.
    const double p0 = cfg.lambda > 0.0 ? analysis::prob_relay_compromised(cfg.model()) : 1.0;
    std::vector<SuccessEstimate> out;
    out.reserve(qs.size());
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        SuccessEstimate est;
        est.q = qs[qi];
        est.analytical = analysis::success_from_p0(p0, path_len, qs[qi]);
        for (const auto& run_freqs : per_run) est.per_run.push_back(run_freqs[qi]);
        std::vector<double> sorted = est.per_run;
        std::sort(sorted.begin(), sorted.end());
        est.median = quantile(sorted, 0.5);
        est.lo = quantile(sorted, 0.025);
        est.hi = quantile(sorted, 0.975);
        out.push_back(std::move(est));
    }
    return out;
}

BreachEstimate measure_breach(const SimConfig& cfg, NodeId source, NodeId collector, int k_max,
                              long blocks, double epoch_dt) {
    if (source == collector) throw std::invalid_argument("breach pair must be distinct nodes");
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    Simulation sim(cfg);
    for (long i = 0; i < cfg.burn_in; ++i) sim.step();

    std::vector<long> hits(k_max + 1, 0);
    Bytes probe(20, 0xa5);
    for (long b = 0; b < blocks; ++b) {
        bool prefix = true;
        for (int e = 1; e <= k_max; ++e) {
            sim.advance_to(sim.now() + epoch_dt);
            auto tx = sim.transmit_data(source, probe, collector, /*deliver_to_sink=*/false);
            const bool breached = adversary::decrypt_succeeds(sim.suite(), sim.adversary_state(),
                                                              tx.final_packet);
            prefix = prefix && breached;
            if (prefix) ++hits[e];
        }
    }

    BreachEstimate est;
    est.blocks = blocks;
    est.epoch_dt = epoch_dt;
    est.hits = hits;
    est.f_hat.resize(k_max + 1);
    est.f_hat[0] = 1.0;
    for (int k = 1; k <= k_max; ++k)
        est.f_hat[k] = blocks == 0 ? 0.0 : static_cast<double>(hits[k]) / static_cast<double>(blocks);
    sim.metrics().breach_estimates.assign(est.f_hat.begin() + 1, est.f_hat.end());
    return est;
}

}  // namespace gossicrypt::sim
