#ifndef GOSSICRYPT_SIMULATOR_HPP
#define GOSSICRYPT_SIMULATOR_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gossicrypt/adversary.hpp"
#include "gossicrypt/analysis.hpp"
#include "gossicrypt/crypto.hpp"
#include "gossicrypt/protocol.hpp"
#include "gossicrypt/topology.hpp"

namespace gossicrypt::sim {

struct SimConfig {
    int n = 100;              // node count, a perfect square
    double q = 0.7;           // re-encryption probability
    double lambda = 1.0;      // sink refresh intensity (events per unit time)
    double tau = 1.5;         // adversary mean inter-compromise time
    double lambda_r = 0.01;   // per-node refresh-generation rate
    int l = 6;                // evaluation path length (number of flipping relays)
    int k = 5;                // measurement epochs per breach trial
    double delta = 0.1;       // fraction of nodes reporting each epoch
    int r = 1;                // refresh replication count
    long transitions = 11000;
    long burn_in = 1000;
    std::uint64_t seed = 1;
    int variant = 2;          // key refreshing: 1 = raw key, 2 = sealed to the sink

    // Adversary targeting: the physical random walk of the trace-driven
    // experiments, a deterministic sweep, or uniform random choice (the
    // targeting process the birth-death analysis models).
    enum class Strategy { Walk, Sweep, Uniform };
    Strategy strategy = Strategy::Walk;

    enum class SinkMode { Walk, Uniform };
    SinkMode sink_mode = SinkMode::Walk;  // refresh-target selection

    double refresh_loss = 0.0;     // probability a refresh replica is lost in transit
    double epoch_dt = 1.0;         // data-report period in simulated time
    int intercept_radius = 0;      // hops around the adversary's cell it can overhear
    std::size_t payload_budget = 96;

    // Returns "field: problem" strings; empty when the config is usable.
    std::vector<std::string> validate() const;

    analysis::MarkovModel model() const { return {n, lambda, tau, 1.0}; }
};

struct SimMetrics {
    std::vector<long> state_histogram;  // correct-node count per event, post burn-in
    long transitions = 0;
    long burn_in = 0;
    long sink_events = 0;
    long adversary_events = 0;
    long final_correct = 0;
    double sim_time = 0.0;

    long sink_unwrap_attempts = 0;
    long sink_decrypt_failures = 0;
    double decrypt_fail_rate = 0.0;  // failures / attempts, desynced keys after lost refreshes

    long refreshes_sent = 0;
    long refreshes_lost = 0;
    long refreshes_installed = 0;
    long refresh_keys_leaked = 0;  // raw-variant refreshes decrypted by the adversary

    long data_delivered = 0;
    long data_discarded = 0;
    long adversary_intercepts = 0;
    long adversary_decrypts = 0;

    std::vector<std::uint8_t> success_samples;  // per-trial Y>0 outcomes (measure_success)
    std::vector<double> breach_estimates;       // F-hat(k), k = 1.. (measure_breach)
};

// Full-system discrete-event simulation on the torus: the merged sink/
// adversary Poisson clocks drive the subordinated chain (next event is the
// sink's with probability lambda/(lambda + 1/tau)), both walkers move one
// cell per own event, refreshes and data reports travel the real protocol
// path, and the adversary overhears any transmission made from its cell.
// One instance is strictly single-threaded and deterministic given the seed.
class Simulation {
   public:
    explicit Simulation(const SimConfig& cfg,
                        const crypto::CipherSuite& suite = crypto::toy_suite());

    void step();  // one transition of the merged process
    void advance_to(double t);

    double now() const { return now_; }
    long correct_count() const { return correct_; }
    long recompute_correct() const;
    bool node_correct(NodeId v) const;
    bool last_event_was_sink() const { return last_event_sink_; }

    const SimConfig& config() const { return cfg_; }
    const crypto::CipherSuite& suite() const { return suite_; }
    const GridTopology& topology() const { return topo_; }
    const adversary::AdversaryState& adversary_state() const { return adv_; }
    const protocol::SinkState& sink_state() const { return sink_; }
    const protocol::NodeProtocolState& node_state(NodeId v) const { return nodes_[v]; }
    NodeId sink_cell() const { return kSinkCell; }
    NodeId sink_position() const { return sink_pos_; }

    SimMetrics& metrics() { return metrics_; }
    const SimMetrics& metrics() const { return metrics_; }
    Rng& measure_rng() { return measure_rng_; }

    struct Transmission {
        protocol::Packet final_packet;   // as observed past the last relay
        bool sink_accepted = false;
        bool adversary_heard = false;    // some hop was transmitted from the adversary's cell
        bool adversary_decrypted = false;
    };

    // One measurement from `source` along a sampled shortest path to
    // `dest_cell`. With deliver_to_sink the node at the destination cell
    // forwards to the sink (and flips its coin like any relay) and the sink
    // verifies; otherwise the destination is a passive interception point and
    // only the strictly-between nodes relay.
    Transmission transmit_data(NodeId source, ConstSpan m, NodeId dest_cell,
                               bool deliver_to_sink);

   private:
    struct PathTraversal {
        protocol::Packet packet;
        bool heard = false;
        bool decrypted = false;
    };

    void sink_event();
    void adversary_event();
    void deliver_refresh(NodeId target);
    void collect_epoch();
    PathTraversal relay_along(protocol::Packet p, std::span<const NodeId> path,
                              std::size_t first_relay, std::size_t last_relay,
                              bool refresh_capture);
    void observe(NodeId transmitter, const protocol::Packet& p, PathTraversal& t,
                 bool refresh_capture);
    void note_unwrap_attempt(const protocol::UnwrapResult& res);
    Bytes epoch_measurement(NodeId v) const;

    static constexpr NodeId kSinkCell = 0;

    SimConfig cfg_;
    const crypto::CipherSuite& suite_;
    GridTopology topo_;
    std::vector<protocol::NodeProtocolState> nodes_;
    protocol::SinkState sink_;
    adversary::AdversaryState adv_;
    NodeId sink_pos_ = kSinkCell;
    long sweep_next_ = 0;
    long correct_ = 0;
    double now_ = 0.0;
    double next_epoch_ = 0.0;
    long epoch_index_ = 0;
    bool last_event_sink_ = false;
    std::vector<NodeId> reporters_;
    std::vector<Bytes> delayed_;                   // measurement postponed by a refresh
    std::vector<std::uint8_t> skip_report_;        // next report slot taken by a refresh
    std::vector<std::vector<Bytes>> epoch_window_; // per node, current-epoch measurements
    SimMetrics metrics_;

    Rng event_rng_, sink_rng_, adv_rng_, proto_rng_, path_rng_, measure_rng_;
};

// Drives cfg.transitions events on an existing instance and fills the
// post-burn-in state histogram and traffic counters.
SimMetrics run_collect(Simulation& sim);

// Runs cfg.transitions events and fills the post-burn-in state histogram and
// traffic counters.
SimMetrics run(const SimConfig& cfg);

struct SuccessEstimate {
    double q = 0.0;
    double analytical = 0.0;
    double median = 0.0;
    double lo = 0.0;   // 2.5% quantile across runs
    double hi = 0.0;   // 97.5% quantile across runs
    std::vector<double> per_run;
};

// Empirical P{Y>0} at the given path length: independent seeded runs, each
// sampling `trials` paths anchored at the adversary's current cell (source at
// distance path_len + 1, so exactly path_len relays flip) with a few events
// between consecutive samples. Runs execute in parallel; results are merged
// in run order.
std::vector<SuccessEstimate> measure_success(const SimConfig& cfg, int path_len,
                                             std::span<const double> qs, int runs, int trials,
                                             int events_between_trials = 5);

struct BreachEstimate {
    std::vector<double> f_hat;  // index k = 1..k_max; [0] = 1
    std::vector<long> hits;
    long blocks = 0;
    double epoch_dt = 0.0;
};

// F-hat(k): fraction of blocks whose first k consecutive measurement epochs
// were all breached (adversary decrypts the probe delivered past the path
// from `source` to `collector`). Epochs are `epoch_dt` apart in simulated
// time; the system keeps running in between, so consecutive snapshots are
// taken from a mixing chain.
BreachEstimate measure_breach(const SimConfig& cfg, NodeId source, NodeId collector, int k_max,
                              long blocks, double epoch_dt);

}  // namespace gossicrypt::sim

#endif
