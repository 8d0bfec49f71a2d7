#ifndef GOSSICRYPT_ANALYSIS_HPP
#define GOSSICRYPT_ANALYSIS_HPP

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace gossicrypt::analysis {

// Birth-death model of the correct-node count: the sink refreshes a random
// node at rate lambda, the adversary compromises one at rate 1/tau, and the
// subordinated chain at event times has tridiagonal transition structure.
// `epsilon` discounts the effective refresh rate for symmetric-only (raw)
// key refreshing, where an intercepted refresh can leak the new key.
struct MarkovModel {
    int n = 100;
    double lambda = 1.0;
    double tau = 1.5;
    double epsilon = 1.0;

    double effective_lambda() const { return lambda * epsilon; }
};

struct TransitionRow {
    double down = 0.0;  // mu_i: a correct node gets compromised
    double stay = 0.0;  // s_i: fruitless refresh or re-compromise
    double up = 0.0;    // nu_i: a compromised node gets refreshed
};

// Row i of the transition matrix, 0 <= i <= n (throws std::out_of_range).
// mu_0 = 0 and nu_n = 0: reflecting barriers.
TransitionRow transition_row(const MarkovModel& model, int i);

// Stationary distribution over correct-node counts 0..n via the product
// formula, accumulated in log space so large n does not overflow.
std::vector<double> stationary(const MarkovModel& model);

// Row vector times the transition matrix; pi is stationary iff this returns
// pi itself.
std::vector<double> apply_transition(const MarkovModel& model, std::span<const double> pi);

double expected_correct(std::span<const double> pi);

// P{Omega_0 = 0} = (n - E_pi[X]) / n: probability a uniformly chosen node is
// compromised in the stationary regime.
double prob_relay_compromised(const MarkovModel& model);

// P{Y > 0}: probability at least one correct node re-encrypts along a path
// with `path_len` coin-flipping relays (0 relays: never protected). The full
// generating-function value is 1 - ((1-q) + q*p0)^L, which includes the
// no-re-encryption (m = 0) term; `eq4_literal` instead drops that term from
// P{Y=0}, reproducing the printed sum that starts at m = 1.
double success_from_p0(double p0, int path_len, double q, bool eq4_literal = false);
double success_probability(const MarkovModel& model, int path_len, double q,
                           bool eq4_literal = false);

// Probability that all k consecutive measurement snapshots are breached,
// given single-snapshot breach probability f1. k = 0 gives 1.
double breach_probability(double f1, long k);

// f1 = E_L[1 - P{Y>0}] over a caller-supplied path-length distribution
// (pairs of path length and probability mass).
double expected_single_breach(const MarkovModel& model, double q,
                              std::span<const std::pair<int, double>> path_lengths);

struct Table1 {
    static constexpr std::array<int, 8> path_lengths{5, 6, 7, 8, 9, 10, 11, 12};
    static constexpr std::array<double, 5> qs{0.5, 0.6, 0.7, 0.8, 0.9};
    // Cell that does not follow the closed form's monotonicity; flagged in
    // emitted reports.
    static constexpr int flagged_row = 6;  // L = 11
    static constexpr int flagged_col = 2;  // q = 0.7

    std::array<std::array<double, 5>, 8> values{};
};

Table1 table1(const MarkovModel& model);

// Per-message cost constants (MICA2-class hardware measurements).
struct EnergyModel {
    double sym_comp_uj = 32.4;      // symmetric encryption, uJ per 20-byte message
    double rsa_comp_uj = 14100.0;   // RSA-1024 encryption, uJ per message
    double ecc_comp_uj = 53400.0;   // ECC-160 encryption, uJ per message
    double tx_uj_per_bit = 0.21;
    double id_bits = 16.0;          // node identity size; +16q bits expected per hop
    double rsa_ct_bits = 1024.0;
    double ecc_ct_bits = 320.0;
    double message_bits = 160.0;    // 20-byte measurement
};

struct EnergyReport {
    double comp_uj_gc = 0.0, comp_uj_rsa = 0.0, comp_uj_ecc = 0.0;
    // Expected on-wire message size after `hops` relay hops.
    double comm_bits_gc = 0.0, comm_bits_rsa = 0.0, comm_bits_ecc = 0.0;
    // Per-source computation advantage (PKE cost / scheme cost) when keys are
    // refreshed symmetrically (refresh costs about one more symmetric
    // encryption per n messages)...
    double advantage_sym_refresh_rsa = 0.0, advantage_sym_refresh_ecc = 0.0;
    // ...and when the refresh itself uses public-key encryption (one ECC
    // encryption, or about three RSA-sized operations, per n messages).
    double advantage_pke_refresh_rsa = 0.0, advantage_pke_refresh_ecc = 0.0;
    // Hop count at which the accumulated per-hop identity overhead reaches
    // the PKE ciphertext expansion: (ct_bits - message_bits) / (16 q).
    double crossover_hops_rsa = 0.0, crossover_hops_ecc = 0.0;
};

EnergyReport energy_compare(const EnergyModel& e, int n, double q, double hops);

}  // namespace gossicrypt::analysis

#endif
