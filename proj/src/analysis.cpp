#include "gossicrypt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gossicrypt::analysis {

namespace {

void check_model(const MarkovModel& model) {
    if (model.n < 1) throw std::invalid_argument("model: n must be >= 1");
    if (!(model.lambda > 0.0)) throw std::invalid_argument("model: lambda must be > 0");
    if (!(model.tau > 0.0)) throw std::invalid_argument("model: tau must be > 0");
    if (!(model.epsilon > 0.0) || model.epsilon > 1.0)
        throw std::invalid_argument("model: epsilon must be in (0, 1]");
}

}  // namespace

TransitionRow transition_row(const MarkovModel& model, int i) {
    check_model(model);
    if (i < 0 || i > model.n) throw std::out_of_range("transition_row: state out of range");
    const double n = model.n;
    const double lambda = model.effective_lambda();
    const double total = lambda + 1.0 / model.tau;
    TransitionRow row;
    row.down = i / (n * model.tau * total);
    row.up = (n - i) * lambda / (n * total);
    row.stay = 1.0 - row.down - row.up;
    return row;
}

std::vector<double> stationary(const MarkovModel& model) {
    check_model(model);
    const int n = model.n;
    // pi_i = pi_0 * prod_{j<i} nu_j / mu_{j+1}; the ratio simplifies to
    // (n-j) * lambda * tau / (j+1), i.e. pi is Binomial(n, p) with
    // p = lambda*tau / (1 + lambda*tau). Accumulate logs and normalize.
    const double rho = model.effective_lambda() * model.tau;
    std::vector<double> logw(n + 1);
    logw[0] = 0.0;
    for (int i = 1; i <= n; ++i)
        logw[i] = logw[i - 1] + std::log(static_cast<double>(n - i + 1)) -
                  std::log(static_cast<double>(i)) + std::log(rho);
    const double peak = *std::max_element(logw.begin(), logw.end());
    double total = 0.0;
    for (double lw : logw) total += std::exp(lw - peak);
    const double log_z = peak + std::log(total);
    std::vector<double> pi(n + 1);
    for (int i = 0; i <= n; ++i) pi[i] = std::exp(logw[i] - log_z);
    return pi;
}

std::vector<double> apply_transition(const MarkovModel& model, std::span<const double> pi) {
    check_model(model);
    const int n = model.n;
    if (pi.size() != static_cast<std::size_t>(n + 1))
        throw std::invalid_argument("apply_transition: distribution size mismatch");
    std::vector<double> out(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
        const TransitionRow row = transition_row(model, i);
        if (i > 0) out[i - 1] += pi[i] * row.down;
        out[i] += pi[i] * row.stay;
        if (i < n) out[i + 1] += pi[i] * row.up;
    }
    return out;
}

double expected_correct(std::span<const double> pi) {
    double e = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) e += static_cast<double>(i) * pi[i];
    return e;
}

double prob_relay_compromised(const MarkovModel& model) {
    const std::vector<double> pi = stationary(model);
    return (model.n - expected_correct(pi)) / model.n;
}

double success_from_p0(double p0, int path_len, double q, bool eq4_literal) {
    if (p0 < 0.0 || p0 > 1.0) throw std::invalid_argument("p0 must be a probability");
    if (path_len < 0) throw std::invalid_argument("path length must be >= 0");
    if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("q must be in (0, 1)");
    double p_y0 = std::pow((1.0 - q) + q * p0, path_len);
    if (eq4_literal) p_y0 -= std::pow(1.0 - q, path_len);  // printed sum starts at m = 1
    return 1.0 - p_y0;
}

double success_probability(const MarkovModel& model, int path_len, double q, bool eq4_literal) {
    return success_from_p0(prob_relay_compromised(model), path_len, q, eq4_literal);
}

double breach_probability(double f1, long k) {
    if (f1 < 0.0 || f1 > 1.0) throw std::invalid_argument("f1 must be a probability");
    if (k < 0) throw std::invalid_argument("k must be >= 0");
    return std::pow(f1, static_cast<double>(k));
}

double expected_single_breach(const MarkovModel& model, double q,
                              std::span<const std::pair<int, double>> path_lengths) {
    const double p0 = prob_relay_compromised(model);
    double f1 = 0.0;
    double mass = 0.0;
    for (const auto& [len, prob] : path_lengths) {
        f1 += prob * (1.0 - success_from_p0(p0, len, q));
        mass += prob;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("path length distribution must sum to 1");
    return f1;
}

Table1 table1(const MarkovModel& model) {
    Table1 t;
    const double p0 = prob_relay_compromised(model);
    for (std::size_t row = 0; row < Table1::path_lengths.size(); ++row)
        for (std::size_t col = 0; col < Table1::qs.size(); ++col)
            t.values[row][col] = success_from_p0(p0, Table1::path_lengths[row], Table1::qs[col]);
    return t;
}

EnergyReport energy_compare(const EnergyModel& e, int n, double q, double hops) {
    if (n < 1 || !(q > 0.0) || q > 1.0 || hops < 0.0)
        throw std::invalid_argument("energy_compare: bad inputs");
    EnergyReport r;
    r.comp_uj_gc = e.sym_comp_uj;
    r.comp_uj_rsa = e.rsa_comp_uj;
    r.comp_uj_ecc = e.ecc_comp_uj;

    r.comm_bits_gc = e.message_bits + e.id_bits * q * hops;
    r.comm_bits_rsa = e.rsa_ct_bits;
    r.comm_bits_ecc = e.ecc_ct_bits;

    // Symmetric-only refreshing costs about one extra symmetric encryption
    // per n messages: (n * c_pke) / ((n + 1) * c_gc).
    const double nd = n;
    r.advantage_sym_refresh_rsa = nd / (nd + 1.0) * e.rsa_comp_uj / e.sym_comp_uj;
    r.advantage_sym_refresh_ecc = nd / (nd + 1.0) * e.ecc_comp_uj / e.sym_comp_uj;

    // PKE-wrapped refreshing: one ECC encryption per n messages, or about
    // three RSA-cost units per n messages for an RSA-based wrap.
    r.advantage_pke_refresh_ecc = nd * e.ecc_comp_uj / (nd * e.sym_comp_uj + e.ecc_comp_uj);
    r.advantage_pke_refresh_rsa = nd * e.rsa_comp_uj / (nd * e.sym_comp_uj + 3.0 * e.rsa_comp_uj);

    r.crossover_hops_rsa = (e.rsa_ct_bits - e.message_bits) / (e.id_bits * q);
    r.crossover_hops_ecc = (e.ecc_ct_bits - e.message_bits) / (e.id_bits * q);
    return r;
}

}  // namespace gossicrypt::analysis
