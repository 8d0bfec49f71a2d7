// Batch front-end: closed-form reports (stationary distribution, success
// table, breach decay, energy comparison) and seeded simulation runs, emitted
// as CSV or JSON. Exit code 0 on success, 2 on configuration errors.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "gossicrypt/analysis.hpp"
#include "gossicrypt/simulator.hpp"

using namespace gossicrypt;
using nlohmann::json;

namespace {

constexpr int kExitConfigError = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Floats are written with 6 significant digits throughout.
std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

sim::SimConfig::Strategy parse_strategy(const std::string& s) {
    if (s == "walk") return sim::SimConfig::Strategy::Walk;
    if (s == "sweep") return sim::SimConfig::Strategy::Sweep;
    if (s == "uniform") return sim::SimConfig::Strategy::Uniform;
    throw ConfigError("strategy: expected walk, sweep, or uniform");
}

sim::SimConfig::SinkMode parse_sink_mode(const std::string& s) {
    if (s == "walk") return sim::SimConfig::SinkMode::Walk;
    if (s == "uniform") return sim::SimConfig::SinkMode::Uniform;
    throw ConfigError("sink_mode: expected walk or uniform");
}

const char* strategy_name(sim::SimConfig::Strategy s) {
    switch (s) {
        case sim::SimConfig::Strategy::Walk: return "walk";
        case sim::SimConfig::Strategy::Sweep: return "sweep";
        case sim::SimConfig::Strategy::Uniform: return "uniform";
    }
    return "?";
}

const char* sink_mode_name(sim::SimConfig::SinkMode s) {
    return s == sim::SimConfig::SinkMode::Walk ? "walk" : "uniform";
}

// Flat key=value experiment file; '#' comments; unknown keys rejected.
void apply_config_file(sim::SimConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r\n");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);

        try {
            if (key == "n") cfg.n = std::stoi(value);
            else if (key == "q") cfg.q = std::stod(value);
            else if (key == "lambda") cfg.lambda = std::stod(value);
            else if (key == "tau") cfg.tau = std::stod(value);
            else if (key == "lambda_r") cfg.lambda_r = std::stod(value);
            else if (key == "l") cfg.l = std::stoi(value);
            else if (key == "k") cfg.k = std::stoi(value);
            else if (key == "delta") cfg.delta = std::stod(value);
            else if (key == "r") cfg.r = std::stoi(value);
            else if (key == "transitions") cfg.transitions = std::stol(value);
            else if (key == "burn_in") cfg.burn_in = std::stol(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "variant") cfg.variant = std::stoi(value);
            else if (key == "strategy") cfg.strategy = parse_strategy(value);
            else if (key == "sink_mode") cfg.sink_mode = parse_sink_mode(value);
            else if (key == "refresh_loss") cfg.refresh_loss = std::stod(value);
            else if (key == "epoch_dt") cfg.epoch_dt = std::stod(value);
            else if (key == "intercept_radius") cfg.intercept_radius = std::stoi(value);
            else if (key == "payload_budget") cfg.payload_budget = std::stoul(value);
            else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key: " + key);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for " + key);
        }
    }
}

void validate_or_throw(const sim::SimConfig& cfg) {
    const auto errors = cfg.validate();
    if (errors.empty()) return;
    std::string msg;
    for (const auto& e : errors) {
        if (!msg.empty()) msg += "; ";
        msg += e;
    }
    throw ConfigError(msg);
}

// Simulation flags shared by `simulate`, `breach --simulate`, and `figures`.
struct SimFlags {
    std::string config_path;
    std::optional<int> n, l, k, r, variant, intercept_radius;
    std::optional<double> q, lambda, tau, lambda_r, delta, refresh_loss, epoch_dt;
    std::optional<long> transitions, burn_in;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> strategy, sink_mode;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment file (flat key=value lines)");
        cmd->add_option("--n", n, "node count (perfect square)");
        cmd->add_option("--q", q, "re-encryption probability");
        cmd->add_option("--lambda", lambda, "sink refresh intensity");
        cmd->add_option("--tau", tau, "adversary mean inter-compromise time");
        cmd->add_option("--lambda-r", lambda_r, "per-node refresh-generation rate");
        cmd->add_option("--l", l, "evaluation path length (flipping relays)");
        cmd->add_option("--k", k, "measurement epochs per breach trial");
        cmd->add_option("--delta", delta, "fraction of nodes reporting each epoch");
        cmd->add_option("--r", r, "refresh replication count");
        cmd->add_option("--transitions", transitions, "total events per run");
        cmd->add_option("--burn-in", burn_in, "events discarded before measuring");
        cmd->add_option("--seed", seed, "64-bit RNG seed");
        cmd->add_option("--variant", variant, "key refreshing variant: 1 raw, 2 sealed");
        cmd->add_option("--strategy", strategy, "adversary targeting: walk|sweep|uniform");
        cmd->add_option("--sink-mode", sink_mode, "refresh-target selection: walk|uniform");
        cmd->add_option("--refresh-loss", refresh_loss, "per-replica refresh loss probability");
        cmd->add_option("--epoch-dt", epoch_dt, "data-report period in simulated time");
        cmd->add_option("--intercept-radius", intercept_radius,
                        "hops around its cell the adversary overhears");
    }

    sim::SimConfig resolve() const {
        sim::SimConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        if (n) cfg.n = *n;
        if (q) cfg.q = *q;
        if (lambda) cfg.lambda = *lambda;
        if (tau) cfg.tau = *tau;
        if (lambda_r) cfg.lambda_r = *lambda_r;
        if (l) cfg.l = *l;
        if (k) cfg.k = *k;
        if (delta) cfg.delta = *delta;
        if (r) cfg.r = *r;
        if (transitions) cfg.transitions = *transitions;
        if (burn_in) cfg.burn_in = *burn_in;
        if (seed) cfg.seed = *seed;
        if (variant) cfg.variant = *variant;
        if (strategy) cfg.strategy = parse_strategy(*strategy);
        if (sink_mode) cfg.sink_mode = parse_sink_mode(*sink_mode);
        if (refresh_loss) cfg.refresh_loss = *refresh_loss;
        if (epoch_dt) cfg.epoch_dt = *epoch_dt;
        if (intercept_radius) cfg.intercept_radius = *intercept_radius;
        validate_or_throw(cfg);
        return cfg;
    }
};

json config_to_json(const sim::SimConfig& cfg) {
    return json{{"n", cfg.n},
                {"q", cfg.q},
                {"lambda", cfg.lambda},
                {"tau", cfg.tau},
                {"lambda_r", cfg.lambda_r},
                {"l", cfg.l},
                {"k", cfg.k},
                {"delta", cfg.delta},
                {"r", cfg.r},
                {"transitions", cfg.transitions},
                {"burn_in", cfg.burn_in},
                {"seed", cfg.seed},
                {"variant", cfg.variant},
                {"strategy", strategy_name(cfg.strategy)},
                {"sink_mode", sink_mode_name(cfg.sink_mode)},
                {"refresh_loss", cfg.refresh_loss},
                {"epoch_dt", cfg.epoch_dt},
                {"intercept_radius", cfg.intercept_radius},
                {"payload_budget", cfg.payload_budget}};
}

json metrics_to_json(const sim::SimConfig& cfg, const sim::SimMetrics& m) {
    json j;
    j["config"] = config_to_json(cfg);
    j["events"] = {{"sink", m.sink_events},
                   {"adversary", m.adversary_events},
                   {"total", m.sink_events + m.adversary_events}};
    j["state_histogram"] = m.state_histogram;
    j["final_correct"] = m.final_correct;
    j["sim_time"] = m.sim_time;
    j["sink"] = {{"unwrap_attempts", m.sink_unwrap_attempts},
                 {"decrypt_failures", m.sink_decrypt_failures},
                 {"decrypt_fail_rate", m.decrypt_fail_rate}};
    j["traffic"] = {{"data_delivered", m.data_delivered},
                    {"data_discarded", m.data_discarded},
                    {"refreshes_sent", m.refreshes_sent},
                    {"refreshes_lost", m.refreshes_lost},
                    {"refreshes_installed", m.refreshes_installed},
                    {"refresh_keys_leaked", m.refresh_keys_leaked},
                    {"adversary_intercepts", m.adversary_intercepts},
                    {"adversary_decrypts", m.adversary_decrypts}};
    if (!m.breach_estimates.empty()) j["breach_estimates"] = m.breach_estimates;
    return j;
}

// ---------------------------------------------------------------------------
// Report bodies

std::string render_stationary(int n, double lambda, double tau, double epsilon) {
    const analysis::MarkovModel model{n, lambda, tau, epsilon};
    const auto pi = analysis::stationary(model);
    std::ostringstream csv;
    csv << "i,pi\n";
    for (std::size_t i = 0; i < pi.size(); ++i) csv << i << ',' << fmt(pi[i]) << '\n';
    return csv.str();
}

std::string render_table1(int n, double lambda, double tau) {
    const auto t = analysis::table1({n, lambda, tau});
    std::ostringstream csv;
    csv << "L,q,p_success,flag\n";
    for (std::size_t row = 0; row < analysis::Table1::path_lengths.size(); ++row) {
        for (std::size_t col = 0; col < analysis::Table1::qs.size(); ++col) {
            csv << analysis::Table1::path_lengths[row] << ',' << fmt(analysis::Table1::qs[col])
                << ',' << fmt(t.values[row][col]) << ',';
            if (row == analysis::Table1::flagged_row && col == analysis::Table1::flagged_col)
                csv << "suspected_typo";
            csv << '\n';
        }
    }
    return csv.str();
}

std::string render_energy(int n, double q, double hops) {
    const analysis::EnergyReport r = analysis::energy_compare({}, n, q, hops);
    std::ostringstream csv;
    csv << "metric,gossicrypt,pke_rsa,pke_ecc\n";
    csv << "comp_uj_per_msg," << fmt(r.comp_uj_gc) << ',' << fmt(r.comp_uj_rsa) << ','
        << fmt(r.comp_uj_ecc) << '\n';
    csv << "comm_bits_per_msg," << fmt(r.comm_bits_gc) << ',' << fmt(r.comm_bits_rsa) << ','
        << fmt(r.comm_bits_ecc) << '\n';
    csv << "advantage_sym_refresh,," << fmt(r.advantage_sym_refresh_rsa) << ','
        << fmt(r.advantage_sym_refresh_ecc) << '\n';
    csv << "advantage_pke_refresh,," << fmt(r.advantage_pke_refresh_rsa) << ','
        << fmt(r.advantage_pke_refresh_ecc) << '\n';
    csv << "crossover_hops,," << fmt(r.crossover_hops_rsa) << ',' << fmt(r.crossover_hops_ecc)
        << '\n';
    return csv.str();
}

// Expected single-snapshot breach over the empirical shortest-path-length
// distribution of the configured torus: a path of d hops has d - 1
// coin-flipping relays before the interception point.
double torus_default_f1(const sim::SimConfig& cfg) {
    const sim::GridTopology topo = sim::GridTopology::build(cfg.n);
    std::vector<long> counts(topo.max_distance() + 1, 0);
    long pairs = 0;
    for (int a = 0; a < topo.n(); ++a) {
        for (int b = 0; b < topo.n(); ++b) {
            if (a == b) continue;
            ++counts[topo.distance(static_cast<protocol::NodeId>(a),
                                   static_cast<protocol::NodeId>(b))];
            ++pairs;
        }
    }
    const double p0 = analysis::prob_relay_compromised(cfg.model());
    double f1 = 0.0;
    for (int d = 1; d < static_cast<int>(counts.size()); ++d) {
        if (counts[d] == 0) continue;
        const double prob = static_cast<double>(counts[d]) / static_cast<double>(pairs);
        f1 += prob * (1.0 - analysis::success_from_p0(p0, d - 1, cfg.q));
    }
    return f1;
}

// Experiment sizes for the figure batch; shrinkable for smoke runs.
struct FigureScale {
    int runs = 20;
    int trials = 2000;
    int spacing = 5;
    long blocks = 6000;
    int k_max = 5;
    double breach_epoch_dt = 240.0;
};

sim::SimConfig figure_sim_config(const sim::SimConfig& base, std::uint64_t run_seed) {
    sim::SimConfig cfg = base;
    // The figure set quantifies agreement with the closed-form model, whose
    // targeting process is uniform random choice.
    cfg.strategy = sim::SimConfig::Strategy::Uniform;
    cfg.sink_mode = sim::SimConfig::SinkMode::Uniform;
    cfg.seed = run_seed;
    return cfg;
}

std::string render_fig3(const sim::SimConfig& base) {
    std::ostringstream csv;
    csv << "tau,i,pi\n";
    for (double tau : {0.6, 1.0, 1.5}) {
        const auto pi = analysis::stationary({base.n, base.lambda, tau});
        for (std::size_t i = 0; i < pi.size(); ++i)
            csv << fmt(tau) << ',' << i << ',' << fmt(pi[i]) << '\n';
    }
    return csv.str();
}

std::string render_fig4(const sim::SimConfig& base) {
    const auto pi = analysis::stationary(base.model());
    const Rng master(base.seed);
    std::vector<std::vector<double>> runs;
    for (int r = 0; r < 4; ++r) {
        sim::SimConfig cfg = figure_sim_config(base, master.split(2000 + r).seed());
        const sim::SimMetrics m = sim::run(cfg);
        std::vector<double> freq(pi.size());
        const double total = static_cast<double>(cfg.transitions - cfg.burn_in);
        for (std::size_t i = 0; i < pi.size(); ++i) freq[i] = m.state_histogram[i] / total;
        runs.push_back(std::move(freq));
    }
    std::ostringstream csv;
    csv << "i,pi_analytical,run1,run2,run3,run4\n";
    for (std::size_t i = 0; i < pi.size(); ++i) {
        csv << i << ',' << fmt(pi[i]);
        for (const auto& r : runs) csv << ',' << fmt(r[i]);
        csv << '\n';
    }
    return csv.str();
}

std::string render_fig5(const sim::SimConfig& base, const FigureScale& scale) {
    const std::vector<double> qs{0.5, 0.6, 0.7, 0.8, 0.9};
    sim::SimConfig cfg = figure_sim_config(base, base.seed);
    const auto estimates =
        sim::measure_success(cfg, 6, qs, scale.runs, scale.trials, scale.spacing);
    std::ostringstream csv;
    csv << "q,analytical,median,q025,q975\n";
    for (const auto& e : estimates)
        csv << fmt(e.q) << ',' << fmt(e.analytical) << ',' << fmt(e.median) << ',' << fmt(e.lo)
            << ',' << fmt(e.hi) << '\n';
    return csv.str();
}

std::string render_fig6(const sim::SimConfig& base, const FigureScale& scale, double f1) {
    sim::SimConfig cfg = figure_sim_config(base, base.seed);
    cfg.q = 0.5;
    cfg.delta = 0.0;  // reporter traffic is irrelevant to the breach statistic
    const sim::GridTopology topo = sim::GridTopology::build(cfg.n);
    const protocol::NodeId source = 0;
    const protocol::NodeId collector = topo.id_at(2, 1);  // torus distance 3
    const auto est = sim::measure_breach(cfg, source, collector, scale.k_max, scale.blocks,
                                         scale.breach_epoch_dt);
    std::ostringstream csv;
    csv << "k,f_sim,f_analytic\n";
    for (int k = 1; k <= scale.k_max; ++k)
        csv << k << ',' << fmt(est.f_hat[k]) << ',' << fmt(analysis::breach_probability(f1, k))
            << '\n';
    return csv.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "GossiCrypt: probabilistic en-route re-encryption for sensor-to-sink "
        "confidentiality, with its birth-death analysis, energy comparison, and "
        "discrete-event simulator"};
    app.require_subcommand(1);

    // stationary
    int st_n = 100;
    double st_lambda = 1.0, st_tau = 1.5, st_epsilon = 1.0;
    std::string st_out;
    auto* stationary_cmd = app.add_subcommand(
        "stationary", "stationary distribution of the correct-node count (CSV: i,pi)");
    stationary_cmd->add_option("--n", st_n, "node count");
    stationary_cmd->add_option("--lambda", st_lambda, "refresh intensity");
    stationary_cmd->add_option("--tau", st_tau, "mean inter-compromise time");
    stationary_cmd->add_option("--epsilon", st_epsilon,
                               "effective refresh-rate discount for raw-variant refreshing");
    stationary_cmd->add_option("--out", st_out, "output file (default stdout)");

    // table1
    int t1_n = 100;
    double t1_lambda = 1.0, t1_tau = 1.5;
    std::string t1_out;
    auto* table1_cmd = app.add_subcommand(
        "table1",
        "success probability grid, L in 5..12 x q in 0.5..0.9 (CSV: L,q,p_success,flag)");
    table1_cmd->add_option("--n", t1_n, "node count");
    table1_cmd->add_option("--lambda", t1_lambda, "refresh intensity");
    table1_cmd->add_option("--tau", t1_tau, "mean inter-compromise time");
    table1_cmd->add_option("--out", t1_out, "output file (default stdout)");

    // success
    int su_l = 6;
    double su_q = 0.7;
    int su_n = 100;
    double su_lambda = 1.0, su_tau = 1.5;
    bool su_literal = false;
    std::string su_out;
    auto* success_cmd =
        app.add_subcommand("success", "closed-form success probability (CSV: L,q,p_success)");
    success_cmd->add_option("--l", su_l, "path length (flipping relays)")->required();
    success_cmd->add_option("--q", su_q, "re-encryption probability")->required();
    success_cmd->add_option("--n", su_n, "node count");
    success_cmd->add_option("--lambda", su_lambda, "refresh intensity");
    success_cmd->add_option("--tau", su_tau, "mean inter-compromise time");
    success_cmd->add_flag("--eq4-literal", su_literal,
                          "evaluate the printed sum that omits the no-re-encryption term");
    success_cmd->add_option("--out", su_out, "output file (default stdout)");

    // breach
    std::optional<double> br_f1;
    bool br_simulate = false;
    long br_blocks = 6000;
    double br_epoch_dt = 240.0;
    std::string br_out;
    SimFlags br_flags;
    auto* breach_cmd = app.add_subcommand(
        "breach",
        "k-snapshot breach probability: analytic f1^k (CSV: k,breach) or simulated "
        "(CSV: k,f_sim,f_analytic)");
    breach_cmd->add_option("--f1", br_f1,
                           "single-snapshot breach probability (default: expected over the "
                           "torus shortest-path-length distribution)");
    breach_cmd->add_flag("--simulate", br_simulate, "estimate f-hat(k) from the simulator");
    breach_cmd->add_option("--blocks", br_blocks, "simulated trial blocks");
    breach_cmd->add_option("--breach-epoch-dt", br_epoch_dt,
                           "simulated time between consecutive snapshots");
    breach_cmd->add_option("--out", br_out, "output file (default stdout)");
    br_flags.add_to(breach_cmd);

    // energy
    int en_n = 100;
    double en_q = 0.5, en_hops = 6.0;
    std::string en_out;
    auto* energy_cmd = app.add_subcommand(
        "energy",
        "energy comparison against per-message PKE (CSV: metric,gossicrypt,pke_rsa,pke_ecc)");
    energy_cmd->add_option("--n", en_n, "node count")->required();
    energy_cmd->add_option("--q", en_q, "re-encryption probability")->required();
    energy_cmd->add_option("--hops", en_hops, "path length in hops")->required();
    energy_cmd->add_option("--out", en_out, "output file (default stdout)");

    // simulate
    SimFlags sim_flags;
    std::string sim_out, sim_intercept_csv;
    auto* simulate_cmd =
        app.add_subcommand("simulate", "full discrete-event run; emits metrics as JSON");
    sim_flags.add_to(simulate_cmd);
    simulate_cmd->add_option("--out", sim_out, "output file (default stdout)");
    simulate_cmd->add_option(
        "--intercept-csv", sim_intercept_csv,
        "also export the adversary intercept log (CSV: time,wire_hex,decrypted)");

    // figures
    SimFlags fig_flags;
    std::string fig_outdir;
    FigureScale fig_scale;
    double fig_f1 = 0.1742;
    auto* figures_cmd = app.add_subcommand(
        "figures",
        "emit fig3_stationary.csv, fig4_empirical.csv, fig5_success.csv, fig6_breach.csv");
    figures_cmd->add_option("--outdir", fig_outdir, "output directory")->required();
    fig_flags.add_to(figures_cmd);
    figures_cmd->add_option("--runs", fig_scale.runs, "independent runs for fig5");
    figures_cmd->add_option("--trials", fig_scale.trials, "path samples per run for fig5");
    figures_cmd->add_option("--blocks", fig_scale.blocks, "trial blocks for fig6");
    figures_cmd->add_option("--kmax", fig_scale.k_max, "snapshot horizon for fig6");
    figures_cmd->add_option("--breach-epoch-dt", fig_scale.breach_epoch_dt,
                            "simulated time between fig6 snapshots");
    figures_cmd->add_option("--f1", fig_f1, "analytic single-snapshot breach for fig6");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (*stationary_cmd) {
            if (st_n < 1 || !(st_lambda > 0.0) || !(st_tau > 0.0) || !(st_epsilon > 0.0) ||
                st_epsilon > 1.0)
                throw ConfigError("stationary: n >= 1, lambda > 0, tau > 0, epsilon in (0,1]");
            write_output(st_out, render_stationary(st_n, st_lambda, st_tau, st_epsilon));
        } else if (*table1_cmd) {
            if (t1_n < 1 || !(t1_lambda > 0.0) || !(t1_tau > 0.0))
                throw ConfigError("table1: n >= 1, lambda > 0, tau > 0");
            write_output(t1_out, render_table1(t1_n, t1_lambda, t1_tau));
        } else if (*success_cmd) {
            if (su_l < 1 || !(su_q > 0.0) || !(su_q < 1.0))
                throw ConfigError("success: l >= 1 and q in (0,1)");
            const double p =
                analysis::success_probability({su_n, su_lambda, su_tau}, su_l, su_q, su_literal);
            std::ostringstream csv;
            csv << "L,q,p_success\n" << su_l << ',' << fmt(su_q) << ',' << fmt(p) << '\n';
            write_output(su_out, csv.str());
        } else if (*breach_cmd) {
            std::ostringstream csv;
            const sim::SimConfig cfg = br_flags.resolve();
            const int br_k = cfg.k;
            if (br_k < 1) throw ConfigError("breach: k must be >= 1");
            const double f1 = br_f1 ? *br_f1 : torus_default_f1(cfg);
            if (br_f1 && (*br_f1 < 0.0 || *br_f1 > 1.0))
                throw ConfigError("breach: f1 must be in [0,1]");
            if (br_simulate) {
                sim::SimConfig sim_cfg = cfg;
                sim_cfg.delta = 0.0;
                const sim::GridTopology topo = sim::GridTopology::build(sim_cfg.n);
                const protocol::NodeId source = 0;
                const protocol::NodeId collector = topo.id_at(2, 1);
                const auto est =
                    sim::measure_breach(sim_cfg, source, collector, br_k, br_blocks, br_epoch_dt);
                csv << "k,f_sim,f_analytic\n";
                for (int k = 1; k <= br_k; ++k)
                    csv << k << ',' << fmt(est.f_hat[k]) << ','
                        << fmt(analysis::breach_probability(f1, k)) << '\n';
            } else {
                csv << "k,breach\n";
                for (int k = 1; k <= br_k; ++k)
                    csv << k << ',' << fmt(analysis::breach_probability(f1, k)) << '\n';
            }
            write_output(br_out, csv.str());
        } else if (*energy_cmd) {
            if (en_n < 1 || !(en_q > 0.0) || en_q > 1.0 || en_hops < 0.0)
                throw ConfigError("energy: n >= 1, q in (0,1], hops >= 0");
            write_output(en_out, render_energy(en_n, en_q, en_hops));
        } else if (*simulate_cmd) {
            const sim::SimConfig cfg = sim_flags.resolve();
            sim::Simulation s(cfg);
            const sim::SimMetrics m = sim::run_collect(s);
            write_output(sim_out, metrics_to_json(cfg, m).dump(2) + "\n");
            if (!sim_intercept_csv.empty()) {
                std::ostringstream csv;
                csv << "time,wire_hex,decrypted\n";
                for (const auto& rec : s.adversary_state().intercept_log)
                    csv << fmt(rec.time) << ',' << to_hex(rec.wire) << ','
                        << (rec.decrypted ? 1 : 0) << '\n';
                write_output(sim_intercept_csv, csv.str());
            }
        } else if (*figures_cmd) {
            const sim::SimConfig base = fig_flags.resolve();
            std::filesystem::create_directories(fig_outdir);
            const auto dir = std::filesystem::path(fig_outdir);
            write_output((dir / "fig3_stationary.csv").string(), render_fig3(base));
            write_output((dir / "fig4_empirical.csv").string(), render_fig4(base));
            write_output((dir / "fig5_success.csv").string(), render_fig5(base, fig_scale));
            write_output((dir / "fig6_breach.csv").string(), render_fig6(base, fig_scale, fig_f1));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
