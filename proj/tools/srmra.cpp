// Command-line front end: generate data, compute invariants, run EM, inspect
// orbits and identifiability, and run the experiment harnesses.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "srmra/em.hpp"
#include "srmra/errors.hpp"
#include "srmra/experiments.hpp"
#include "srmra/identifiability.hpp"
#include "srmra/invariants.hpp"
#include "srmra/io.hpp"
#include "srmra/orbit.hpp"
#include "srmra/prior.hpp"
#include "srmra/signal.hpp"
#include "srmra/tables.hpp"

namespace fs = std::filesystem;
using namespace srmra;
using io::Json;

namespace {

// JSON report to --output, or stdout when no path was given.
void emit(const std::string& output, const Json& report) {
    if (output.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        io::write_json(output, report);
    }
}

// A prior file, or one of the keywords "flat" / "inverse_frequency".
PriorSpec resolve_prior(const std::string& spec, int M) {
    if (spec == "flat") {
        return PriorSpec::circulant(flat_profile(M));
    }
    if (spec == "inverse_frequency") {
        return PriorSpec::circulant(inverse_frequency_profile(M));
    }
    PriorSpec prior = io::read_prior(spec);
    require(prior.dimension() == M, "prior dimension " + std::to_string(prior.dimension()) + " differs from M = " +
                                        std::to_string(M));
    return prior;
}

struct Common {
    std::uint64_t seed = 0;
    std::string output;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--output,-o", c.output, "Output path (stdout when omitted)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Super-resolution multi-reference alignment toolkit"};
    app.require_subcommand(1);

    // generate
    Common gen_c;
    int gen_M = 0;
    int gen_L = 0;
    int gen_N = 100;
    double gen_sigma = 0.0;
    std::optional<double> gen_snr;
    std::optional<int> gen_B;
    std::string gen_signal;
    std::string gen_prior = "inverse_frequency";
    std::string gen_truth_out;
    auto* gen = app.add_subcommand("generate", "Draw a signal (or read one) and simulate an observation batch");
    add_common(gen, gen_c);
    gen->add_option("--M", gen_M, "Signal length (taken from --signal when given)");
    gen->add_option("--L", gen_L, "Samples per observation")->required();
    gen->add_option("--N", gen_N, "Number of observations");
    auto* sigma_opt = gen->add_option("--sigma", gen_sigma, "Noise standard deviation");
    gen->add_option("--snr", gen_snr, "SNR = ||x||^2 / (M sigma^2); replaces --sigma")->excludes(sigma_opt);
    gen->add_option("--bandlimit", gen_B, "Draw a random signal with frequencies |k| <= B");
    gen->add_option("--signal", gen_signal, "Signal file (.csv or .json) instead of a random draw");
    gen->add_option("--prior", gen_prior, "Prior for the random draw: flat, inverse_frequency or a prior file");
    gen->add_option("--truth-out", gen_truth_out, "Also write the signal here");
    bool gen_all_shifts = false;
    gen->add_flag("--all-shifts", gen_all_shifts, "One observation per shift 0..M-1 (ignores --N)");

    // invariants
    Common inv_c;
    std::string inv_input;
    bool inv_debias = false;
    std::string inv_ps_csv;
    auto* inv = app.add_subcommand("invariants", "Empirical mean, power spectrum and bispectrum of a batch");
    add_common(inv, inv_c);
    std::string inv_signal;
    int inv_L = 0;
    auto* inv_in = inv->add_option("--input,-i", inv_input, "Batch file (.json)");
    auto* inv_sig = inv->add_option("--signal", inv_signal, "Mixed invariants of this signal instead (needs --L)");
    inv_in->excludes(inv_sig);
    inv->add_option("--L", inv_L, "Samples per observation for --signal");
    inv->add_flag("--debias", inv_debias, "Subtract the noise bias terms");
    inv->add_option("--power-spectrum-csv", inv_ps_csv, "Write the power spectrum table here");

    // estimate
    Common est_c;
    std::string est_input;
    std::string est_prior = "inverse_frequency";
    EMConfig est_cfg;
    std::optional<int> est_B;
    std::string est_csv;
    std::optional<int> est_M;
    std::optional<double> est_sigma;
    auto* est = app.add_subcommand("estimate", "Run EM on a batch");
    add_common(est, est_c);
    est->add_option("--input,-i", est_input, "Batch file (.json, or .csv with --M and --sigma)")->required();
    est->add_option("--M", est_M, "Signal length for CSV batches");
    est->add_option("--sigma", est_sigma, "Noise level for CSV batches");
    est->add_option("--prior", est_prior, "flat, inverse_frequency or a prior file");
    est->add_option("--tol", est_cfg.tol, "Relative log-posterior change that stops EM");
    est->add_option("--max-iter", est_cfg.max_iter, "Iteration cap per restart");
    est->add_option("--restarts", est_cfg.restarts, "Random initializations");
    est->add_option("--bandlimit", est_B, "Project every iterate onto |k| <= B");
    est->add_option("--csv", est_csv, "Write the estimate as one CSV row");

    // orbit
    Common orb_c;
    std::string orb_signal;
    int orb_L = 0;
    std::string orb_prior = "inverse_frequency";
    std::uint64_t orb_budget = default_orbit_budget;
    auto* orb = app.add_subcommand("orbit", "Pick the orbit member that minimizes the prior quadratic form");
    add_common(orb, orb_c);
    orb->add_option("--signal", orb_signal, "Signal file (.csv or .json)")->required();
    orb->add_option("--L", orb_L, "Samples per observation")->required();
    orb->add_option("--prior", orb_prior, "flat, inverse_frequency or a prior file");
    orb->add_option("--budget", orb_budget, "Largest orbit to enumerate");

    // identifiability
    Common id_c;
    std::vector<int> id_L;
    std::vector<int> id_K;
    int id_trials = 3;
    double id_tol = 1e-8;
    std::string id_csv;
    auto* ident = app.add_subcommand("identifiability", "Jacobian rank test against the parameter-count bound");
    add_common(ident, id_c);
    ident->add_option("--L", id_L, "One or more L values")->required();
    ident->add_option("--K", id_K, "One or more K values")->required();
    ident->add_option("--trials", id_trials, "Random points per (L, K)");
    ident->add_option("--tol", id_tol, "Relative singular-value threshold");
    ident->add_option("--csv", id_csv, "Write the identifiability table here");

    // experiment
    Common exp_c;
    std::string exp_config;
    std::optional<int> exp_id;
    std::string exp_regime;
    std::vector<std::string> exp_set;
    std::optional<double> exp_scale;
    auto* exp = app.add_subcommand("experiment", "Run one of the three experiments and write its tables");
    exp->add_option("--seed", exp_c.seed, "Random seed");
    exp->add_option("--output,-o", exp_c.output, "Output directory")->required();
    exp->add_option("--config,-c", exp_config, "key = value config file");
    exp->add_option("--id", exp_id, "Experiment 1, 2 or 3 (overrides the file)");
    exp->add_option("--regime", exp_regime, "high or low (experiment 2)");
    exp->add_option("--set", exp_set, "Override a config key: key=value (repeatable)");
    exp->add_option("--scale", exp_scale, "scale_factor for N and trials");

    // recover
    Common rec_c;
    std::string rec_input;
    auto* rec = app.add_subcommand("recover", "Noiseless orbit recovery: group rows into sub-signal classes");
    add_common(rec, rec_c);
    rec->add_option("--input,-i", rec_input, "Noise-free batch file (.json)")->required();

    // coupon
    Common cc_c;
    int cc_K = 10;
    int cc_runs = 10000;
    auto* coupon = app.add_subcommand("coupon", "Simulate draws until every sub-signal has been seen");
    add_common(coupon, cc_c);
    coupon->add_option("--K", cc_K, "Number of sub-signals");
    coupon->add_option("--runs", cc_runs, "Simulated runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            Rng rng = make_stream(gen_c.seed, 0);
            HighResSignal x;
            if (!gen_signal.empty()) {
                x = io::read_signal(gen_signal);
            } else {
                require(gen_M >= 1, "--M is required without --signal");
                x = gen_B ? sample_bandlimited_signal(gen_M, *gen_B, rng)
                          : sample_prior(resolve_prior(gen_prior, gen_M), gen_M, rng);
            }
            ModelParams params{x.size(), gen_L, gen_sigma, gen_N, derive_seed(gen_c.seed, 1)};
            if (gen_snr) {
                require(*gen_snr > 0, "--snr must be positive");
                params.sigma = std::sqrt(x.values().squaredNorm() / (x.size() * *gen_snr));
            }
            ObservationBatch batch;
            if (gen_all_shifts) {
                params.N = x.size();
                params.validate();
                batch.params = params;
                batch.samples.resize(params.N, params.L);
                std::vector<int> shifts(params.N);
                for (int s = 0; s < params.N; ++s) {
                    batch.samples.row(s) = sample_grid(x.values(), params.L, s).transpose();
                    shifts[s] = s;
                }
                if (params.sigma > 0) {
                    Rng noise = make_stream(params.seed, 0);
                    std::normal_distribution<double> gauss(0.0, params.sigma);
                    for (auto& v : batch.samples.reshaped()) {
                        v += gauss(noise);
                    }
                }
                batch.true_shifts = shifts;
            } else {
                batch = generate_batch(x, params);
            }
            if (gen_c.output.empty()) {
                std::cout << io::to_json(batch).dump() << "\n";
            } else {
                io::write_batch(gen_c.output, batch);
            }
            if (!gen_truth_out.empty()) {
                io::write_signal(gen_truth_out, x);
            }
        } else if (*inv && !inv_signal.empty()) {
            const HighResSignal x = io::read_signal(inv_signal);
            require(inv_L >= 1, "--signal needs --L");
            const InvariantTriple t = mixed_invariants(decompose(x, inv_L).subs);
            emit(inv_c.output, io::to_json(t));
            if (!inv_ps_csv.empty()) {
                io::write_power_spectrum_csv(inv_ps_csv, t);
            }
        } else if (*inv) {
            require(!inv_input.empty(), "invariants needs --input or --signal");
            const ObservationBatch batch = io::read_batch(inv_input);
            InvariantTriple t = empirical_invariants(batch);
            if (inv_debias) {
                t = debias(t, batch.params.sigma, batch.L());
            }
            Json report = io::to_json(t);
            report["N"] = batch.N();
            report["debiased"] = inv_debias;
            emit(inv_c.output, report);
            if (!inv_ps_csv.empty()) {
                io::write_power_spectrum_csv(inv_ps_csv, t);
            }
        } else if (*est) {
            ObservationBatch batch;
            if (fs::path(est_input).extension() == ".json") {
                batch = io::read_batch(est_input);
            } else {
                require(est_M.has_value() && est_sigma.has_value(), "CSV batches need --M and --sigma");
                ModelParams params{*est_M, 1, *est_sigma, 1, 0};
                batch = io::read_batch(est_input, &params);
            }
            est_cfg.seed = est_c.seed;
            est_cfg.bandlimit = est_B;
            const EMResult result = run_em(batch, resolve_prior(est_prior, batch.params.M), est_cfg);
            emit(est_c.output, io::to_json(result));
            if (!est_csv.empty()) {
                io::write_signal(est_csv, result.estimate);
            }
        } else if (*orb) {
            const HighResSignal x = io::read_signal(orb_signal);
            const OrbitSelection sel = orbit_select_map(x, orb_L, resolve_prior(orb_prior, x.size()), orb_budget);
            Json report = {{"orbit_size", sel.orbit_size},
                           {"min_value", sel.value},
                           {"runner_up", sel.runner_up},
                           {"unique", sel.unique},
                           {"perm", sel.element.perm},
                           {"shifts", sel.element.shifts},
                           {"best", io::to_json(sel.best)}};
            emit(orb_c.output, report);
        } else if (*ident) {
            std::vector<RankTestResult> rows;
            Json reports = Json::array();
            for (int L : id_L) {
                for (int K : id_K) {
                    const RankTestResult r = jacobian_rank_test(L, K, id_trials, id_tol, id_c.seed);
                    rows.push_back(r);
                    reports.push_back({{"L", r.L},
                                       {"K", r.K},
                                       {"P_of_L", r.bound.value()},
                                       {"rank", r.rank},
                                       {"parameters", r.parameters},
                                       {"identifiable", r.identifiable}});
                }
            }
            emit(id_c.output, reports.size() == 1 ? reports[0] : reports);
            if (!id_csv.empty()) {
                io::write_text(id_csv, tables::identifiability_csv(rows));
            }
        } else if (*exp) {
            std::map<std::string, std::string> settings;
            if (!exp_config.empty()) {
                std::ifstream in(exp_config);
                if (!in) {
                    throw ConfigError("cannot open config file " + exp_config);
                }
                settings = parse_settings(in, exp_config);
            }
            std::map<std::string, std::string> overrides;
            for (const auto& kv : exp_set) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw ConfigError("--set expects key=value, got '" + kv + "'");
                }
                overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            if (exp_id) {
                overrides["experiment"] = std::to_string(*exp_id);
            }
            if (!exp_regime.empty()) {
                overrides["regime"] = exp_regime;
            }
            if (exp->count("--seed") > 0) {
                overrides["seed"] = std::to_string(exp_c.seed);
            }
            if (exp_scale) {
                overrides["scale_factor"] = io::format_double(*exp_scale);
            }
            const ExperimentConfig config = load_experiment_config(settings, overrides);
            const ExperimentOutput out = run_experiment(config);
            for (const auto& path : tables::write_experiment(exp_c.output, out)) {
                std::cout << path.string() << "\n";
            }
        } else if (*rec) {
            const NoiselessRecovery r = recover_orbit_noiseless(io::read_batch(rec_input));
            Json reps = Json::array();
            for (const auto& v : r.representatives) {
                reps.push_back(std::vector<double>(v.begin(), v.end()));
            }
            emit(rec_c.output, {{"complete", r.complete},
                                {"classes", r.representatives.size()},
                                {"representatives", reps},
                                {"class_of_row", r.cluster_of_row}});
        } else if (*coupon) {
            require(cc_K >= 1 && cc_runs >= 1, "--K and --runs must be positive");
            const std::vector<int> draws = simulate_coupon_collector(cc_K, cc_runs, cc_c.seed);
            const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
            emit(cc_c.output, {{"K", cc_K},
                               {"runs", cc_runs},
                               {"mean_draws", mean},
                               {"expected", coupon_collector_expectation(cc_K)}});
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
