#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace srmra {

enum class PriorKind { flat, inverse_frequency };

/// Settings for one experiment run. Built from experiment_defaults() and then
/// overridden key by key (see apply_setting for the key names).
struct ExperimentConfig {
    int experiment_id = 1;
    std::string regime;  // "high" or "low" for experiment 2, empty otherwise
    int M = 120;
    int L = 15;
    std::vector<int> L_sweep;  // experiment 3 only
    int B = 15;                // bandlimit; 0 disables projection
    std::vector<double> snr{1.0};
    int N = 10'000;
    int trials = 1;
    int restarts = 5;
    int max_iter = 100;
    double tol = 1e-5;
    PriorKind prior = PriorKind::flat;
    std::uint64_t seed = 0;
    double scale_factor = 1.0;
    unsigned threads = 0;

    /// N and trials after scale_factor (never below one).
    int scaled_N() const;
    int scaled_trials() const;
    /// The L values this run visits: L_sweep for experiment 3, {L} otherwise.
    std::vector<int> grid_L() const;

    void validate() const;
};

/// Desk-scale defaults. Experiment 2 needs regime "high" or "low".
ExperimentConfig experiment_defaults(int experiment_id, const std::string& regime = "");

/// `count` values 10^lo ... 10^hi, evenly spaced in the exponent.
std::vector<double> log_spaced(double lo_exponent, double hi_exponent, int count);

/// Sets one key from its text value. Throws ConfigError on unknown keys or
/// malformed values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// key = value lines; '#' starts a comment; lists are comma separated.
std::map<std::string, std::string> parse_settings(std::istream& in, const std::string& source = "<config>");

/// Defaults for the file's experiment/regime keys followed by every other key,
/// then `overrides` (applied last, same grammar).
ExperimentConfig load_experiment_config(const std::map<std::string, std::string>& settings,
                                        const std::map<std::string, std::string>& overrides = {});

nlohmann::json to_json(const ExperimentConfig& config);

struct ResultRow {
    int experiment_id = 0;
    int trial = 0;
    double snr = 0.0;
    int M = 0;
    int L = 0;
    int N = 0;
    double relative_error = 0.0;
    int iterations = 0;
    bool converged = false;
    double wall_time_seconds = 0.0;
};

struct PerFrequencyRow {
    int trial = 0;
    int k = 0;
    std::optional<double> em_error;
    std::optional<double> lowpass_error;
};

struct OverlayRow {
    int trial = 0;
    int index = 0;
    double truth = 0.0;
    double lowpass = 0.0;
    double estimate = 0.0;
};

struct SnrSummary {
    double snr = 0.0;
    double median_error = 0.0;
    int trials = 0;
};

struct LSummary {
    int M = 0;
    int L = 0;
    double mean_error = 0.0;
    int trials = 0;
};

struct ExperimentOutput {
    ExperimentConfig config;
    std::vector<ResultRow> rows;  // sorted by (snr, L, trial)
    std::vector<PerFrequencyRow> per_frequency;
    std::vector<OverlayRow> overlay;
    std::vector<SnrSummary> snr_curve;
    std::vector<LSummary> error_vs_L;
    std::optional<double> slope;        // experiment 2: log10 error vs log10 snr
    std::optional<double> l_marker;     // experiment 3: M^{2/3}
    std::optional<double> high_frequency_error;           // experiment 1, mean over L/2 < k <= B
    std::optional<double> baseline_high_frequency_error;  // same for the low-passed truth
    double wall_time_seconds = 0.0;
};

ExperimentOutput run_experiment_1(const ExperimentConfig& config);
ExperimentOutput run_experiment_2(const ExperimentConfig& config);
ExperimentOutput run_experiment_3(const ExperimentConfig& config);
ExperimentOutput run_experiment(const ExperimentConfig& config);

double median(std::vector<double> values);
/// Least-squares slope of log10(y) against log10(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace srmra
