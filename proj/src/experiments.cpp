#include "srmra/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "srmra/em.hpp"
#include "srmra/errors.hpp"
#include "srmra/parallel.hpp"
#include "srmra/prior.hpp"
#include "srmra/signal.hpp"

namespace srmra {

namespace {

using Clock = std::chrono::steady_clock;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("bad value for '" + key + "': '" + text + "'");
    }
    return value;
}

std::vector<int> divisors(int M) {
    std::vector<int> out;
    for (int d = 2; d <= M; ++d) {
        if (M % d == 0) {
            out.push_back(d);
        }
    }
    return out;
}

std::uint64_t task_seed(std::uint64_t seed, std::uint64_t purpose, int trial, int point) {
    return derive_seed(derive_seed(derive_seed(seed, purpose), static_cast<std::uint64_t>(trial)),
                       static_cast<std::uint64_t>(point));
}

// Prior used both to draw the truth (experiments 2, 3) and by EM.
PriorSpec experiment_prior(const ExperimentConfig& c) {
    if (c.prior == PriorKind::inverse_frequency) {
        return PriorSpec::circulant(inverse_frequency_profile(c.M));
    }
    if (c.B > 0) {
        // Expected energy M spread evenly over the 2B+1 in-band frequencies.
        return PriorSpec::circulant(Vector::Constant(c.M, static_cast<double>(c.M) / (2 * c.B + 1)));
    }
    return PriorSpec::circulant(flat_profile(c.M));
}

HighResSignal draw_truth(const ExperimentConfig& c, const PriorSpec& prior, int trial) {
    Rng rng = make_stream(derive_seed(c.seed, 1), static_cast<std::uint64_t>(trial));
    if (c.experiment_id == 1) {
        return sample_bandlimited_signal(c.M, c.B, rng);
    }
    return sample_prior(prior, c.M, rng);
}

struct TaskResult {
    ResultRow row;
    HighResSignal truth;
    HighResSignal estimate;
};

TaskResult run_task(const ExperimentConfig& c, const PriorSpec& prior, int trial, int point, double snr, int L,
                    unsigned em_threads) {
    const auto start = Clock::now();
    const HighResSignal truth = draw_truth(c, prior, trial);
    const double sigma = std::sqrt(truth.values().squaredNorm() / (c.M * snr));

    ModelParams params{c.M, L, sigma, c.scaled_N(), task_seed(c.seed, 2, trial, point)};
    const ObservationBatch batch = generate_batch(truth, params);

    EMConfig em;
    em.tol = c.tol;
    em.max_iter = c.max_iter;
    em.restarts = c.restarts;
    em.seed = task_seed(c.seed, 3, trial, point);
    em.threads = em_threads;
    if (c.B > 0) {
        em.bandlimit = c.B;
    }
    const EMResult result = run_em(batch, prior, em);

    TaskResult out{{}, truth, result.estimate};
    out.row.experiment_id = c.experiment_id;
    out.row.trial = trial;
    out.row.snr = snr;
    out.row.M = c.M;
    out.row.L = L;
    out.row.N = params.N;
    out.row.relative_error = relative_error(result.estimate, truth).error;
    out.row.iterations = result.iterations;
    out.row.converged = result.converged;
    out.row.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

struct Task {
    int trial;
    int point;
    double snr;
    int L;
};

std::vector<TaskResult> run_tasks(const ExperimentConfig& c, const std::vector<Task>& tasks) {
    const PriorSpec prior = experiment_prior(c);
    const unsigned workers = c.threads == 0 ? worker_count() : c.threads;
    // Parallelize over tasks when there are enough of them, else over restarts.
    const unsigned task_threads = tasks.size() >= workers ? workers : 1;
    const unsigned em_threads = task_threads == 1 ? workers : 1;
    std::vector<TaskResult> results(tasks.size());
    parallel_for(
        tasks.size(),
        [&](std::size_t i) {
            const Task& t = tasks[i];
            results[i] = run_task(c, prior, t.trial, t.point, t.snr, t.L, em_threads);
        },
        task_threads);
    std::sort(results.begin(), results.end(), [](const TaskResult& a, const TaskResult& b) {
        return std::tie(a.row.snr, a.row.L, a.row.trial) < std::tie(b.row.snr, b.row.L, b.row.trial);
    });
    return results;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int ExperimentConfig::scaled_N() const {
    return std::max(1, static_cast<int>(std::lround(N * scale_factor)));
}

int ExperimentConfig::scaled_trials() const {
    return std::max(1, static_cast<int>(std::lround(trials * scale_factor)));
}

std::vector<int> ExperimentConfig::grid_L() const {
    if (experiment_id == 3) {
        return L_sweep;
    }
    return {L};
}

void ExperimentConfig::validate() const {
    require(experiment_id >= 1 && experiment_id <= 3, "experiment must be 1, 2 or 3");
    require(M >= 1, "M must be positive");
    require(!snr.empty(), "snr list is empty");
    for (double s : snr) {
        require(std::isfinite(s) && s > 0.0, "snr values must be positive");
    }
    require(N >= 1 && trials >= 1 && restarts >= 1 && max_iter >= 1, "N, trials, restarts, max_iter must be >= 1");
    require(tol > 0.0, "tol must be positive");
    require(std::isfinite(scale_factor) && scale_factor > 0.0, "scale_factor must be positive");
    require(B >= 0 && B <= M / 2, "B must lie in [0, M/2]");
    require(experiment_id != 3 || !L_sweep.empty(), "L_sweep is empty");
    for (int l : grid_L()) {
        require(l >= 1 && M % l == 0, "L = " + std::to_string(l) + " does not divide M = " + std::to_string(M));
    }
    if (experiment_id == 1) {
        require(B >= 1, "experiment 1 needs a bandlimit B >= 1");
    }
}

std::vector<double> log_spaced(double lo_exponent, double hi_exponent, int count) {
    require(count >= 1, "log_spaced needs at least one point");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(std::pow(10.0, lo_exponent + t * (hi_exponent - lo_exponent)));
    }
    return out;
}

ExperimentConfig experiment_defaults(int experiment_id, const std::string& regime) {
    ExperimentConfig c;
    c.experiment_id = experiment_id;
    switch (experiment_id) {
    case 1:
        require(regime.empty(), "experiment 1 has no regime");
        break;
    case 2:
        c.regime = regime;
        c.B = 0;
        c.prior = PriorKind::inverse_frequency;
        if (regime == "high") {
            c.M = 64;
            c.L = 32;
            c.snr = log_spaced(0.2, 2.0, 8);
            c.N = 100;
            c.trials = 10;
            c.restarts = 100;
        } else if (regime == "low") {
            c.M = 32;
            c.L = 16;
            c.snr = log_spaced(-0.6, 0.0, 3);
            c.N = 20'000;
            c.trials = 5;
            c.restarts = 10;
        } else {
            throw ConfigError("experiment 2 needs regime 'high' or 'low'");
        }
        break;
    case 3:
        require(regime.empty(), "experiment 3 has no regime");
        c.M = 60;
        c.L = 60;
        c.L_sweep = divisors(60);
        c.B = 0;
        c.snr = {5.0};
        c.N = 1000;
        c.trials = 10;
        c.restarts = 10;
        c.prior = PriorKind::inverse_frequency;
        break;
    default:
        throw ConfigError("experiment must be 1, 2 or 3");
    }
    return c;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "M") {
        c.M = parse_number<int>(key, value);
    } else if (key == "L") {
        c.L = parse_number<int>(key, value);
    } else if (key == "L_sweep") {
        c.L_sweep.clear();
        for (const auto& item : split_list(value)) {
            c.L_sweep.push_back(parse_number<int>(key, item));
        }
    } else if (key == "B") {
        c.B = parse_number<int>(key, value);
    } else if (key == "snr") {
        c.snr.clear();
        for (const auto& item : split_list(value)) {
            c.snr.push_back(parse_number<double>(key, item));
        }
    } else if (key == "snr_log10") {
        // lo, hi, count
        const auto parts = split_list(value);
        require(parts.size() == 3, "snr_log10 takes 'lo, hi, count'");
        c.snr = log_spaced(parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1]),
                           parse_number<int>(key, parts[2]));
    } else if (key == "N") {
        c.N = parse_number<int>(key, value);
    } else if (key == "trials") {
        c.trials = parse_number<int>(key, value);
    } else if (key == "restarts") {
        c.restarts = parse_number<int>(key, value);
    } else if (key == "max_iter") {
        c.max_iter = parse_number<int>(key, value);
    } else if (key == "tol") {
        c.tol = parse_number<double>(key, value);
    } else if (key == "prior") {
        if (value == "flat") {
            c.prior = PriorKind::flat;
        } else if (value == "inverse_frequency") {
            c.prior = PriorKind::inverse_frequency;
        } else {
            throw ConfigError("prior must be 'flat' or 'inverse_frequency'");
        }
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "scale_factor") {
        c.scale_factor = parse_number<double>(key, value);
    } else if (key == "threads") {
        c.threads = parse_number<unsigned>(key, value);
    } else if (key == "experiment" || key == "regime") {
        throw ConfigError("'" + key + "' selects the defaults and cannot be overridden here");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

std::map<std::string, std::string> parse_settings(std::istream& in, const std::string& source) {
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        }
        if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

ExperimentConfig load_experiment_config(const std::map<std::string, std::string>& settings,
                                        const std::map<std::string, std::string>& overrides) {
    auto merged = settings;
    for (const auto& [k, v] : overrides) {
        merged[k] = v;
    }
    const auto id_it = merged.find("experiment");
    if (id_it == merged.end()) {
        throw ConfigError("config has no 'experiment' key");
    }
    const auto regime_it = merged.find("regime");
    ExperimentConfig c = experiment_defaults(parse_number<int>("experiment", id_it->second),
                                             regime_it == merged.end() ? "" : regime_it->second);
    for (const auto* source : {&settings, &overrides}) {
        for (const auto& [k, v] : *source) {
            if (k != "experiment" && k != "regime") {
                apply_setting(c, k, v);
            }
        }
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"experiment", c.experiment_id},
            {"regime", c.regime},
            {"M", c.M},
            {"L", c.L},
            {"L_sweep", c.L_sweep},
            {"B", c.B},
            {"snr", c.snr},
            {"N", c.N},
            {"trials", c.trials},
            {"restarts", c.restarts},
            {"max_iter", c.max_iter},
            {"tol", c.tol},
            {"prior", c.prior == PriorKind::flat ? "flat" : "inverse_frequency"},
            {"seed", c.seed},
            {"scale_factor", c.scale_factor},
            {"effective_N", c.scaled_N()},
            {"effective_trials", c.scaled_trials()}};
}

double median(std::vector<double> values) {
    require(!values.empty(), "median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
    const std::size_t n = x.size();
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        require(x[i] > 0 && y[i] > 0, "slope fit needs positive values");
        mx += std::log10(x[i]) / n;
        my += std::log10(y[i]) / n;
    }
    double sxy = 0;
    double sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log10(x[i]) - mx;
        sxy += dx * (std::log10(y[i]) - my);
        sxx += dx * dx;
    }
    require(sxx > 0, "slope fit needs distinct x values");
    return sxy / sxx;
}

ExperimentOutput run_experiment_1(const ExperimentConfig& config) {
    config.validate();
    require(config.experiment_id == 1, "not an experiment-1 config");
    const auto start = Clock::now();
    std::vector<Task> tasks;
    for (int t = 0; t < config.scaled_trials(); ++t) {
        tasks.push_back({t, 0, config.snr.front(), config.L});
    }
    const auto results = run_tasks(config, tasks);

    ExperimentOutput out;
    out.config = config;
    const int cutoff = config.L / 2;
    double em_sum = 0;
    double base_sum = 0;
    int count = 0;
    for (const auto& r : results) {
        out.rows.push_back(r.row);
        const HighResSignal base = low_pass(r.truth, cutoff);
        const auto em_err = per_frequency_error(r.estimate, r.truth);
        const auto base_err = per_frequency_error(base, r.truth);
        for (std::size_t k = 0; k < em_err.size(); ++k) {
            out.per_frequency.push_back({r.row.trial, static_cast<int>(k), em_err[k], base_err[k]});
            if (static_cast<int>(k) > cutoff && em_err[k] && base_err[k]) {
                em_sum += *em_err[k];
                base_sum += *base_err[k];
                ++count;
            }
        }
        const Vector aligned = circular_shift(r.estimate.values(), relative_error(r.estimate, r.truth).shift);
        for (int i = 0; i < config.M; ++i) {
            out.overlay.push_back({r.row.trial, i, r.truth[i], base[i], aligned[i]});
        }
    }
    if (count > 0) {
        out.high_frequency_error = em_sum / count;
        out.baseline_high_frequency_error = base_sum / count;
    }
    out.wall_time_seconds = seconds_since(start);
    return out;
}

ExperimentOutput run_experiment_2(const ExperimentConfig& config) {
    config.validate();
    require(config.experiment_id == 2, "not an experiment-2 config");
    const auto start = Clock::now();
    std::vector<Task> tasks;
    for (int p = 0; p < static_cast<int>(config.snr.size()); ++p) {
        for (int t = 0; t < config.scaled_trials(); ++t) {
            tasks.push_back({t, p, config.snr[p], config.L});
        }
    }
    const auto results = run_tasks(config, tasks);

    ExperimentOutput out;
    out.config = config;
    std::vector<double> snrs;
    std::vector<double> medians;
    for (std::size_t i = 0; i < results.size();) {
        std::vector<double> errors;
        const double snr = results[i].row.snr;
        for (; i < results.size() && results[i].row.snr == snr; ++i) {
            out.rows.push_back(results[i].row);
            errors.push_back(results[i].row.relative_error);
        }
        out.snr_curve.push_back({snr, median(errors), static_cast<int>(errors.size())});
        snrs.push_back(snr);
        medians.push_back(out.snr_curve.back().median_error);
    }
    if (snrs.size() >= 2) {
        out.slope = fit_loglog_slope(snrs, medians);
    }
    out.wall_time_seconds = seconds_since(start);
    return out;
}

ExperimentOutput run_experiment_3(const ExperimentConfig& config) {
    config.validate();
    require(config.experiment_id == 3, "not an experiment-3 config");
    const auto start = Clock::now();
    std::vector<Task> tasks;
    const auto Ls = config.grid_L();
    for (int p = 0; p < static_cast<int>(Ls.size()); ++p) {
        for (int t = 0; t < config.scaled_trials(); ++t) {
            tasks.push_back({t, p, config.snr.front(), Ls[p]});
        }
    }
    const auto results = run_tasks(config, tasks);

    ExperimentOutput out;
    out.config = config;
    for (std::size_t i = 0; i < results.size();) {
        const int L = results[i].row.L;
        double sum = 0;
        int n = 0;
        for (; i < results.size() && results[i].row.L == L; ++i) {
            out.rows.push_back(results[i].row);
            sum += results[i].row.relative_error;
            ++n;
        }
        out.error_vs_L.push_back({config.M, L, sum / n, n});
    }
    out.l_marker = std::pow(static_cast<double>(config.M), 2.0 / 3.0);
    out.wall_time_seconds = seconds_since(start);
    return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
    switch (config.experiment_id) {
    case 1:
        return run_experiment_1(config);
    case 2:
        return run_experiment_2(config);
    case 3:
        return run_experiment_3(config);
    default:
        throw ConfigError("experiment must be 1, 2 or 3");
    }
}

}  // namespace srmra
