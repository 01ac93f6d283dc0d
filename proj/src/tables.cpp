#include "srmra/tables.hpp"

#include <charconv>
#include <sstream>

#include "srmra/errors.hpp"
#include "srmra/io.hpp"

#ifndef SRMRA_VERSION
#define SRMRA_VERSION "unknown"
#endif

namespace srmra::tables {

namespace {

constexpr const char* results_header = "experiment_id,trial,snr,M,L,N,relative_error,iterations,converged";

std::string version_line(const std::string& table) {
    return "# srmra-" + table + " v" + std::to_string(schema_version) + "\n";
}

std::string num(double v) { return io::format_double(v); }

std::string opt(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
        out.push_back(f);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

template <typename T>
T field(const std::string& text, int line_no) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("results csv line " + std::to_string(line_no) + ": bad field '" + text + "'");
    }
    return value;
}

}  // namespace

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out = version_line("results") + results_header + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.experiment_id) + "," + std::to_string(r.trial) + "," + num(r.snr) + "," +
               std::to_string(r.M) + "," + std::to_string(r.L) + "," + std::to_string(r.N) + "," +
               num(r.relative_error) + "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "\n";
    }
    return out;
}

std::string per_frequency_csv(const std::vector<PerFrequencyRow>& rows) {
    std::string out = version_line("per-frequency") + "trial,k,em_error,lowpass_error\n";
    for (const auto& r : rows) {
        out += std::to_string(r.trial) + "," + std::to_string(r.k) + "," + opt(r.em_error) + "," +
               opt(r.lowpass_error) + "\n";
    }
    return out;
}

std::string overlay_csv(const std::vector<OverlayRow>& rows) {
    std::string out = version_line("overlay") + "trial,index,truth,lowpass,estimate\n";
    for (const auto& r : rows) {
        out += std::to_string(r.trial) + "," + std::to_string(r.index) + "," + num(r.truth) + "," + num(r.lowpass) +
               "," + num(r.estimate) + "\n";
    }
    return out;
}

std::string snr_curve_csv(const std::vector<SnrSummary>& rows) {
    std::string out = version_line("snr-curve") + "snr,median_error,trials\n";
    for (const auto& r : rows) {
        out += num(r.snr) + "," + num(r.median_error) + "," + std::to_string(r.trials) + "\n";
    }
    return out;
}

std::string error_vs_L_csv(const std::vector<LSummary>& rows) {
    std::string out = version_line("error-vs-L") + "M,L,mean_error,trials\n";
    for (const auto& r : rows) {
        out += std::to_string(r.M) + "," + std::to_string(r.L) + "," + num(r.mean_error) + "," +
               std::to_string(r.trials) + "\n";
    }
    return out;
}

std::string identifiability_csv(const std::vector<RankTestResult>& rows) {
    std::string out = version_line("identifiability") + "L,K,P_of_L,rank,parameters,identifiable\n";
    for (const auto& r : rows) {
        out += std::to_string(r.L) + "," + std::to_string(r.K) + "," + num(r.bound.value()) + "," +
               std::to_string(r.rank) + "," + std::to_string(r.parameters) + "," + (r.identifiable ? "1" : "0") +
               "\n";
    }
    return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line + "\n" != version_line("results")) {
        throw ConfigError("results csv: missing or unsupported version line");
    }
    if (!std::getline(in, line) || line != results_header) {
        throw ConfigError("results csv: unexpected header '" + line + "'");
    }
    std::vector<ResultRow> rows;
    int line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 9) {
            throw ConfigError("results csv line " + std::to_string(line_no) + ": expected 9 fields");
        }
        ResultRow r;
        r.experiment_id = field<int>(f[0], line_no);
        r.trial = field<int>(f[1], line_no);
        r.snr = field<double>(f[2], line_no);
        r.M = field<int>(f[3], line_no);
        r.L = field<int>(f[4], line_no);
        r.N = field<int>(f[5], line_no);
        r.relative_error = field<double>(f[6], line_no);
        r.iterations = field<int>(f[7], line_no);
        const int converged = field<int>(f[8], line_no);
        if (converged != 0 && converged != 1) {
            throw ConfigError("results csv line " + std::to_string(line_no) + ": converged must be 0 or 1");
        }
        r.converged = converged == 1;
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::filesystem::path> write_experiment(const std::filesystem::path& dir, const ExperimentOutput& out) {
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        io::write_text(dir / name, text);
        written.push_back(dir / name);
    };
    emit("results.csv", results_csv(out.rows));
    if (!out.per_frequency.empty()) {
        emit("per_frequency.csv", per_frequency_csv(out.per_frequency));
    }
    if (!out.overlay.empty()) {
        emit("overlay.csv", overlay_csv(out.overlay));
    }
    if (!out.snr_curve.empty()) {
        emit("snr_curve.csv", snr_curve_csv(out.snr_curve));
    }
    if (!out.error_vs_L.empty()) {
        emit("error_vs_L.csv", error_vs_L_csv(out.error_vs_L));
    }

    io::Json meta = {{"format", "srmra.experiment"},
                     {"version", schema_version},
                     {"srmra_version", SRMRA_VERSION},
                     {"config", to_json(out.config)},
                     {"seed", out.config.seed},
                     {"wall_time_seconds", out.wall_time_seconds}};
    io::Json timings = io::Json::array();
    for (const auto& r : out.rows) {
        timings.push_back({{"trial", r.trial}, {"snr", r.snr}, {"L", r.L}, {"seconds", r.wall_time_seconds}});
    }
    meta["row_wall_time_seconds"] = timings;
    if (out.slope) {
        meta["slope"] = *out.slope;
    }
    if (out.l_marker) {
        meta["L_marker"] = *out.l_marker;
    }
    if (out.high_frequency_error) {
        meta["high_frequency_error"] = *out.high_frequency_error;
        meta["baseline_high_frequency_error"] = *out.baseline_high_frequency_error;
    }
    io::write_json(dir / "metadata.json", meta);
    written.push_back(dir / "metadata.json");
    return written;
}

}  // namespace srmra::tables
