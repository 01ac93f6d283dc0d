#include "srmra/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srmra/errors.hpp"

namespace srmra::io {
namespace {

std::vector<double> to_std(const Eigen::Ref<const Vector>& v) {
    return {v.data(), v.data() + v.size()};
}

Vector to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows.push_back(to_std(m.row(i).transpose()));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    require(j.is_array(), "expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto row = j.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
        require(static_cast<Eigen::Index>(row.size()) == cols, "ragged matrix rows");
        m.row(i) = to_eigen(row).transpose();
    }
    return m;
}

std::string extension(const std::filesystem::path& path) {
    return path.extension().string();
}

template <typename F>
auto parse_guard(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ConfigError("malformed " + what + ": " + e.what());
    }
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

Json to_json(const HighResSignal& x) {
    Json j;
    j["format"] = "srmra.signal";
    j["version"] = 1;
    j["M"] = x.size();
    j["bandlimit"] = x.bandlimit() ? Json(*x.bandlimit()) : Json(nullptr);
    j["values"] = to_std(x.values());
    return j;
}

Json to_json(const ModelParams& p) {
    return Json{{"M", p.M}, {"L", p.L}, {"sigma", p.sigma}, {"N", p.N}, {"seed", p.seed}};
}

Json to_json(const ObservationBatch& batch) {
    Json j;
    j["format"] = "srmra.batch";
    j["version"] = 1;
    j["params"] = to_json(batch.params);
    j["seed"] = batch.params.seed;
    Json rows = Json::array();
    for (int i = 0; i < batch.N(); ++i) {
        rows.push_back(to_std(batch.samples.row(i).transpose()));
    }
    j["rows"] = std::move(rows);
    j["true_shifts"] = batch.true_shifts ? Json(*batch.true_shifts) : Json(nullptr);
    return j;
}

Json to_json(const PriorSpec& prior) {
    Json j;
    j["format"] = "srmra.prior";
    j["version"] = 1;
    if (prior.is_circulant()) {
        j["form"] = "circulant";
        j["power_profile"] = to_std(prior.power_profile());
    } else {
        j["form"] = "dense";
        j["precision"] = matrix_to_json(prior.precision_matrix());
    }
    return j;
}

Json to_json(const InvariantTriple& t) {
    Json j;
    j["format"] = "srmra.invariants";
    j["version"] = 1;
    j["L"] = t.L();
    j["mean"] = t.mean;
    j["power_spectrum"] = to_std(t.power_spectrum);
    j["bispectrum_real"] = matrix_to_json(t.bispectrum.real());
    j["bispectrum_imag"] = matrix_to_json(t.bispectrum.imag());
    return j;
}

Json to_json(const EMResult& r) {
    Json j;
    j["format"] = "srmra.em_result";
    j["version"] = 1;
    j["estimate"] = to_std(r.estimate.values());
    j["log_posterior_trace"] = r.log_posterior_trace;
    j["restart_index"] = r.restart_index;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["restart_log_posteriors"] = r.restart_log_posteriors;
    return j;
}

HighResSignal signal_from_json(const Json& j) {
    return parse_guard("signal", [&] {
        std::optional<int> bandlimit;
        if (j.contains("bandlimit") && !j.at("bandlimit").is_null()) {
            bandlimit = j.at("bandlimit").get<int>();
        }
        return HighResSignal(to_eigen(j.at("values").get<std::vector<double>>()), bandlimit);
    });
}

ModelParams params_from_json(const Json& j) {
    return parse_guard("params", [&] {
        ModelParams p;
        p.M = j.at("M").get<int>();
        p.L = j.at("L").get<int>();
        p.sigma = j.at("sigma").get<double>();
        p.N = j.at("N").get<int>();
        p.seed = j.value("seed", std::uint64_t{0});
        p.validate();
        return p;
    });
}

ObservationBatch batch_from_json(const Json& j) {
    return parse_guard("batch", [&] {
        ObservationBatch batch;
        batch.params = params_from_json(j.at("params"));
        const Matrix rows = matrix_from_json(j.at("rows"));
        batch.samples = rows;
        require(batch.samples.rows() == batch.params.N, "row count differs from params.N");
        if (j.contains("true_shifts") && !j.at("true_shifts").is_null()) {
            batch.true_shifts = j.at("true_shifts").get<std::vector<int>>();
        }
        batch.validate();
        return batch;
    });
}

PriorSpec prior_from_json(const Json& j) {
    return parse_guard("prior", [&] {
        const auto form = j.at("form").get<std::string>();
        if (form == "circulant") {
            return PriorSpec::circulant(to_eigen(j.at("power_profile").get<std::vector<double>>()));
        }
        if (form == "dense") {
            return PriorSpec::dense(matrix_from_json(j.at("precision")));
        }
        throw ConfigError("unknown prior form '" + form + "'");
    });
}

InvariantTriple triple_from_json(const Json& j) {
    return parse_guard("invariants", [&] {
        InvariantTriple t;
        t.mean = j.at("mean").get<double>();
        t.power_spectrum = to_eigen(j.at("power_spectrum").get<std::vector<double>>());
        const Matrix re = matrix_from_json(j.at("bispectrum_real"));
        const Matrix im = matrix_from_json(j.at("bispectrum_imag"));
        require(re.rows() == t.L() && re.cols() == t.L() && im.rows() == t.L() && im.cols() == t.L(),
                "bispectrum dimensions differ from L");
        t.bispectrum = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
        return t;
    });
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<double> row;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            const auto first = field.find_first_not_of(" \t");
            const auto last = field.find_last_not_of(" \t");
            const std::string trimmed = first == std::string::npos ? "" : field.substr(first, last - first + 1);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
            if (ec != std::errc() || ptr != trimmed.data() + trimmed.size() || trimmed.empty()) {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + trimmed + "'");
            }
            row.push_back(value);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_csv_rows(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                text += ',';
            }
            text += format_double(row[i]);
        }
        text += '\n';
    }
    write_text(path, text);
}

HighResSignal read_signal(const std::filesystem::path& path) {
    if (extension(path) == ".json") {
        return signal_from_json(read_json(path));
    }
    const auto rows = read_csv_rows(path);
    require(rows.size() == 1, "signal CSV must contain exactly one row");
    return HighResSignal(to_eigen(rows.front()));
}

void write_signal(const std::filesystem::path& path, const HighResSignal& x) {
    if (extension(path) == ".json") {
        write_json(path, to_json(x));
    } else {
        write_csv_rows(path, {to_std(x.values())});
    }
}

ObservationBatch read_batch(const std::filesystem::path& path, const ModelParams* params) {
    if (extension(path) == ".json") {
        return batch_from_json(read_json(path));
    }
    require(params != nullptr, "CSV batches need model parameters (M, sigma)");
    const auto rows = read_csv_rows(path);
    require(!rows.empty(), "batch CSV is empty");
    ObservationBatch batch;
    batch.params = *params;
    batch.params.N = static_cast<int>(rows.size());
    batch.params.L = static_cast<int>(rows.front().size());
    batch.samples.resize(batch.params.N, batch.params.L);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(static_cast<int>(rows[i].size()) == batch.params.L, "ragged batch CSV rows");
        batch.samples.row(static_cast<Eigen::Index>(i)) = to_eigen(rows[i]).transpose();
    }
    batch.validate();
    return batch;
}

void write_batch(const std::filesystem::path& path, const ObservationBatch& batch) {
    if (extension(path) == ".json") {
        write_json(path, to_json(batch));
        return;
    }
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < batch.N(); ++i) {
        rows.push_back(to_std(batch.samples.row(i).transpose()));
    }
    write_csv_rows(path, rows);
}

PriorSpec read_prior(const std::filesystem::path& path) {
    return prior_from_json(read_json(path));
}

void write_prior(const std::filesystem::path& path, const PriorSpec& prior) {
    write_json(path, to_json(prior));
}

void write_power_spectrum_csv(const std::filesystem::path& path, const InvariantTriple& triple) {
    std::string text = "k,power_spectrum\n";
    for (int k = 0; k < triple.L(); ++k) {
        text += std::to_string(k) + "," + format_double(triple.power_spectrum[k]) + "\n";
    }
    write_text(path, text);
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
}

}  // namespace srmra::io
