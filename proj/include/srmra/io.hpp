#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "srmra/em.hpp"
#include "srmra/invariants.hpp"
#include "srmra/prior.hpp"
#include "srmra/signal.hpp"

namespace srmra::io {

using Json = nlohmann::json;

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

Json to_json(const HighResSignal& x);
Json to_json(const ModelParams& params);
Json to_json(const ObservationBatch& batch);
Json to_json(const PriorSpec& prior);
Json to_json(const InvariantTriple& triple);
Json to_json(const EMResult& result);

HighResSignal signal_from_json(const Json& j);
ModelParams params_from_json(const Json& j);
ObservationBatch batch_from_json(const Json& j);
PriorSpec prior_from_json(const Json& j);
InvariantTriple triple_from_json(const Json& j);

/// Rows of plain decimal numbers separated by commas; blank lines and lines
/// starting with '#' are skipped.
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);
void write_csv_rows(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows);

/// Signal files: .json container or .csv with one row of values.
HighResSignal read_signal(const std::filesystem::path& path);
void write_signal(const std::filesystem::path& path, const HighResSignal& x);

/// Batch files: .json container, or .csv with one observation per row (the
/// CSV form carries no parameters, so `params` supplies M, sigma and seed;
/// L and N are taken from the rows).
ObservationBatch read_batch(const std::filesystem::path& path, const ModelParams* params = nullptr);
void write_batch(const std::filesystem::path& path, const ObservationBatch& batch);

PriorSpec read_prior(const std::filesystem::path& path);
void write_prior(const std::filesystem::path& path, const PriorSpec& prior);

/// Power spectrum table with header "k,power_spectrum".
void write_power_spectrum_csv(const std::filesystem::path& path, const InvariantTriple& triple);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace srmra::io
