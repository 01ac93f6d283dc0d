#pragma once

// CSV tables consumed by the plotting scripts. Every file starts with a
// version line "# srmra-<table> v1" followed by a column header.

#include <filesystem>
#include <string>
#include <vector>

#include "srmra/experiments.hpp"
#include "srmra/identifiability.hpp"

namespace srmra::tables {

inline constexpr int schema_version = 1;

std::string results_csv(const std::vector<ResultRow>& rows);
std::string per_frequency_csv(const std::vector<PerFrequencyRow>& rows);
std::string overlay_csv(const std::vector<OverlayRow>& rows);
std::string snr_curve_csv(const std::vector<SnrSummary>& rows);
std::string error_vs_L_csv(const std::vector<LSummary>& rows);
std::string identifiability_csv(const std::vector<RankTestResult>& rows);

/// Parses a results table; checks the version line and the header.
std::vector<ResultRow> parse_results_csv(const std::string& text);

/// Writes the tables that apply to this output plus metadata.json, and
/// returns the paths written. Wall times go to the metadata only, so the
/// CSV files are identical across reruns.
std::vector<std::filesystem::path> write_experiment(const std::filesystem::path& dir, const ExperimentOutput& out);

}  // namespace srmra::tables
