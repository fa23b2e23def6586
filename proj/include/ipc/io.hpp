#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipc/inference.hpp"
#include "ipc/model.hpp"
#include "ipc/simulation.hpp"

namespace ipc {

/// Column names of a long-format panel CSV (one row per unit-period).
struct LongCsvSchema {
  std::string unit_column = "id";
  std::string time_column = "time";
  std::string y_column = "y";
  std::vector<std::string> x_columns;
};

/// Reads a balanced long-format panel. Units and periods are ordered
/// numerically when every label parses as a number, lexicographically
/// otherwise. Throws MissingColumn, ParseError (with 1-based line number),
/// DuplicateCell, UnbalancedPanel (first 10 missing pairs), IoError, and
/// anything `validate_dataset` raises.
PanelDataset load_long_csv(const std::filesystem::path& path, const LongCsvSchema& schema);

/// Writes a dataset in the format `load_long_csv` reads, reals at 17
/// significant digits.
void write_long_csv(const PanelDataset& data, const std::filesystem::path& path,
                    const LongCsvSchema& schema);

/// Header-less numeric CSV into a matrix (used for Wald R and r files).
Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path);

/// CSV with a header row into (names, matrix).
std::pair<std::vector<std::string>, Eigen::MatrixXd> read_table_csv(
    const std::filesystem::path& path);

/// Shortest decimal form with 17 significant digits (exact round trip).
std::string format_real(double value);

struct NamedWaldTest {
  std::string name;
  WaldSpec spec;
  InferenceResult result;
};

/// Everything `write_fit` serializes.
struct FitReport {
  const IpcFit* fit = nullptr;
  IpcConfig config;
  std::vector<std::string> regressor_names;
  std::vector<std::string> unit_labels;
  std::vector<std::string> time_labels;
  std::vector<NamedWaldTest> tests;
  std::optional<JackknifeResult> jackknife;
};

std::string fit_json(const FitReport& report);
std::string factors_csv(const IpcFit& fit, const std::vector<std::string>& time_labels);
std::string loadings_csv(const IpcFit& fit, const std::vector<std::string>& unit_labels);

/// Writes fit.json, factors.csv and loadings.csv into `out_dir`. Files are
/// staged under temporary names and renamed once all of them are written.
void write_fit(const FitReport& report, const std::filesystem::path& out_dir);

std::string mc_result_json(const McResult& result, const IpcConfig& config);
std::string mc_table_csv(const McResult& result);

/// Writes mc_result.json and table.csv into `out_dir` (staged like write_fit).
void write_mc_result(const McResult& result, const IpcConfig& config,
                     const std::filesystem::path& out_dir);

/// Writes several files so that either all appear or none do.
void write_files_atomically(const std::filesystem::path& out_dir,
                            const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace ipc
