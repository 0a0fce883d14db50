// File formats: dataset CSV (+ JSON metadata sidecar) and a small strict
// CSV reader used by the CLI.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gasdrift/datagen.hpp"

namespace gasdrift::io {

/// Format a double with enough digits to round-trip (17 significant).
std::string format_double(double v);

/// Write `temperature_K,volume_L,moles_mol,pressure_atm` rows.
void write_dataset_csv(const std::filesystem::path& path,
                       const datagen::Dataset& dataset);

/// Sidecar path for a dataset file: extension replaced by ".meta.json".
std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path);

/// Write the generation metadata sidecar (gas, constants, sampler params,
/// seed, size) next to the dataset.
void write_dataset_metadata(const std::filesystem::path& csv_path,
                            const datagen::Dataset& dataset);

/// Column-oriented CSV contents.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t n_rows() const {
    return columns.empty() ? 0 : columns.front().size();
  }
  /// Index of a named column, or -1.
  int column_index(const std::string& name) const;
};

/// Strict numeric CSV reader: one header line, uniform row widths, every
/// cell parses as a double. Throws std::runtime_error with a descriptive
/// message otherwise.
CsvTable read_csv(const std::filesystem::path& path);

/// Parse a dataset written by write_dataset_csv.
datagen::Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace gasdrift::io
