#include "gasdrift/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gasdrift::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_dataset_csv(const std::filesystem::path& path,
                       const datagen::Dataset& dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << "temperature_K,volume_L,moles_mol,pressure_atm\n";
  for (const auto& r : dataset.records) {
    out << format_double(r.T) << ',' << format_double(r.V) << ','
        << format_double(r.N) << ',' << format_double(r.P) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::filesystem::path metadata_path_for(
    const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

void write_dataset_metadata(const std::filesystem::path& csv_path,
                            const datagen::Dataset& dataset) {
  nlohmann::json meta{
      {"gas",
       {{"name", dataset.gas.name}, {"a", dataset.gas.a}, {"b", dataset.gas.b}}},
      {"sampler",
       {{"mu_T", dataset.params.mu_T},
        {"sigma_T", dataset.params.sigma_T},
        {"mu_V", dataset.params.mu_V},
        {"sigma_V", dataset.params.sigma_V},
        {"mu_N", dataset.params.mu_N},
        {"sigma_N", dataset.params.sigma_N}}},
      {"seed", dataset.seed},
      {"size", dataset.size()},
  };
  const auto path = metadata_path_for(csv_path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << meta.dump(2) << '\n';
}

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty file: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  if (table.header.empty()) {
    throw std::runtime_error("no header columns: " + path.string());
  }
  table.columns.resize(table.header.size());

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col >= table.header.size()) break;
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty()) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": cell '" + cell + "' is not numeric");
      }
      table.columns[col].push_back(value);
      ++col;
    }
    if (col != table.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected " +
                               std::to_string(table.header.size()) +
                               " columns, got " + std::to_string(col));
    }
  }
  return table;
}

datagen::Dataset read_dataset_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const char* expected[] = {"temperature_K", "volume_L", "moles_mol",
                            "pressure_atm"};
  if (t.header.size() != 4) {
    throw std::runtime_error(path.string() + ": expected 4 dataset columns");
  }
  for (int i = 0; i < 4; ++i) {
    if (t.header[i] != expected[i]) {
      throw std::runtime_error(path.string() + ": column " +
                               std::to_string(i) + " is '" + t.header[i] +
                               "', expected '" + expected[i] + "'");
    }
  }
  datagen::Dataset ds;
  ds.records.resize(t.n_rows());
  for (std::size_t i = 0; i < t.n_rows(); ++i) {
    ds.records[i] = {t.columns[0][i], t.columns[1][i], t.columns[2][i],
                     t.columns[3][i]};
  }
  return ds;
}

}  // namespace gasdrift::io
