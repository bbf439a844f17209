#include "sbfa/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sbfa/errors.hpp"

namespace sbfa {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim spaces
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_cell(const std::string& s, int row, int col) {
  if (s.empty())
    throw DataError("csv: empty cell at row " + std::to_string(row) + ", column " +
                    std::to_string(col));
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("csv: non-numeric cell '" + s + "' at row " + std::to_string(row) +
                    ", column " + std::to_string(col));
  }
}

}  // namespace

Dataset ingest_csv(const std::string& path, std::optional<Dataset::Kind> kind_override,
                   bool standardize) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty file " + path);
  Dataset ds;
  ds.item_names = split_line(line);
  const std::size_t p = ds.item_names.size();
  if (p == 0) throw DataError("csv: header row has no columns");

  std::vector<std::vector<double>> rows;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != p)
      throw DataError("csv: row " + std::to_string(row_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(p));
    std::vector<double> vals(p);
    for (std::size_t j = 0; j < p; ++j) vals[j] = parse_cell(fields[j], row_no, static_cast<int>(j) + 1);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw DataError("csv: no data rows in " + path);

  ds.values = MatrixXd(rows.size(), p);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < p; ++j) ds.values(i, j) = rows[i][j];

  bool all_binary = true;
  for (Eigen::Index i = 0; i < ds.values.size() && all_binary; ++i) {
    const double v = ds.values.data()[i];
    all_binary = (v == 0.0 || v == 1.0);
  }
  if (kind_override) {
    ds.kind = *kind_override;
    if (ds.kind == Dataset::Kind::Binary && !all_binary)
      throw DataError("csv: binary kind requested but values outside {0,1} present");
  } else {
    ds.kind = all_binary ? Dataset::Kind::Binary : Dataset::Kind::Continuous;
    if (!all_binary) {
      bool nearly_binary = true;
      for (Eigen::Index i = 0; i < ds.values.size() && nearly_binary; ++i) {
        const double v = ds.values.data()[i];
        nearly_binary = v == std::floor(v) && v >= 0.0 && v <= 9.0;
      }
      if (nearly_binary)
        std::cerr << "warning: " << path
                  << " holds small integers but values outside {0,1}; treating as continuous\n";
    }
  }

  const Eigen::Index n = ds.values.rows();
  if (n < static_cast<Eigen::Index>(p))
    std::cerr << "warning: " << path << " has fewer observations (" << n << ") than items (" << p
              << ")\n";
  if (ds.kind == Dataset::Kind::Continuous) {
    if (n < 2) throw DataError("csv: continuous data needs at least two observations");
    for (std::size_t j = 0; j < p; ++j) {
      const double sd = std::sqrt(
          (ds.values.col(j).array() - ds.values.col(j).mean()).square().sum() / (n - 1));
      if (!(sd > 0.0))
        throw DataError("csv: column '" + ds.item_names[j] + "' is constant");
      if (standardize)
        ds.values.col(j) = (ds.values.col(j).array() - ds.values.col(j).mean()) / sd;
    }
  } else if (standardize) {
    throw DataError("csv: standardization applies to continuous data only");
  }
  ds.validate();
  return ds;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw DataError("csv: cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j)
    out << (j ? "," : "") << header[j];
  out << "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      out << (j ? "," : "") << format_double(values(i, j));
    out << "\n";
  }
}

}  // namespace sbfa
