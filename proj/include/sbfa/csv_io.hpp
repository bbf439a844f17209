#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbfa/model_spec.hpp"

namespace sbfa {

// Formats a double so it round-trips exactly (17 significant digits).
std::string format_double(double x);

// Header row names the items; kind is inferred (all values in {0,1} -> binary)
// unless overridden. standardize centers and scales continuous columns to
// unit standard deviation. Ragged rows and non-numeric cells are fatal;
// constant columns are fatal for continuous data; n < p only warns.
Dataset ingest_csv(const std::string& path,
                   std::optional<Dataset::Kind> kind_override = std::nullopt,
                   bool standardize = false);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const MatrixXd& values);

}  // namespace sbfa
