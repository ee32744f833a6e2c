#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "sumer/dataset.hpp"

namespace sumer {

struct CsvReadOptions {
  std::string label_column = "label";
  /// Fixed class count; when absent it is max(label) + 1 (at least 2).
  std::optional<int> num_classes;
};

/// Dataset CSV: header row, feature columns f0..f{d-1}, optional integer
/// label column. Ids follow row order. A non-empty label becomes both the
/// truth and a Provided label; an empty label cell leaves the row unlabeled.
Dataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts = {});
Dataset read_dataset_csv(const std::filesystem::path& path, const CsvReadOptions& opts = {});

/// Writes the visible label (falling back to truth) as `label`; the column
/// is omitted when no row has either. Locale-independent, '\n' endings.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);

/// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_double(double v);

}  // namespace sumer
