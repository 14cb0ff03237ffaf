#pragma once

#include <optional>
#include <string>

#include "fir/model.hpp"

namespace fir {

// Parsed CSV: a bare pool when no "label" column exists, otherwise a
// labeled set. Row order is preserved.
struct CsvData {
    MatrixXd features;
    std::optional<VectorXi> labels;

    bool labeled() const { return labels.has_value(); }
    LabeledSet as_labeled() const;
};

// Reads a UTF-8 CSV with a header row of feature columns f1..fm and an
// optional integer column named "label" (1-based). When `classes` is
// given, labels are validated against 1..classes. Errors cite the
// offending row number.
CsvData load_csv(const std::string& path, std::optional<int> classes = std::nullopt);

void write_csv(const std::string& path, const MatrixXd& features,
               const VectorXi* labels = nullptr);

}  // namespace fir
