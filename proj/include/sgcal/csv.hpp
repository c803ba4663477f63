#pragma once

#include "sgcal/design.hpp"
#include "sgcal/linalg.hpp"
#include "sgcal/models.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sgcal {

/// Shortest decimal text that parses back to exactly `v`.
[[nodiscard]] std::string format_double(double v);

/// Parses a whole field as a double. Throws ParseError (row 0) on failure.
[[nodiscard]] double parse_double(std::string_view text);

/// Headered numeric CSV. Rows are numbered from 1 for the first data row, so
/// row k is on line k + 1 of the file.
struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Throws ParseError naming the row for ragged or non-numeric rows.
[[nodiscard]] NumericTable read_numeric_csv(std::istream& in);

/// Field data with columns x1..xp, y.
struct Dataset {
    DesignSet design;
    linalg::Vector y;
};

/// Requires the header x1,...,xp,y. Inputs must lie in [0, 1].
[[nodiscard]] Dataset read_dataset(std::istream& in);
/// Requires the header x1,...,xp.
[[nodiscard]] DesignSet read_points(std::istream& in);

void write_points(std::ostream& out, const DesignSet& x);
void write_dataset(std::ostream& out, const DesignSet& x, const linalg::Vector& y);

/// Columns x1..xp, mean_reality, var_reality, mean_field, var_field.
void write_predictions(std::ostream& out, const DesignSet& x, const PredictiveDistribution& reality,
                       const PredictiveDistribution& field);

}  // namespace sgcal
