#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vtn/volterra.hpp"

namespace vtn {

/// Comma-separated numeric table with a header row.
struct CsvTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

/// Parses a numeric CSV. Throws FormatError with the 1-based line number on malformed or non-finite input.
CsvTable read_csv_table(const std::string& path);
void write_csv_table(const std::string& path, const CsvTable& table);

/// Header u1..uP,y1..yL (P, L >= 1).
TimeSeriesData load_csv(const std::string& path, DataRole role = DataRole::train);
/// Writes values with 17 significant digits so load_csv(save_csv(x)) == x.
void save_csv(const std::string& path, const TimeSeriesData& data);

/// Columns named <prefix>1..<prefix>K.
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& values, const std::string& prefix);
/// Extracts the y1..yL columns of any table with such columns (prediction files or full datasets).
Eigen::MatrixXd load_outputs_csv(const std::string& path);

/**
 * Cascaded Tanks benchmark file (columns uEst,uVal,yEst,yVal). Returns the
 * estimation and validation records as SISO data.
 */
std::pair<TimeSeriesData, TimeSeriesData> load_cascaded_tanks(const std::string& path);

}  // namespace vtn
