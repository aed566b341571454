#include "vtn/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "vtn/errors.hpp"

namespace vtn {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string where(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line) + ": "; }

double parse_double(const std::string& cell, const std::string& path, std::size_t line) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (cell.empty() || ec != std::errc() || ptr != end) {
        throw FormatError(where(path, line) + "cannot parse '" + cell + "' as a number");
    }
    if (!std::isfinite(v)) throw FormatError(where(path, line) + "non-finite value '" + cell + "'");
    return v;
}

// Number of leading columns named <prefix>1, <prefix>2, ... starting at `first`.
Index count_prefixed(const std::vector<std::string>& cols, std::size_t first, char prefix) {
    Index k = 0;
    while (first + k < cols.size() && cols[first + k] == std::string(1, prefix) + std::to_string(k + 1)) ++k;
    return k;
}

}  // namespace

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    CsvTable table;
    std::vector<double> flat;
    std::string line;
    std::size_t line_no = 0;
    Index rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split(line);
        if (table.columns.empty()) {
            for (const auto& c : cells) {
                if (c.empty()) throw FormatError(where(path, line_no) + "empty column name in header");
            }
            table.columns = std::move(cells);
            continue;
        }
        if (cells.size() != table.columns.size()) {
            throw FormatError(where(path, line_no) + "expected " + std::to_string(table.columns.size()) +
                              " fields, found " + std::to_string(cells.size()));
        }
        for (const auto& c : cells) flat.push_back(parse_double(c, path, line_no));
        ++rows;
    }
    if (table.columns.empty()) throw FormatError(where(path, 1) + "missing header row");
    const Index cols = static_cast<Index>(table.columns.size());
    table.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), rows, cols);
    return table;
}

void write_csv_table(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    out.precision(std::numeric_limits<double>::max_digits10);
    for (Index r = 0; r < table.values.rows(); ++r) {
        for (Index c = 0; c < table.values.cols(); ++c) out << (c ? "," : "") << table.values(r, c);
        out << '\n';
    }
    if (!out) throw FormatError("write failed for '" + path + "'");
}

TimeSeriesData load_csv(const std::string& path, DataRole role) {
    CsvTable t = read_csv_table(path);
    const Index p = count_prefixed(t.columns, 0, 'u');
    const Index l = count_prefixed(t.columns, static_cast<std::size_t>(p), 'y');
    if (p < 1 || l < 1 || static_cast<std::size_t>(p + l) != t.columns.size()) {
        throw FormatError(where(path, 1) + "header must be u1..uP,y1..yL");
    }
    if (t.values.rows() == 0) throw FormatError(where(path, 2) + "no samples");
    TimeSeriesData data{t.values.leftCols(p), t.values.rightCols(l), role};
    return data;
}

void save_csv(const std::string& path, const TimeSeriesData& data) {
    CsvTable t;
    for (Index p = 0; p < data.input_channels(); ++p) t.columns.push_back("u" + std::to_string(p + 1));
    for (Index l = 0; l < data.output_channels(); ++l) t.columns.push_back("y" + std::to_string(l + 1));
    t.values.resize(data.samples(), data.input_channels() + data.output_channels());
    t.values << data.inputs, data.outputs;
    write_csv_table(path, t);
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& values, const std::string& prefix) {
    CsvTable t;
    for (Index c = 0; c < values.cols(); ++c) t.columns.push_back(prefix + std::to_string(c + 1));
    t.values = values;
    write_csv_table(path, t);
}

Eigen::MatrixXd load_outputs_csv(const std::string& path) {
    CsvTable t = read_csv_table(path);
    std::size_t first = 0;
    while (first < t.columns.size() && t.columns[first] != "y1") ++first;
    const Index l = count_prefixed(t.columns, first, 'y');
    if (l < 1) throw FormatError(where(path, 1) + "no y1..yL columns");
    return t.values.middleCols(static_cast<Index>(first), l);
}

std::pair<TimeSeriesData, TimeSeriesData> load_cascaded_tanks(const std::string& path) {
    CsvTable t = read_csv_table(path);
    auto column = [&](const std::string& name) -> Eigen::MatrixXd {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (t.columns[c] == name) return t.values.col(static_cast<Index>(c));
        }
        throw FormatError(where(path, 1) + "missing column '" + name + "'");
    };
    return {TimeSeriesData{column("uEst"), column("yEst"), DataRole::train},
            TimeSeriesData{column("uVal"), column("yVal"), DataRole::test}};
}

}  // namespace vtn
