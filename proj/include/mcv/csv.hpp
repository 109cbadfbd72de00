#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <mcv/dataset.hpp>
#include <mcv/error.hpp>

namespace mcv {

/// Numeric table read from a header-first, comma-separated file.
struct CsvTable
{
    std::vector<std::string> header;
    Eigen::MatrixXd values;  // rows x columns
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    out.push_back(trim(field));
    return out;
}

} // namespace detail

/// Data rows are numbered from 1 (the header is line 1, data row k is line k+1).
inline CsvTable read_csv(std::istream& is)
{
    CsvTable table;
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "CSV is empty (missing header row)");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    table.header = detail::split_fields(line);
    const std::size_t cols = table.header.size();

    std::vector<std::vector<double>> rows;
    std::size_t row_number = 0;
    while (std::getline(is, line)) {
        if (detail::trim(line).empty()) continue;
        ++row_number;
        const auto fields = detail::split_fields(line);
        if (fields.size() != cols) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(row_number) + " (line " +
                                                   std::to_string(row_number + 1) + ") has " +
                                                   std::to_string(fields.size()) + " fields, header has " +
                                                   std::to_string(cols));
        }
        std::vector<double> row(cols);
        for (std::size_t k = 0; k < cols; ++k) {
            const std::string& f = fields[k];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
                throw Error(ErrorCode::ParseError, "non-numeric value '" + f + "' at row " +
                                                       std::to_string(row_number) + " (line " +
                                                       std::to_string(row_number + 1) + "), column '" +
                                                       table.header[k] + "'");
            }
            row[k] = v;
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < cols; ++k) table.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    }
    return table;
}

inline CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return read_csv(in);
}

/// Split a table into covariates and the named response column.
inline std::pair<Dataset, std::vector<std::string>> dataset_from_csv(const CsvTable& table, const std::string& response)
{
    Index target = -1;
    for (std::size_t k = 0; k < table.header.size(); ++k) {
        if (table.header[k] == response) target = static_cast<Index>(k);
    }
    if (target < 0) throw Error(ErrorCode::ParseError, "response column '" + response + "' not found in header");
    const Index cols = table.values.cols();
    Eigen::MatrixXd X(table.values.rows(), cols - 1);
    std::vector<std::string> names;
    Index out = 0;
    for (Index k = 0; k < cols; ++k) {
        if (k == target) continue;
        X.col(out++) = table.values.col(k);
        names.push_back(table.header[static_cast<std::size_t>(k)]);
    }
    Eigen::VectorXd y = table.values.col(target);
    return {Dataset::raw(std::move(X), std::move(y)), names};
}

inline void write_dataset_csv(std::ostream& os, const Dataset& data, const std::vector<std::string>& names,
                              const std::string& response)
{
    os.precision(17);
    for (const auto& name : names) os << name << ',';
    os << response << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.p(); ++j) os << data.X(i, j) << ',';
        os << data.y[i] << '\n';
    }
}

} // namespace mcv
