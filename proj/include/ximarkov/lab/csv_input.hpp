#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ximarkov/error.hpp"

namespace ximarkov::lab {

/// Numeric CSV: one header row, comma separator, '.' decimal point.
struct DataFrame {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  Eigen::Index index_of(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return static_cast<Eigen::Index>(j);
    fail(ErrorKind::InvalidParameter, "no column named '" + name + "'");
  }

  Eigen::MatrixXd select(const std::vector<std::string>& names) const {
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k) out.col(k) = values.col(index_of(names[k]));
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r"), e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline DataFrame parse_csv(std::istream& in, const std::string& origin = "csv") {
  DataFrame df;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::InvalidParameter, origin + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  df.columns = detail::split_csv_line(line);
  require(!df.columns.empty(), ErrorKind::InvalidParameter, origin + ": empty header");

  std::vector<double> flat;
  std::size_t rows = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv_line(line);
    require(fields.size() == df.columns.size(), ErrorKind::InvalidParameter,
            origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(df.columns.size()) + " fields");
    for (const auto& f : fields) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == f.size() && !f.empty(), ErrorKind::InvalidParameter,
              origin + ":" + std::to_string(line_no) + ": '" + f + "' is not a number");
      flat.push_back(v);
    }
    ++rows;
  }
  const auto cols = static_cast<Eigen::Index>(df.columns.size());
  df.values.resize(static_cast<Eigen::Index>(rows), cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) df.values(i, j) = flat[i * cols + j];
  return df;
}

inline DataFrame read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot read " + path.string());
  return parse_csv(f, path.string());
}

}  // namespace ximarkov::lab
