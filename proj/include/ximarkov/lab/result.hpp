#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ximarkov::lab {

/// One CSV table: parameter columns first, then measure and diagnostic columns.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

enum class LineStyle { Solid, Dotted };

struct Series {
  std::string label;
  LineStyle style = LineStyle::Solid;
  std::vector<double> x, y;
};

struct Plot {
  std::string name;
  std::string title;
  std::string x_label, y_label;
  std::vector<Series> series;
};

/// A declared control: a claim the experiment must witness (exit code 3 otherwise).
struct ControlCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Metadata {
  std::string experiment;
  std::uint64_t seed = 0;
  long long samples = 0;
  int grid = 0;
  double runtime_seconds = 0.0;
};

struct ExperimentResult {
  Metadata meta;
  std::vector<Table> tables;
  std::vector<Plot> plots;
  std::vector<ControlCheck> controls;
  std::vector<std::string> warnings;

  bool controls_passed() const {
    for (const auto& c : controls)
      if (!c.passed) return false;
    return true;
  }

  const Table* table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return &t;
    return nullptr;
  }
};

}  // namespace ximarkov::lab
