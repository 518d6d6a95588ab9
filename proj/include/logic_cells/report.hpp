#pragma once

// CSV tables and SVG figures.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logic_cells/logic_analyzer.hpp"
#include "logic_cells/weight_logic.hpp"

namespace logic_cells::report {

// Shortest text that reads back to the same double.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(double v);
  CsvWriter& cell(int v);
  CsvWriter& cell(long long v);
  void end_row();

  const std::string& text() const { return text_; }

 private:
  std::size_t columns_;
  std::size_t pending_ = 0;
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws DomainError when absent
};

// No quoting: fields never contain commas.
CsvTable parse_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Verdict table: cell, <cond> bucket and concentration columns, kind, logical value.
std::string verdicts_csv(const logic::LogicMatrix& matrix, const logic::Census& census);
// Rebuilds the verdicts written by verdicts_csv.
std::vector<logic::CellVerdict> read_verdicts_csv(const std::string& text, const logic::ConditionSet& conditions);

// cell, epsilon, one 0/1 column per condition, score.
std::string logic_matrix_csv(const logic::LogicMatrix& matrix);

// Matrix values, one row per line.
std::string matrix_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& text);

std::string scores_csv(const std::vector<weights::ScoreRecord>& records);

// Blue at lo, white at the midpoint, red at hi.
std::string heatmap_svg(const Eigen::MatrixXd& values, double lo, double hi, const std::string& title);

std::string histogram_svg(const weights::Bins& bins, const std::string& title, const std::string& x_label);

std::string scatter_svg(const std::vector<double>& x, const std::vector<double>& y,
                        const std::optional<weights::LinearFit>& fit, const std::string& title,
                        const std::string& x_label, const std::string& y_label);

}  // namespace logic_cells::report
