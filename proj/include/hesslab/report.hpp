#pragma once

#include <string>
#include <vector>

namespace hesslab {

// Deterministic tabular reports: cells are preformatted strings (numbers at
// 12 significant digits), rows are sorted lexicographically before writing,
// and nothing time- or machine-dependent ever enters the output, so the same
// run configuration always produces the same bytes.
struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

std::string format_number(double v);
std::string format_index(int i);  // zero-padded so lexicographic = numeric

std::string to_csv(const ReportTable& table);
std::string to_json(const ReportTable& table);

// multi-table documents (one per check) in a fixed order
std::string tables_to_csv(const std::vector<ReportTable>& tables);
std::string tables_to_json(const std::vector<ReportTable>& tables);

}  // namespace hesslab
