#include "hesslab/report.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

namespace hesslab {

void ReportTable::add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_index(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", i);
  return buf;
}

namespace {

std::vector<std::vector<std::string>> sorted_rows(const ReportTable& t) {
  auto rows = t.rows;
  std::sort(rows.begin(), rows.end());
  return rows;
}

// quote a CSV cell only when it needs it
std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void append_csv(std::string& out, const ReportTable& t) {
  out += "# ";
  out += t.title;
  out += '\n';
  for (size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_cell(t.columns[c]);
  }
  out += '\n';
  for (const auto& row : sorted_rows(t)) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_cell(row[c]);
    }
    out += '\n';
  }
}

nlohmann::json table_json(const ReportTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : sorted_rows(t)) rows.push_back(row);
  return nlohmann::json{{"title", t.title}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

}  // namespace

std::string to_csv(const ReportTable& table) {
  std::string out;
  append_csv(out, table);
  return out;
}

std::string to_json(const ReportTable& table) { return table_json(table).dump(2) + "\n"; }

std::string tables_to_csv(const std::vector<ReportTable>& tables) {
  std::string out;
  for (size_t i = 0; i < tables.size(); ++i) {
    if (i) out += '\n';
    append_csv(out, tables[i]);
  }
  return out;
}

std::string tables_to_json(const std::vector<ReportTable>& tables) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& t : tables) doc.push_back(table_json(t));
  return doc.dump(2) + "\n";
}

}  // namespace hesslab
