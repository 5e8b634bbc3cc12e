#include "sheforge/csv.hpp"

#include "sheforge/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sheforge::csv {

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  for (auto &cell : cells) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
  }
  return cells;
}

bool parse_double(const std::string &cell, double &out) {
  if (cell.empty())
    return false;
  char *end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size();
}

Document read(std::istream &in) {
  Document doc;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    if (line[0] == '#') {
      doc.comments.push_back(line.substr(1));
      continue;
    }
    if (!have_header) {
      doc.header = split_line(line);
      have_header = true;
    } else {
      doc.rows.push_back(split_line(line));
    }
  }
  if (!have_header)
    throw FormatError("CSV has no header line");
  return doc;
}

Document read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw FormatError("cannot open " + path);
  return read(in);
}

void write_file(const std::string &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw FormatError("cannot write " + path);
  out << contents;
  if (!out)
    throw FormatError("write failed for " + path);
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace sheforge::csv
