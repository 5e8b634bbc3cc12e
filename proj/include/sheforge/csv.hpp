#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sheforge::csv {

// 17 significant digits; parses back to the identical double.
std::string format_double(double v);

std::vector<std::string> split_line(const std::string &line);

// Strict numeric parse; returns false on trailing garbage or empty input.
bool parse_double(const std::string &cell, double &out);

struct Document {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments; // lines beginning with '#', without the marker
};

// Reads a header line followed by data rows; blank lines are skipped.
Document read(std::istream &in);
Document read_file(const std::string &path);

void write_file(const std::string &path, const std::string &contents);
std::string read_text(const std::string &path);

} // namespace sheforge::csv
