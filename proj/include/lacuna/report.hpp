#pragma once

// Bit-stable report emission. Numbers print as %.17g with the C locale's
// '.' separator (nothing in the library or tools ever calls setlocale), all
// output is UTF-8 with LF endings, and the only run-dependent value, the
// timestamp, lives in the schema line at the top of each file. Everything
// after that line is a pure function of the inputs, so two runs with the
// same configuration produce byte-identical bodies.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lacuna/regularity.hpp"

namespace lacuna {

// shortest-width %.17g rendering, round-trip exact
std::string fmt17(double v);

// RFC 3339 UTC, second resolution
std::string iso8601_utc_now();

// quotes a CSV field when it holds a comma, quote, or newline
std::string csv_field(const std::string& s);

// write-to-temp then rename, so readers never observe a partial file;
// creates parent directories
void write_atomic(const std::filesystem::path& path, std::string_view content);

struct CsvTable {
  std::string schema;                          // e.g. "lacuna-sweep-v1"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // pre-rendered fields

  // "# <schema> generated=<timestamp>" then header, then rows; the body
  // (everything after the first line) is timestamp-free
  std::string render(const std::string& timestamp) const;
};

// one row per case x spec; inadmissible 2D orders leave their fields empty
std::string sweep_csv(const BlowupReport& rep, const std::string& timestamp);

// full report structure, timestamp isolated in the "generated" member
std::string sweep_json(const BlowupReport& rep, const std::string& timestamp);

}  // namespace lacuna
