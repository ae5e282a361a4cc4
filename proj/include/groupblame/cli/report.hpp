#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace groupblame::cli {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;
using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

enum class Format { Json, Csv, Table };

struct Column {
  std::string name;
  std::string type;  // "string", "number", "integer" or "boolean"
};

struct ScenarioRef {
  std::string name;
  std::optional<std::string> fingerprint;  // sha256 of the canonical text
};

// Everything a command writes to the output stream.
struct Report {
  std::vector<std::string> command;
  std::optional<ScenarioRef> scenario;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  Json summary;   // null when the command has none
  Json metadata = Json::object();

  void add_row(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string render(const Report& report, Format format);
Json to_json(const Report& report);

// RFC 4180 field quoting.
std::string csv_field(const std::string& text);

// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace groupblame::cli
