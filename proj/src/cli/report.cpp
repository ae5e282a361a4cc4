#include "groupblame/cli/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "groupblame/causal/expr.hpp"

namespace groupblame::cli {

namespace {

Json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          // JSON has no infinity; costs of impossible options become null.
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else {
          return v;
        }
      },
      c);
}

std::string cell_text(const Cell& c, bool human) {
  return std::visit(
      [human](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return human ? "-" : "";
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          if (!human || !std::isfinite(v)) return causal::format_number(v);
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.6g", v);
          return buf;
        } else {
          return v;
        }
      },
      c);
}

std::string render_csv(const Report& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(r.columns[i].name);
  }
  out += "\r\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cell_text(row[i], false));
    }
    out += "\r\n";
  }
  return out;
}

std::string render_table(const Report& r) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(r.columns.size(), 0);
  std::vector<std::string> header;
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    header.push_back(r.columns[i].name);
    width[i] = r.columns[i].name.size();
  }
  for (const auto& row : r.rows) {
    std::vector<std::string> line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line.push_back(cell_text(row[i], true));
      width[i] = std::max(width[i], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  auto emit = [&](const std::vector<std::string>& line, std::string& out) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      bool numeric = r.columns[i].type == "number" || r.columns[i].type == "integer";
      std::string pad(width[i] - line[i].size(), ' ');
      if (i) out += "  ";
      out += numeric ? pad + line[i] : line[i] + (i + 1 < line.size() ? pad : "");
    }
    out += '\n';
  };
  std::string out;
  if (r.scenario) {
    out += "scenario " + r.scenario->name;
    if (r.scenario->fingerprint) out += "  sha256:" + r.scenario->fingerprint->substr(0, 16);
    out += "\n";
  }
  emit(header, out);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.push_back(std::string(w, '-'));
  emit(rule, out);
  for (const auto& line : cells) emit(line, out);
  return out;
}

}  // namespace

Json to_json(const Report& r) {
  Json j;
  j["schema"] = "groupblame.report";
  j["schema_version"] = kSchemaVersion;
  j["command"] = r.command;
  if (r.scenario) {
    j["scenario"] = {{"name", r.scenario->name}, {"fingerprint", nullptr}};
    if (r.scenario->fingerprint) j["scenario"]["fingerprint"] = *r.scenario->fingerprint;
  } else {
    j["scenario"] = nullptr;
  }
  j["columns"] = Json::array();
  for (const auto& c : r.columns) j["columns"].push_back({{"name", c.name}, {"type", c.type}});
  j["rows"] = Json::array();
  for (const auto& row : r.rows) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < row.size() && i < r.columns.size(); ++i) obj[r.columns[i].name] = cell_json(row[i]);
    j["rows"].push_back(std::move(obj));
  }
  if (!r.summary.is_null()) j["summary"] = r.summary;
  j["metadata"] = r.metadata;
  return j;
}

std::string render(const Report& report, Format format) {
  switch (format) {
    case Format::Json: return to_json(report).dump(2) + "\n";
    case Format::Csv: return render_csv(report);
    case Format::Table: return render_table(report);
  }
  return {};
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace groupblame::cli
