#include "redbench/csv.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "redbench/error.hpp"

namespace redbench::csv {

std::optional<std::vector<std::string>> Reader::next() {
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return std::nullopt;
    ++physical_line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  record_line_ = physical_line_;

  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (!quoted) break;
      // Quoted field continues on the next physical line.
      std::string more;
      if (!std::getline(in_, more)) {
        throw RowError("csv", record_line_, "unterminated quoted field");
      }
      ++physical_line_;
      if (!more.empty() && more.back() == '\r') more.pop_back();
      field.push_back('\n');
      line = std::move(more);
      i = 0;
      continue;
    }
    const char c = line[i++];
    if (quoted) {
      if (c == '"') {
        if (i < line.size() && line[i] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::vector<std::size_t> bind_header(const std::vector<std::string>& header,
                                     const std::vector<std::string_view>& expected,
                                     const std::string& stage) {
  std::vector<std::size_t> positions;
  positions.reserve(expected.size());
  for (auto name : expected) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw SchemaError(stage, std::string(name),
                        fmt::format("missing column '{}'", name));
    }
    positions.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  for (const auto& column : header) {
    if (std::find(expected.begin(), expected.end(), column) == expected.end()) {
      throw SchemaError(stage, column, fmt::format("unknown column '{}'", column));
    }
  }
  return positions;
}

}  // namespace redbench::csv
