#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace redbench::csv {

/// Minimal RFC 4180 reader: comma separated, double-quote escaping, quoted
/// fields may span lines. Both `\n` and `\r\n` terminate records.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Blank lines are skipped.
  std::optional<std::vector<std::string>> next();

  /// 1-based physical line on which the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t physical_line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quotes a field only when it contains a separator, quote or newline.
std::string escape(std::string_view field);

/// Writes one record followed by `\n`.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Position of every expected column in `header`; throws SchemaError naming
/// the first missing column or the first unexpected one.
std::vector<std::size_t> bind_header(const std::vector<std::string>& header,
                                     const std::vector<std::string_view>& expected,
                                     const std::string& stage);

}  // namespace redbench::csv
