#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sipkit {

// Parsed CSV: `# key: value` lines before the header become metadata.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws SchemaError when absent.
  std::size_t column(std::string_view name) const;
};

// RFC 4180 quoting; a UTF-8 byte order mark is skipped. Throws IoError or
// SchemaError (ragged rows, unterminated quotes).
CsvTable read_csv(const std::filesystem::path& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void meta(std::string_view key, std::string_view value);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

/// Shortest decimal that round-trips; NaN/inf are written as empty cells.
std::string format_number(double v);

/// Strict full-string parse. Throws SchemaError with `what` in the message.
double parse_number(std::string_view text, std::string_view what);

/// Writes `text` to `path` atomically enough for our purposes (truncate + write).
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sipkit
