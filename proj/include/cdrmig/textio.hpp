#pragma once

// Line-oriented CSV input/output over plain or gzip files.

#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cdrmig {

/// Input data is unreadable or violates a documented schema.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or parameter values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads lines from a plain or gzip-compressed file (zlib detects which).
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path &path);
  LineReader(const LineReader &) = delete;
  LineReader &operator=(const LineReader &) = delete;
  ~LineReader();

  /// Next line without the trailing newline / carriage return.
  bool next(std::string &line);
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
  gzFile file_ = nullptr;
  std::vector<char> buf_;
};

/// Writes text to a plain file, or gzip when the name ends in ".gz".
class TextWriter {
 public:
  explicit TextWriter(const std::filesystem::path &path);
  TextWriter(const TextWriter &) = delete;
  TextWriter &operator=(const TextWriter &) = delete;
  ~TextWriter();

  void write(std::string_view s);
  void line(std::string_view s) {
    write(s);
    write("\n");
  }
  void close();

 private:
  void flush();

  std::filesystem::path path_;
  gzFile gz_ = nullptr;
  std::FILE *plain_ = nullptr;
  std::string pending_;
};

/// Splits on commas. No quoting; the pipeline's formats never need it.
std::vector<std::string_view> split_csv(std::string_view line);

/// Checks that the header carries exactly the expected columns, in order.
/// Throws DataError naming the first offending column.
void expect_header(std::string_view header, const std::vector<std::string_view> &columns,
                   const std::filesystem::path &source);

int64_t parse_int(std::string_view s);
double parse_double(std::string_view s);

/// Shortest round-trip formatting for doubles; integral values print without
/// a fractional part.
std::string format_double(double v);

}  // namespace cdrmig
