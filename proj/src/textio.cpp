#include "cdrmig/textio.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

namespace cdrmig {

LineReader::LineReader(const std::filesystem::path &path) : path_(path), buf_(1 << 16) {
  file_ = gzopen(path.c_str(), "rb");
  if (!file_) throw DataError("cannot open " + path.string());
  gzbuffer(file_, 1 << 17);
}

LineReader::~LineReader() {
  if (file_) gzclose(file_);
}

bool LineReader::next(std::string &line) {
  line.clear();
  while (true) {
    char *got = gzgets(file_, buf_.data(), static_cast<int>(buf_.size()));
    if (!got) {
      int err = 0;
      gzerror(file_, &err);
      if (err != Z_OK && err != Z_STREAM_END)
        throw DataError("read error in " + path_.string());
      if (line.empty()) return false;
      break;
    }
    size_t n = std::strlen(got);
    line.append(got, n);
    if (n > 0 && got[n - 1] == '\n') break;
  }
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  return true;
}

TextWriter::TextWriter(const std::filesystem::path &path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (path.extension() == ".gz") {
    gz_ = gzopen(path.c_str(), "wb6");
    if (!gz_) throw DataError("cannot write " + path.string());
  } else {
    plain_ = std::fopen(path.c_str(), "wb");
    if (!plain_) throw DataError("cannot write " + path.string());
  }
  pending_.reserve(1 << 16);
}

TextWriter::~TextWriter() {
  try {
    close();
  } catch (...) {
  }
}

void TextWriter::write(std::string_view s) {
  pending_.append(s);
  if (pending_.size() >= (1 << 16)) flush();
}

void TextWriter::flush() {
  if (pending_.empty()) return;
  if (gz_) {
    if (gzwrite(gz_, pending_.data(), static_cast<unsigned>(pending_.size())) == 0)
      throw DataError("write failed: " + path_.string());
  } else if (plain_) {
    if (std::fwrite(pending_.data(), 1, pending_.size(), plain_) != pending_.size())
      throw DataError("write failed: " + path_.string());
  }
  pending_.clear();
}

void TextWriter::close() {
  if (!gz_ && !plain_) return;
  flush();
  if (gz_) gzclose(gz_);
  if (plain_) std::fclose(plain_);
  gz_ = nullptr;
  plain_ = nullptr;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void expect_header(std::string_view header, const std::vector<std::string_view> &columns,
                   const std::filesystem::path &source) {
  auto got = split_csv(header);
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i >= got.size())
      throw DataError(source.string() + ": missing column '" + std::string(columns[i]) + "'");
    if (got[i] != columns[i])
      throw DataError(source.string() + ": expected column '" + std::string(columns[i]) +
                      "' but found '" + std::string(got[i]) + "'");
  }
  if (got.size() > columns.size())
    throw DataError(source.string() + ": unexpected column '" +
                    std::string(got[columns.size()]) + "'");
}

int64_t parse_int(std::string_view s) {
  int64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw DataError("not an integer: '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s) {
  // libstdc++ 11 has floating from_chars.
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw DataError("not a number: '" + std::string(s) + "'");
  return v;
}

std::string format_double(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, static_cast<int64_t>(v));
    return std::string(buf, r.ptr);
  }
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace cdrmig
