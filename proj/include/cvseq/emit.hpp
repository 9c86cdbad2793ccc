#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvseq {

/// Fixed significant-digit float formatting for CSV/JSON payloads.
inline std::string format_sig(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header) : cols_(header.size()) {
    append_row(header);
  }

  void append_row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_)
      throw std::invalid_argument("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }

  const std::string& str() const { return out_; }

 private:
  std::size_t cols_;
  std::string out_;
};

/// Whole-file write through a temp name so readers never observe a partial
/// file and failed runs leave nothing behind.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    if (!f.good()) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace cvseq
