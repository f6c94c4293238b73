#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "urbanflow/error.hpp"
#include "urbanflow/io.hpp"

namespace urbanflow::io {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "read failed: '" + path.string() + "'");
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorKind::Io, "write failed: '" + path.string() + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// --- CSV ------------------------------------------------------------------------

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::string_view v) {
  if (pending_) text_ += ',';
  if (v.find_first_of(",\"\n") != std::string_view::npos) {
    text_ += '"';
    for (char ch : v) {
      if (ch == '"') text_ += '"';
      text_ += ch;
    }
    text_ += '"';
  } else {
    text_ += v;
  }
  ++pending_;
  return *this;
}

void CsvWriter::end_row() {
  if (pending_ != columns_) {
    throw Error(ErrorKind::Internal, "CSV row has " + std::to_string(pending_) + " cells, header has " +
                                         std::to_string(columns_));
  }
  text_ += '\n';
  pending_ = 0;
  ++rows_;
}

}  // namespace urbanflow::io
