// Copyright 2026 The gnneval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "text_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gnneval/error.hpp"

namespace gnneval::text {

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError("invalid number '" + std::string(tok) + "'", line);
  }
  return v;
}

std::int64_t parse_int(std::string_view tok, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("invalid integer '" + std::string(tok) + "'", line);
  }
  return v;
}

std::uint64_t parse_u64(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("invalid unsigned integer '" + std::string(tok) + "'", line);
  }
  return v;
}

LineReader::LineReader(std::string text) : text_(std::move(text)) {}

bool LineReader::next(std::string_view& line) {
  if (pos_ >= text_.size()) return false;
  const std::size_t end = text_.find('\n', pos_);
  const std::size_t stop = end == std::string::npos ? text_.size() : end;
  line = std::string_view(text_).substr(pos_, stop - pos_);
  pos_ = end == std::string::npos ? text_.size() : end + 1;
  ++line_no_;
  return true;
}

std::string_view LineReader::expect(std::string_view what) {
  std::string_view line;
  if (!next(line)) {
    throw FormatError("unexpected end of file: expected " + std::string(what), line_no_ + 1);
  }
  return line;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void append_matrix_block(std::string& out, std::string_view name, const Tensor2& m) {
  out += name;
  out += ' ' + std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ' ';
      out += format_g17(m(r, c));
    }
    out += '\n';
  }
}

Tensor2 read_matrix_block(LineReader& in, std::string& name) {
  const auto header = split_ws(in.expect("parameter block header"));
  const std::size_t hline = in.line_number();
  if (header.size() != 3) throw FormatError("parameter header must be '<name> <rows> <cols>'", hline);
  name = std::string(header[0]);
  const auto rows = parse_int(header[1], hline);
  const auto cols = parse_int(header[2], hline);
  if (rows <= 0 || cols <= 0) throw FormatError("parameter dims must be positive", hline);
  Tensor2 m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto toks = split_ws(in.expect("parameter row"));
    if (static_cast<std::int64_t>(toks.size()) != cols) {
      throw FormatError("parameter '" + name + "' row has " + std::to_string(toks.size()) +
                            " values, expected " + std::to_string(cols),
                        in.line_number());
    }
    for (std::int64_t c = 0; c < cols; ++c) m(r, c) = parse_double(toks[c], in.line_number());
  }
  return m;
}

}  // namespace gnneval::text
