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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gnneval/tensor.hpp"

namespace gnneval::text {

/// "%.9g": up to 9 significant digits, used by data files.
std::string format_g9(double v);
/// "%.17g": round-trips any double exactly, used by checkpoints.
std::string format_g17(double v);
/// Fixed two decimals, used by report tables.
std::string format_fixed2(double v);

std::vector<std::string_view> split_ws(std::string_view line);

double parse_double(std::string_view tok, std::size_t line);
std::int64_t parse_int(std::string_view tok, std::size_t line);
std::uint64_t parse_u64(std::string_view tok, std::size_t line);

/// Line cursor over an in-memory text with 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::string text);
  /// Next line without the trailing LF; false at end of input.
  bool next(std::string_view& line);
  /// Next line or FormatError("unexpected end of file: <what>").
  std::string_view expect(std::string_view what);
  std::size_t line_number() const { return line_no_; }
  bool at_end() const { return pos_ >= text_.size(); }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes (truncate + write); throws
/// std::runtime_error when the path is not writable.
void write_file(const std::filesystem::path& path, std::string_view contents);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex16(std::uint64_t v);

/// Parameter block: "<name> <rows> <cols>" then one row per line, %.17g.
void append_matrix_block(std::string& out, std::string_view name, const Tensor2& m);
Tensor2 read_matrix_block(LineReader& in, std::string& name);

}  // namespace gnneval::text
