/*
 * Copyright 2026 The rulekit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RULEKIT_CSV_H_
#define RULEKIT_CSV_H_

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace rulekit {

// Streaming reader for comma-delimited text with RFC 4180 quoting. Quoted
// fields may contain commas, doubled quotes and line breaks; CRLF and LF line
// endings are both accepted.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads the next row into `fields`. Returns false at end of input.
  // Throws ParseError on an unterminated quoted field.
  bool next(std::vector<std::string>& fields);

  // 1-based physical line on which the last returned row started.
  std::size_t line() const { return row_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t row_line_ = 0;
};

// Quotes `field` when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

// Joins already-formatted fields with commas, escaping each one.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace rulekit

#endif  // RULEKIT_CSV_H_
