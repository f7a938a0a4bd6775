/*
 * Copyright 2026 The catinfluence Authors.
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

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace catinf::csv {

using Record = std::vector<std::string>;

// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line endings.
// Blank lines are skipped. Throws DataError on an unterminated quote.
std::vector<Record> read_records(std::istream& in);

std::string escape(std::string_view field);
void write_record(std::ostream& out, std::span<const std::string> fields);

}  // namespace catinf::csv
