// Copyright 2026 The modelid Authors.
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

#ifndef MODELID_CSV_H_
#define MODELID_CSV_H_

#include <string>
#include <vector>

namespace modelid {

// Shortest decimal text that parses back to the same double ("inf" and
// "nan" for non-finite values).
std::string FormatDouble(double value);

double ParseDouble(const std::string& text);

// Splits one CSV line on commas (no quoting; fields never contain commas).
std::vector<std::string> SplitCsvLine(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int Column(const std::string& name) const;
};

// Reads a CSV file, skipping lines that start with '#'.
CsvTable ReadCsv(const std::string& path);

}  // namespace modelid

#endif  // MODELID_CSV_H_
