// Copyright 2026 The XIR Authors.
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

#include "xir/features.h"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace xir {

ItemFeatures load_item_features(const std::string& path, const Vocabulary& items) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read item features '" + path + "'");
  std::vector<std::unordered_map<std::string, Index>> values;
  std::vector<std::vector<Index>> rows(items.size());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, delim);) cols.push_back(c);
    if (cols.size() < 2) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected an item and features");
    }
    if (values.empty()) values.resize(cols.size() - 1);
    if (cols.size() - 1 != values.size()) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": inconsistent feature count");
    }
    const auto item = items.find(cols[0]);
    if (!item) continue;
    auto& row = rows[*item];
    row.assign(values.size(), 0);
    for (std::size_t f = 0; f < values.size(); ++f) {
      const auto [it, added] =
          values[f].try_emplace(cols[f + 1], static_cast<Index>(values[f].size()) + 1);
      row[f] = it->second;
    }
  }
  if (values.empty()) throw ValidationError("item features '" + path + "' are empty");
  ItemFeatures out;
  for (const auto& v : values) out.cardinality.push_back(static_cast<Index>(v.size()) + 1);
  for (auto& row : rows) {
    if (row.empty()) row.assign(values.size(), 0);
  }
  out.categories = std::move(rows);
  return out;
}

}  // namespace xir
