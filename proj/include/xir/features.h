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

#ifndef XIR_FEATURES_H_
#define XIR_FEATURES_H_

#include <string>

#include "xir/data.h"
#include "xir/model.h"

namespace xir {

// Reads "item<TAB>value_0<TAB>value_1..." lines (commas also accepted).
// Values are interned per column; category 0 of every feature is reserved
// for items without a row. Rows for items not in `items` are ignored.
ItemFeatures load_item_features(const std::string& path, const Vocabulary& items);

}  // namespace xir

#endif  // XIR_FEATURES_H_
